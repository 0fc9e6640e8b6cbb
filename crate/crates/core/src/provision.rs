//! Ready-made identities for tests, benches and the measurement harness.
//!
//! RSA key generation dominates setup time, so key pairs are drawn from a
//! process-wide pool derived from fixed seeds.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use chrono::{Duration, Utc};
use rand_chacha::ChaCha20Rng;
use rand_core::{CryptoRngCore, SeedableRng};

use crate::crypto::{KeyPair, Role, SignatureSuite};
use crate::handshake::{ClientAuthRequest, EndpointConfig, PreferredMode, SsiIdentity};
use crate::identity::{
    vc_issue, CredentialRequest, Did, DidMethod, DidMethodId, IdentityError, Resolver, TrustStore,
};
use crate::ledger::LedgerStore;
use crate::pki::{issue_chain_with_keys, PkiError, X509Identity};

/// Key pair number `index` for `suite`, identical across calls and runs.
pub fn pooled_key(suite: SignatureSuite, index: u32) -> KeyPair {
    static POOL: OnceLock<Mutex<HashMap<(SignatureSuite, u32), KeyPair>>> = OnceLock::new();
    let pool = POOL.get_or_init(Default::default);
    if let Some(k) = pool.lock().unwrap().get(&(suite, index)) {
        return k.clone();
    }
    let mut seed = [0u8; 32];
    seed[0] = suite.scheme() as u8;
    seed[1] = (suite.scheme() >> 8) as u8;
    seed[4..8].copy_from_slice(&index.to_be_bytes());
    let keys = KeyPair::generate(suite, &mut ChaCha20Rng::from_seed(seed));
    pool.lock().unwrap().entry((suite, index)).or_insert(keys).clone()
}

#[derive(Debug, thiserror::Error)]
pub enum ProvisionError {
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error(transparent)]
    Pki(#[from] PkiError),
}

/// One endpoint's complete set of credentials.
#[derive(Debug, Clone)]
pub struct Party {
    pub name: String,
    pub root: Vec<u8>,
    pub x509: X509Identity,
    pub ssi: SsiIdentity,
}

/// Pools of client and server parties, an issuer, and the ledgers their DIDs
/// live on, all using one signature suite. Every party trusts every peer.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub suite: SignatureSuite,
    pub resolver: Resolver,
    pub trust: Arc<TrustStore>,
    pub issuer_did: Did,
    pub issuer_keys: KeyPair,
    pub clients: Vec<Party>,
    pub servers: Vec<Party>,
}

pub const FIXTURE_METHODS: [DidMethodId; 2] = [DidMethodId::IOTA, DidMethodId::BTCR];

impl Fixture {
    pub fn new(suite: SignatureSuite, rng: &mut dyn CryptoRngCore) -> Result<Self, ProvisionError> {
        let mut resolver = Resolver::new();
        for id in FIXTURE_METHODS {
            resolver.add(DidMethod::new(id, Arc::new(LedgerStore::in_memory(id))));
        }
        Self::with_resolver(suite, resolver, 1, rng)
    }

    /// Anchors all DIDs through `resolver`, whose first method is used, and
    /// provisions `pool` parties per role.
    pub fn with_resolver(
        suite: SignatureSuite,
        resolver: Resolver,
        pool: usize,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<Self, ProvisionError> {
        assert!(pool > 0, "pool must hold at least one party per role");
        let method = resolver
            .supported_methods()
            .first()
            .and_then(|m| resolver.method(*m).cloned())
            .expect("resolver has at least one method");
        let trust = Arc::new(TrustStore::new());
        let issuer_keys = pooled_key(suite, 0);
        let issuer_did = method.did_create_with_keys(&issuer_keys, rng)?;
        trust.add_issuer(issuer_did.clone(), suite, issuer_keys.public_key().to_vec());

        let mut party = |name: &str, base: u32| -> Result<Party, ProvisionError> {
            let chain = issue_chain_with_keys(
                &format!("{name}.example"),
                &pooled_key(suite, base),
                &pooled_key(suite, base + 1),
                pooled_key(suite, base + 2),
                rng,
            )?;
            let keys = pooled_key(suite, base + 3);
            let did = method.did_create_with_keys(&keys, rng)?;
            trust.trust_did(did.clone());
            let now = Utc::now();
            let request = CredentialRequest::new(did.clone(), now - Duration::days(1), now + Duration::days(365))
                .with_claim("name", name);
            let vc = vc_issue(&issuer_keys, &issuer_did, request, rng)?;
            Ok(Party {
                name: name.to_string(),
                root: chain.root,
                x509: chain.identity,
                ssi: SsiIdentity { did, keys, credential: Some(vc) },
            })
        };
        let mut clients = Vec::with_capacity(pool);
        let mut servers = Vec::with_capacity(pool);
        for i in 0..pool as u32 {
            let suffix = if i == 0 { String::new() } else { i.to_string() };
            clients.push(party(&format!("client{suffix}"), 1 + 8 * i)?);
            servers.push(party(&format!("server{suffix}"), 5 + 8 * i)?);
        }
        Ok(Fixture { suite, resolver, trust, issuer_did, issuer_keys, clients, servers })
    }

    pub fn client(&self) -> &Party {
        &self.clients[0]
    }

    pub fn server(&self) -> &Party {
        &self.servers[0]
    }

    pub fn party(&self, role: Role, index: usize) -> &Party {
        match role {
            Role::Client => &self.clients[index],
            Role::Server => &self.servers[index],
        }
    }

    /// `party`'s key anchored as a DID on `method`, with a fresh credential.
    /// Repeated calls reuse the existing DID.
    pub fn identity_on(
        &self,
        party: &Party,
        method: DidMethodId,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<SsiIdentity, ProvisionError> {
        let m = self
            .resolver
            .method(method)
            .ok_or_else(|| IdentityError::UnsupportedMethod(method.to_string()))?;
        let keys = party.ssi.keys.clone();
        let did = match m.did_create_with_keys(&keys, rng) {
            Ok(did) => did,
            Err(IdentityError::Ledger(_)) => m.did_for_keys(&keys)?,
            Err(e) => return Err(e.into()),
        };
        self.trust.trust_did(did.clone());
        let now = Utc::now();
        let request = CredentialRequest::new(did.clone(), now - Duration::days(1), now + Duration::days(365));
        let vc = vc_issue(&self.issuer_keys, &self.issuer_did, request, rng)?;
        Ok(SsiIdentity { did, keys, credential: Some(vc) })
    }

    pub fn method_for(&self, did: &Did) -> Option<&DidMethod> {
        did.method_id().and_then(|m| self.resolver.method(m))
    }

    fn base_config(&self, role: Role, index: usize) -> EndpointConfig {
        let me = self.party(role, index);
        let peers = match role {
            Role::Client => &self.servers,
            Role::Server => &self.clients,
        };
        let mut cfg = EndpointConfig::new(role);
        cfg.x509 = Some(me.x509.clone());
        cfg.ssi = Some(me.ssi.clone());
        cfg.supported_methods = self.resolver.supported_methods();
        cfg.trust = self.trust.clone();
        cfg.x509_roots = peers.iter().map(|p| p.root.clone()).collect();
        cfg.resolver = self.resolver.clone();
        cfg.signature_algorithms = vec![self.suite];
        cfg
    }

    pub fn client_config(&self, mode: PreferredMode) -> EndpointConfig {
        self.client_config_as(0, mode)
    }

    pub fn server_config(&self, client_auth: ClientAuthRequest) -> EndpointConfig {
        self.server_config_as(0, client_auth)
    }

    pub fn client_config_as(&self, index: usize, mode: PreferredMode) -> EndpointConfig {
        let mut cfg = self.base_config(Role::Client, index);
        cfg.preferred_mode = mode;
        cfg
    }

    pub fn server_config_as(&self, index: usize, client_auth: ClientAuthRequest) -> EndpointConfig {
        let mut cfg = self.base_config(Role::Server, index);
        cfg.client_auth = client_auth;
        cfg
    }
}

/// Fixtures are costly to build for RSA; share one per suite.
pub fn shared_fixture(suite: SignatureSuite) -> &'static Fixture {
    static FIXTURES: OnceLock<Mutex<HashMap<SignatureSuite, &'static Fixture>>> = OnceLock::new();
    let map = FIXTURES.get_or_init(Default::default);
    let mut guard = map.lock().unwrap();
    guard.entry(suite).or_insert_with(|| {
        let mut rng = ChaCha20Rng::seed_from_u64(suite.scheme() as u64);
        Box::leak(Box::new(Fixture::new(suite, &mut rng).expect("fixture provisioning")))
    })
}
