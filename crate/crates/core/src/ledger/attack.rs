//! On-path attack against DID resolution.
//!
//! An attacker who can sit between a resolver and the ledger node answers
//! the lookup for a victim DID with a document carrying the attacker's key,
//! then completes an SSI-DID handshake as the victim. Whether the relying
//! endpoint accepts depends only on how the resolver reaches the node.

use std::sync::Arc;
use std::thread;

use rand_core::CryptoRngCore;

use super::net::{ChannelMode, LedgerServer, RemoteLedgerClient, ServerChannel};
use super::{LedgerClient, LedgerError, LedgerRecord, LedgerStore, Payload};
use crate::crypto::{KeyPair, Role};
use crate::handshake::{
    duplex, run_client, run_server, ClientAuthRequest, EndpointConfig, HandshakeError,
    PreferredMode, SsiIdentity,
};
use crate::identity::{Did, DidDocument, DidMethod, DidMethodId, Resolver, TrustStore};
use crate::pki::{IssuedChain, X509Identity};

/// Answers every request from `upstream`, except lookups of the victim,
/// which get a forged successor record binding the victim DID to the
/// attacker's key.
struct ForgingLedger {
    upstream: RemoteLedgerClient,
    victim: Did,
    forged: DidDocument,
    attacker: KeyPair,
}

impl LedgerClient for ForgingLedger {
    fn get(&self, id: &str) -> Result<Option<LedgerRecord>, LedgerError> {
        let real = self.upstream.get(id)?;
        if id != self.victim.method_specific_id() {
            return Ok(real);
        }
        let Some(real) = real else { return Ok(None) };
        let payload = Payload::Document { document: self.forged.clone() };
        let mut rng = crate::crypto::os_rng();
        Ok(Some(LedgerRecord::successor(&real, payload, &self.attacker, &mut rng)))
    }

    fn put(&self, record: &LedgerRecord) -> Result<(), LedgerError> {
        self.upstream.put(record)
    }
}

/// A ledger node for one DID method plus its certificate chain.
pub struct LedgerDeployment {
    pub method: DidMethodId,
    pub store: Arc<LedgerStore>,
    pub node: IssuedChain,
}

/// Where the attacker stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackPosition {
    /// No interposition: the attacker only holds its own key.
    Baseline,
    OnPath,
}

#[derive(Debug)]
pub struct AttackOutcome {
    pub channel: &'static str,
    pub position: AttackPosition,
    /// The relying endpoint's handshake result.
    pub relying: Result<(), HandshakeError>,
    /// True when the relying endpoint accepted the attacker as the victim.
    pub impersonated: bool,
}

/// Runs one resolution-attack trial.
///
/// `relying` is the honest client's own identity, anchored on the same
/// ledger. `impostor_cert` is the chain the attacker presents when the resolver
/// expects an authenticated channel; it cannot chain to the node's root.
pub fn mitm_resolution_attack(
    attacker_keys: &KeyPair,
    victim_did: &Did,
    relying_identity: &SsiIdentity,
    ledger: &LedgerDeployment,
    plaintext: bool,
    position: AttackPosition,
    impostor_cert: &X509Identity,
    rng: &mut dyn CryptoRngCore,
) -> Result<AttackOutcome, LedgerError> {
    let io = |e: std::io::Error| LedgerError::Io(e.to_string());
    let (node_channel, client_mode) = if plaintext {
        (ServerChannel::PlaintextInsecure, ChannelMode::PlaintextInsecure)
    } else {
        (
            ServerChannel::Tls(ledger.node.identity.clone()),
            ChannelMode::Authenticated { trust_anchors: vec![ledger.node.root.clone()] },
        )
    };
    let node = LedgerServer::start("127.0.0.1:0", node_channel, ledger.store.clone()).map_err(io)?;
    let upstream = RemoteLedgerClient::new(node.local_addr(), client_mode.clone());

    let proxy = match position {
        AttackPosition::Baseline => None,
        AttackPosition::OnPath => {
            let forged = DidDocument::new(victim_did.clone(), attacker_keys.suite(), attacker_keys.public_key());
            let backend = ForgingLedger {
                upstream: upstream.clone(),
                victim: victim_did.clone(),
                forged,
                attacker: attacker_keys.clone(),
            };
            let channel = if plaintext {
                ServerChannel::PlaintextInsecure
            } else {
                ServerChannel::Tls(impostor_cert.clone())
            };
            Some(LedgerServer::start("127.0.0.1:0", channel, Arc::new(backend)).map_err(io)?)
        }
    };
    let resolver_addr = proxy.as_ref().map_or(node.local_addr(), |p| p.local_addr());
    let remote = RemoteLedgerClient::new(resolver_addr, client_mode.clone());
    let resolver = Resolver::new().with(DidMethod::new(ledger.method, Arc::new(remote)));

    let trust = Arc::new(TrustStore::new());
    trust.trust_did(victim_did.clone());
    let mut relying = EndpointConfig::new(Role::Client);
    relying.ssi = Some(relying_identity.clone());
    relying.preferred_mode = PreferredMode::Did;
    relying.supported_methods = vec![ledger.method];
    relying.resolver = resolver;
    relying.trust = trust;
    relying.signature_algorithms = vec![attacker_keys.suite()];

    let mut attacker = EndpointConfig::new(Role::Server);
    attacker.ssi = Some(SsiIdentity { did: victim_did.clone(), keys: attacker_keys.clone(), credential: None });
    attacker.supported_methods = vec![ledger.method];
    attacker.client_auth = ClientAuthRequest::None;
    attacker.signature_algorithms = vec![attacker_keys.suite()];

    let (a, b) = duplex();
    let mut srv_seed = [0u8; 32];
    rng.fill_bytes(&mut srv_seed);
    let srv = thread::spawn(move || {
        use rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::from_seed(srv_seed);
        run_server(&attacker, b, &mut rng).map(|_| ())
    });
    let result = run_client(&relying, a, rng);
    let _ = srv.join();
    let impersonated = matches!(&result, Ok(s) if s.outcome.peer.did() == Some(victim_did));
    drop(proxy);
    drop(node);
    Ok(AttackOutcome {
        channel: client_mode.name(),
        position,
        relying: result.map(|_| ()),
        impersonated,
    })
}
