use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand_core::CryptoRngCore;

use super::{Did, DidDocument, DidMethodId, IdentityError};
use crate::crypto::{KeyPair, SignatureSuite};
use crate::ledger::{content_address, LedgerClient, LedgerRecord, Payload};

/// Result of resolving a DID: the latest document, or proof of deactivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Document(DidDocument),
    Revoked,
}

/// One DID Method bound to the ledger that backs it.
#[derive(Clone)]
pub struct DidMethod {
    id: DidMethodId,
    ledger: Arc<dyn LedgerClient>,
}

impl fmt::Debug for DidMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DidMethod").field("id", &self.id).finish_non_exhaustive()
    }
}

impl DidMethod {
    pub fn new(id: DidMethodId, ledger: Arc<dyn LedgerClient>) -> Self {
        assert!(id.name().is_some(), "DID method {id} has no registered name");
        DidMethod { id, ledger }
    }

    pub fn id(&self) -> DidMethodId {
        self.id
    }

    pub fn ledger(&self) -> &Arc<dyn LedgerClient> {
        &self.ledger
    }

    fn name(&self) -> &'static str {
        self.id.name().expect("checked at construction")
    }

    /// Generates a fresh identity key pair and anchors its document.
    pub fn did_create(
        &self,
        suite: SignatureSuite,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<(Did, KeyPair), IdentityError> {
        let keys = KeyPair::generate(suite, rng);
        let did = self.did_create_with_keys(&keys, rng)?;
        Ok((did, keys))
    }

    /// The DID that [`DidMethod::did_create_with_keys`] assigns to `keys`.
    pub fn did_for_keys(&self, keys: &KeyPair) -> Result<Did, IdentityError> {
        let placeholder = Did::new(self.name(), &"0".repeat(64))?;
        let template = DidDocument::new(placeholder, keys.suite(), keys.public_key());
        Ok(Did::new(self.name(), &content_address(&template))?)
    }

    pub fn did_create_with_keys(
        &self,
        keys: &KeyPair,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<Did, IdentityError> {
        let did = self.did_for_keys(keys)?;
        let doc = DidDocument::new(did.clone(), keys.suite(), keys.public_key());
        let record = LedgerRecord::genesis(doc, keys, rng);
        self.ledger.put(&record)?;
        Ok(did)
    }

    fn latest(&self, did: &Did) -> Result<LedgerRecord, IdentityError> {
        if did.method_id() != Some(self.id) {
            return Err(IdentityError::UnsupportedMethod(did.method_name().to_string()));
        }
        self.ledger
            .get(did.method_specific_id())?
            .ok_or_else(|| IdentityError::NotFound(did.clone()))
    }

    pub fn did_resolve(&self, did: &Did) -> Result<Resolution, IdentityError> {
        match self.latest(did)?.payload {
            Payload::Tombstone => Ok(Resolution::Revoked),
            Payload::Document { document } => {
                document.validate_for(did)?;
                Ok(Resolution::Document(document))
            }
        }
    }

    /// Replaces the document's key with `new_keys`. The ledger accepts the
    /// record only if `current_keys` controls the current document.
    pub fn did_update(
        &self,
        did: &Did,
        current_keys: &KeyPair,
        new_keys: &KeyPair,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<Did, IdentityError> {
        let prev = self.latest(did)?;
        let doc = DidDocument::new(did.clone(), new_keys.suite(), new_keys.public_key());
        let record = LedgerRecord::successor(&prev, Payload::Document { document: doc }, current_keys, rng);
        self.ledger.put(&record)?;
        Ok(did.clone())
    }

    /// Irreversibly revokes `did`. Deactivating twice is acknowledged.
    pub fn did_deactivate(
        &self,
        did: &Did,
        current_keys: &KeyPair,
        rng: &mut dyn CryptoRngCore,
    ) -> Result<(), IdentityError> {
        let prev = self.latest(did)?;
        if prev.is_tombstone() {
            return Ok(());
        }
        let record = LedgerRecord::successor(&prev, Payload::Tombstone, current_keys, rng);
        self.ledger.put(&record)?;
        Ok(())
    }
}

/// Dispatches resolution to the DID Method named by each DID.
#[derive(Debug, Clone, Default)]
pub struct Resolver {
    methods: BTreeMap<DidMethodId, DidMethod>,
}

impl Resolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, method: DidMethod) -> Self {
        self.add(method);
        self
    }

    pub fn add(&mut self, method: DidMethod) {
        self.methods.insert(method.id(), method);
    }

    pub fn method(&self, id: DidMethodId) -> Option<&DidMethod> {
        self.methods.get(&id)
    }

    pub fn supported_methods(&self) -> Vec<DidMethodId> {
        self.methods.keys().copied().collect()
    }

    pub fn supports(&self, id: DidMethodId) -> bool {
        self.methods.contains_key(&id)
    }

    pub fn resolve(&self, did: &Did) -> Result<Resolution, IdentityError> {
        let unsupported = || IdentityError::UnsupportedMethod(did.method_name().to_string());
        let id = did.method_id().ok_or_else(unsupported)?;
        self.methods.get(&id).ok_or_else(unsupported)?.did_resolve(did)
    }
}
