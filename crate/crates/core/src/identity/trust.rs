use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::RwLock;

use super::{Did, IdentityError};
use crate::crypto::{validate_public_key, SignatureSuite};

pub const ISSUER_KEY_PEM_TAG: &str = "SSI ISSUER KEY";

#[derive(Debug, Default, Clone)]
struct Inner {
    issuer_keys: HashMap<Did, (SignatureSuite, Vec<u8>)>,
    trusted_dids: HashSet<Did>,
}

/// Trusted issuer keys (VC mode) and the trusted-DID allow-list (DID mode).
/// Reads run concurrently; mutations are serialized.
#[derive(Debug, Default)]
pub struct TrustStore {
    inner: RwLock<Inner>,
}

impl Clone for TrustStore {
    fn clone(&self) -> Self {
        TrustStore { inner: RwLock::new(self.inner.read().expect("trust store lock").clone()) }
    }
}

impl TrustStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_issuer(&self, did: Did, suite: SignatureSuite, public_key: Vec<u8>) {
        self.inner.write().expect("trust store lock").issuer_keys.insert(did, (suite, public_key));
    }

    pub fn remove_issuer(&self, did: &Did) {
        self.inner.write().expect("trust store lock").issuer_keys.remove(did);
    }

    pub fn trust_did(&self, did: Did) {
        self.inner.write().expect("trust store lock").trusted_dids.insert(did);
    }

    pub fn distrust_did(&self, did: &Did) {
        self.inner.write().expect("trust store lock").trusted_dids.remove(did);
    }

    pub fn issuer_key(&self, did: &Did) -> Option<(SignatureSuite, Vec<u8>)> {
        self.inner.read().expect("trust store lock").issuer_keys.get(did).cloned()
    }

    pub fn is_trusted_did(&self, did: &Did) -> bool {
        self.inner.read().expect("trust store lock").trusted_dids.contains(did)
    }

    pub fn issuer_count(&self) -> usize {
        self.inner.read().expect("trust store lock").issuer_keys.len()
    }

    pub fn trusted_did_count(&self) -> usize {
        self.inner.read().expect("trust store lock").trusted_dids.len()
    }

    /// Loads every `*.pem` issuer key file in `issuer_dir` and, if given, a
    /// DID allow-list (one DID per line, `#` starts a comment).
    pub fn load(issuer_dir: Option<&Path>, did_list: Option<&Path>) -> Result<Self, IdentityError> {
        let store = TrustStore::new();
        if let Some(dir) = issuer_dir {
            let mut paths: Vec<_> = fs::read_dir(dir)
                .map_err(|e| IdentityError::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "pem"))
                .collect();
            paths.sort();
            for p in paths {
                let text = fs::read_to_string(&p).map_err(|e| IdentityError::io(&p, e))?;
                let (did, suite, pk) = parse_issuer_key(&text)?;
                store.add_issuer(did, suite, pk);
            }
        }
        if let Some(path) = did_list {
            let text = fs::read_to_string(path).map_err(|e| IdentityError::io(path, e))?;
            for did in parse_did_list(&text)? {
                store.trust_did(did);
            }
        }
        Ok(store)
    }
}

pub fn parse_did_list(text: &str) -> Result<Vec<Did>, IdentityError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.parse().map_err(IdentityError::from))
        .collect()
}

/// Issuer key file: `Issuer:` and `Suite:` lines followed by a PEM block
/// holding the raw public key.
pub fn issuer_key_to_pem(did: &Did, suite: SignatureSuite, public_key: &[u8]) -> String {
    let block = pem::encode(&pem::Pem::new(ISSUER_KEY_PEM_TAG, public_key.to_vec()));
    format!("Issuer: {did}\nSuite: {}\n{block}", suite.label())
}

pub fn parse_issuer_key(text: &str) -> Result<(Did, SignatureSuite, Vec<u8>), IdentityError> {
    let mut did = None;
    let mut suite = None;
    for line in text.lines().take_while(|l| !l.starts_with("-----BEGIN")) {
        match line.split_once(':') {
            Some(("Issuer", v)) => did = Some(v.trim().parse::<Did>()?),
            Some(("Suite", v)) => suite = SignatureSuite::from_label(v.trim()),
            _ => {}
        }
    }
    let did = did.ok_or_else(|| IdentityError::Encoding("missing Issuer line".into()))?;
    let suite = suite.ok_or_else(|| IdentityError::Encoding("missing or unknown Suite line".into()))?;
    let p = pem::parse(text).map_err(|e| IdentityError::Encoding(format!("pem: {e}")))?;
    if p.tag() != ISSUER_KEY_PEM_TAG {
        return Err(IdentityError::Encoding(format!("unexpected PEM tag {}", p.tag())));
    }
    validate_public_key(suite, p.contents())
        .map_err(|e| IdentityError::Encoding(e.to_string()))?;
    Ok((did, suite, p.contents().to_vec()))
}
