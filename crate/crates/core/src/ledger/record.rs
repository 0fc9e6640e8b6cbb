use rand_core::CryptoRngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::LedgerError;
use crate::crypto::{verify, KeyPair, Verdict};
use crate::identity::{canonical_json, Did, DidDocument};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payload {
    Document { document: DidDocument },
    Tombstone,
}

/// One entry in a DID's append-only history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LedgerRecord {
    pub method_specific_id: String,
    pub sequence: u64,
    pub payload: Payload,
    #[serde(with = "hex_bytes")]
    pub author_signature: Vec<u8>,
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        hex::decode(String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Content address of an initial document: hex SHA-256 of its canonical
/// JSON. Callers fill the id slots with a 64-zero placeholder, since the
/// final id embeds this value.
pub fn content_address(template: &DidDocument) -> String {
    hex::encode(Sha256::digest(canonical_json(template)))
}

fn placeholder_template(doc: &DidDocument) -> Option<DidDocument> {
    let placeholder = Did::new(doc.id.method_name(), &"0".repeat(64)).ok()?;
    let (suite, pk) = doc.authentication_key().ok()?;
    Some(DidDocument::new(placeholder, suite, &pk))
}

impl LedgerRecord {
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_value(self).expect("record serializes");
        v.as_object_mut().expect("record is an object").remove("authorSignature");
        canonical_json(&v)
    }

    /// Sequence-0 record, self-signed by the document's own key.
    pub fn genesis(document: DidDocument, keys: &KeyPair, rng: &mut dyn CryptoRngCore) -> Self {
        let mut r = LedgerRecord {
            method_specific_id: document.id.method_specific_id().to_string(),
            sequence: 0,
            payload: Payload::Document { document },
            author_signature: Vec::new(),
        };
        r.author_signature = keys.sign(&r.signing_bytes(), rng);
        r
    }

    /// Next record after `prev`, signed by the controller key of `prev`.
    pub fn successor(
        prev: &LedgerRecord,
        payload: Payload,
        controller: &KeyPair,
        rng: &mut dyn CryptoRngCore,
    ) -> Self {
        let mut r = LedgerRecord {
            method_specific_id: prev.method_specific_id.clone(),
            sequence: prev.sequence + 1,
            payload,
            author_signature: Vec::new(),
        };
        r.author_signature = controller.sign(&r.signing_bytes(), rng);
        r
    }

    pub fn document(&self) -> Option<&DidDocument> {
        match &self.payload {
            Payload::Document { document } => Some(document),
            Payload::Tombstone => None,
        }
    }

    pub fn is_tombstone(&self) -> bool {
        matches!(self.payload, Payload::Tombstone)
    }

    fn check_signed_by(&self, doc: &DidDocument) -> Result<(), LedgerError> {
        let (suite, pk) = doc
            .authentication_key()
            .map_err(|e| LedgerError::Continuity(e.to_string()))?;
        match verify(suite, &pk, &self.signing_bytes(), &self.author_signature) {
            Ok(Verdict::Accepted) => Ok(()),
            _ => Err(LedgerError::BadSignature),
        }
    }

    fn check_document_id(&self, method: &str) -> Result<(), LedgerError> {
        if let Some(doc) = self.document() {
            if doc.id.method_name() != method || doc.id.method_specific_id() != self.method_specific_id {
                return Err(LedgerError::Continuity(format!(
                    "document id {} does not live at {method}:{}",
                    doc.id, self.method_specific_id
                )));
            }
            doc.authentication_key().map_err(|e| LedgerError::Continuity(e.to_string()))?;
        }
        Ok(())
    }

    /// Validates a record against the current head for its id (None for a
    /// new id) on a ledger serving DID method `method`.
    pub fn check_continuity(&self, head: Option<&LedgerRecord>, method: &str) -> Result<(), LedgerError> {
        self.check_document_id(method)?;
        match head {
            None => {
                if self.sequence != 0 {
                    return Err(LedgerError::Continuity(format!(
                        "first record for {} has sequence {}",
                        self.method_specific_id, self.sequence
                    )));
                }
                let doc = self
                    .document()
                    .ok_or_else(|| LedgerError::Continuity("genesis record is a tombstone".into()))?;
                let expected = placeholder_template(doc).map(|t| content_address(&t));
                if expected.as_deref() != Some(self.method_specific_id.as_str()) {
                    return Err(LedgerError::Continuity("id is not the document's content address".into()));
                }
                self.check_signed_by(doc)
            }
            Some(prev) => {
                if prev.is_tombstone() {
                    return Err(LedgerError::AfterTombstone);
                }
                if self.sequence != prev.sequence + 1 {
                    return Err(LedgerError::Continuity(format!(
                        "sequence {} does not follow {}",
                        self.sequence, prev.sequence
                    )));
                }
                self.check_signed_by(prev.document().expect("non-tombstone head has a document"))
            }
        }
    }
}
