use serde::{Deserialize, Serialize};

use super::{Did, IdentityError};
use crate::crypto::{validate_public_key, SignatureSuite};

pub const DID_CONTEXT: &str = "https://www.w3.org/ns/did/v1";

/// Multibase base58btc (`z` prefix).
pub fn multibase_encode(bytes: &[u8]) -> String {
    format!("z{}", bs58::encode(bytes).into_string())
}

pub fn multibase_decode(text: &str) -> Result<Vec<u8>, IdentityError> {
    let body = text
        .strip_prefix('z')
        .ok_or_else(|| IdentityError::Encoding("multibase value must use base58btc (z)".into()))?;
    bs58::decode(body)
        .into_vec()
        .map_err(|e| IdentityError::Encoding(format!("base58: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationMethod {
    pub id: String,
    #[serde(rename = "type")]
    pub type_: String,
    pub controller: Did,
    pub public_key_multibase: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DidDocument {
    #[serde(rename = "@context")]
    pub context: Vec<String>,
    pub id: Did,
    #[serde(rename = "authentication")]
    pub authentication_methods: Vec<VerificationMethod>,
}

impl DidDocument {
    /// Single-key document for `did`.
    pub fn new(did: Did, suite: SignatureSuite, public_key: &[u8]) -> Self {
        DidDocument {
            context: vec![DID_CONTEXT.to_string()],
            authentication_methods: vec![VerificationMethod {
                id: did.with_fragment("keys-1"),
                type_: suite.w3c_name().to_string(),
                controller: did.clone(),
                public_key_multibase: multibase_encode(public_key),
            }],
            id: did,
        }
    }

    /// The authentication key, checked to be well formed for its suite.
    pub fn authentication_key(&self) -> Result<(SignatureSuite, Vec<u8>), IdentityError> {
        let vm = self
            .authentication_methods
            .first()
            .ok_or_else(|| IdentityError::InvalidDocument("no authentication method".into()))?;
        let suite = SignatureSuite::from_w3c_name(&vm.type_).ok_or_else(|| {
            IdentityError::InvalidDocument(format!("unknown verification type {}", vm.type_))
        })?;
        let pk = multibase_decode(&vm.public_key_multibase)?;
        validate_public_key(suite, &pk)
            .map_err(|e| IdentityError::InvalidDocument(e.to_string()))?;
        Ok((suite, pk))
    }

    /// Structural checks against the DID the document was resolved from.
    pub fn validate_for(&self, did: &Did) -> Result<(SignatureSuite, Vec<u8>), IdentityError> {
        if &self.id != did {
            return Err(IdentityError::InvalidDocument(format!(
                "document id {} does not match {did}",
                self.id
            )));
        }
        self.authentication_key()
    }

    pub fn to_canonical_json(&self) -> Vec<u8> {
        super::canonical_json(self)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, IdentityError> {
        serde_json::from_slice(bytes).map_err(IdentityError::from_json)
    }
}
