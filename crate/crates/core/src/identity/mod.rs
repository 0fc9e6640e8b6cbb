//! DIDs, DID Documents, Verifiable Credentials and the DID Method operations.

mod credential;
mod did;
mod document;
mod json;
mod method;
mod trust;

use std::path::Path;

pub use credential::{
    vc_deserialize, vc_issue, vc_serialize, vc_verify, CredentialRequest, CredentialSubject,
    Proof, VcRejection, VerifiableCredential, ASSERTION_METHOD, CREDENTIALS_CONTEXT, VC_TYPE,
};
pub use did::{split_did_url, Did, DidMethodId, DidParseError};
pub use document::{multibase_decode, multibase_encode, DidDocument, VerificationMethod, DID_CONTEXT};
pub use json::canonical_json;
pub use method::{DidMethod, Resolution, Resolver};
pub use trust::{issuer_key_to_pem, parse_did_list, parse_issuer_key, TrustStore, ISSUER_KEY_PEM_TAG};

use crate::ledger::LedgerError;

#[derive(Debug, thiserror::Error)]
pub enum IdentityError {
    #[error(transparent)]
    Did(#[from] DidParseError),
    #[error("encoding: {0}")]
    Encoding(String),
    #[error("invalid DID document: {0}")]
    InvalidDocument(String),
    #[error("JSON parse error at line {line} column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("validity window is empty")]
    InvalidValidity,
    #[error("unsupported DID method {0}")]
    UnsupportedMethod(String),
    #[error("{0} not found on the ledger")]
    NotFound(Did),
    #[error("ledger: {0}")]
    Ledger(#[from] LedgerError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl IdentityError {
    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        IdentityError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        IdentityError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}
