//! Primitives and the TLS 1.3 key schedule.

mod aead;
mod key_schedule;
mod kx;
mod sign;
mod signed_content;
mod suite;

pub use aead::{RecordCipher, AEAD_TAG_LEN};
pub use key_schedule::{
    derive_secret, derive_session_keys, finished_mac, hkdf_expand_label, KeySchedule,
    SessionKeys, TrafficKeys, TranscriptHash,
};
pub use kx::{ecdhe_exchange, X25519KeyPair};
#[allow(unused_imports)]
pub(crate) use sign::CryptoRngAdapter;
pub use sign::{os_rng, sign, validate_public_key, verify, KeyPair, Verdict};
pub use signed_content::{build_signed_content, context_string, Role, VerifyPurpose};
pub use suite::{CipherSuite, HashAlg, SignatureSuite};

use std::fmt::Display;

#[derive(Debug, thiserror::Error)]
pub enum CryptoError {
    #[error("malformed {suite} key: {reason}")]
    MalformedKey { suite: SignatureSuite, reason: String },
    #[error("invalid key share: {0}")]
    InvalidKeyShare(&'static str),
    #[error("record authentication failed")]
    AeadFailure,
    #[error("record sequence number exhausted")]
    SequenceExhausted,
}

impl CryptoError {
    pub(crate) fn malformed(suite: SignatureSuite, reason: impl Display) -> Self {
        CryptoError::MalformedKey { suite, reason: reason.to_string() }
    }
}
