//! The ledger that anchors DID Documents, and clients for reaching it.

mod attack;
mod net;
mod record;
mod store;

pub use attack::{mitm_resolution_attack, AttackOutcome, AttackPosition, LedgerDeployment};
pub use net::{ChannelMode, LedgerServer, RemoteLedgerClient, ServerChannel};
pub use record::{content_address, LedgerRecord, Payload};
pub use store::LedgerStore;

/// Read/append access to a ledger. Implemented by the local store and by the
/// network client.
pub trait LedgerClient: Send + Sync {
    /// Latest record for `method_specific_id`.
    fn get(&self, method_specific_id: &str) -> Result<Option<LedgerRecord>, LedgerError>;
    fn put(&self, record: &LedgerRecord) -> Result<(), LedgerError>;
}

impl<T: LedgerClient + ?Sized> LedgerClient for std::sync::Arc<T> {
    fn get(&self, id: &str) -> Result<Option<LedgerRecord>, LedgerError> {
        (**self).get(id)
    }

    fn put(&self, record: &LedgerRecord) -> Result<(), LedgerError> {
        (**self).put(record)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("continuity violation: {0}")]
    Continuity(String),
    #[error("record author signature invalid")]
    BadSignature,
    #[error("identifier is deactivated")]
    AfterTombstone,
    #[error("ledger log corrupt: {0}")]
    Corrupt(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("ledger channel not authenticated: {0}")]
    Channel(String),
    #[error("protocol: {0}")]
    Protocol(String),
}

impl LedgerError {
    /// Stable code used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            LedgerError::Continuity(_) => "continuity",
            LedgerError::BadSignature => "bad_signature",
            LedgerError::AfterTombstone => "after_tombstone",
            LedgerError::Corrupt(_) => "corrupt",
            LedgerError::Io(_) => "io",
            LedgerError::Transport(_) => "transport",
            LedgerError::Channel(_) => "channel",
            LedgerError::Protocol(_) => "protocol",
        }
    }

    pub fn from_code(code: &str, detail: String) -> Self {
        match code {
            "continuity" => LedgerError::Continuity(detail),
            "bad_signature" => LedgerError::BadSignature,
            "after_tombstone" => LedgerError::AfterTombstone,
            "corrupt" => LedgerError::Corrupt(detail),
            "io" => LedgerError::Io(detail),
            _ => LedgerError::Protocol(format!("{code}: {detail}")),
        }
    }
}
