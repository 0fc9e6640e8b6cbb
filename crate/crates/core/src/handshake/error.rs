pub const ALERT_CLOSE_NOTIFY: u8 = 0;
pub const ALERT_UNEXPECTED_MESSAGE: u8 = 10;
pub const ALERT_BAD_RECORD_MAC: u8 = 20;
pub const ALERT_HANDSHAKE_FAILURE: u8 = 40;
pub const ALERT_BAD_CERTIFICATE: u8 = 42;
pub const ALERT_CERTIFICATE_REVOKED: u8 = 44;
pub const ALERT_CERTIFICATE_UNKNOWN: u8 = 46;
pub const ALERT_DECODE_ERROR: u8 = 50;
pub const ALERT_DECRYPT_ERROR: u8 = 51;
pub const ALERT_INTERNAL_ERROR: u8 = 80;

pub fn alert_name(code: u8) -> &'static str {
    match code {
        ALERT_CLOSE_NOTIFY => "close_notify",
        ALERT_UNEXPECTED_MESSAGE => "unexpected_message",
        ALERT_BAD_RECORD_MAC => "bad_record_mac",
        ALERT_HANDSHAKE_FAILURE => "handshake_failure",
        ALERT_BAD_CERTIFICATE => "bad_certificate",
        ALERT_CERTIFICATE_REVOKED => "certificate_revoked",
        ALERT_CERTIFICATE_UNKNOWN => "certificate_unknown",
        ALERT_DECODE_ERROR => "decode_error",
        ALERT_DECRYPT_ERROR => "decrypt_error",
        ALERT_INTERNAL_ERROR => "internal_error",
        _ => "unknown_alert",
    }
}

/// Handshake failure. Locally detected errors are sent to the peer as the
/// alert given by [`HandshakeError::alert`].
///
/// | error                | alert               |
/// |----------------------|---------------------|
/// | NegotiationMismatch  | handshake_failure   |
/// | HandshakeFailure     | handshake_failure   |
/// | BadIdentity          | bad_certificate     |
/// | RevokedIdentity      | certificate_revoked |
/// | ResolutionFailure    | certificate_unknown |
/// | Decode               | decode_error        |
/// | BadSignature         | decrypt_error       |
/// | FinishedMismatch     | decrypt_error       |
/// | UnexpectedMessage    | unexpected_message  |
/// | BadRecordMac         | bad_record_mac      |
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HandshakeError {
    #[error("negotiation mismatch: {0}")]
    NegotiationMismatch(String),
    #[error("handshake failure: {0}")]
    HandshakeFailure(String),
    #[error("bad identity: {0}")]
    BadIdentity(String),
    #[error("identity revoked: {0}")]
    RevokedIdentity(String),
    #[error("resolution failure: {0}")]
    ResolutionFailure(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("bad signature: {0}")]
    BadSignature(String),
    #[error("Finished verify_data mismatch")]
    FinishedMismatch,
    #[error("unexpected message: {0}")]
    UnexpectedMessage(String),
    #[error("record authentication failed")]
    BadRecordMac,
    #[error("peer sent alert {}", alert_name(*.0))]
    PeerAlert(u8),
    #[error("transport: {0}")]
    Io(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl HandshakeError {
    /// Alert sent to the peer, if any.
    pub fn alert(&self) -> Option<u8> {
        Some(match self {
            HandshakeError::NegotiationMismatch(_) | HandshakeError::HandshakeFailure(_) => {
                ALERT_HANDSHAKE_FAILURE
            }
            HandshakeError::BadIdentity(_) => ALERT_BAD_CERTIFICATE,
            HandshakeError::RevokedIdentity(_) => ALERT_CERTIFICATE_REVOKED,
            HandshakeError::ResolutionFailure(_) => ALERT_CERTIFICATE_UNKNOWN,
            HandshakeError::Decode(_) => ALERT_DECODE_ERROR,
            HandshakeError::BadSignature(_) | HandshakeError::FinishedMismatch => ALERT_DECRYPT_ERROR,
            HandshakeError::UnexpectedMessage(_) => ALERT_UNEXPECTED_MESSAGE,
            HandshakeError::BadRecordMac => ALERT_BAD_RECORD_MAC,
            HandshakeError::Config(_) => ALERT_INTERNAL_ERROR,
            HandshakeError::PeerAlert(_) | HandshakeError::Io(_) => return None,
        })
    }

    /// Stable class name, shared by local errors and the alerts they produce.
    pub fn class(&self) -> &'static str {
        match self {
            HandshakeError::NegotiationMismatch(_) => "negotiation_mismatch",
            HandshakeError::HandshakeFailure(_) => "handshake_failure",
            HandshakeError::BadIdentity(_) => "bad_identity",
            HandshakeError::RevokedIdentity(_) => "revoked_identity",
            HandshakeError::ResolutionFailure(_) => "resolution_failure",
            HandshakeError::Decode(_) => "decode_error",
            HandshakeError::BadSignature(_) => "bad_signature",
            HandshakeError::FinishedMismatch => "finished_mismatch",
            HandshakeError::UnexpectedMessage(_) => "unexpected_message",
            HandshakeError::BadRecordMac => "bad_record_mac",
            HandshakeError::PeerAlert(_) => "peer_alert",
            HandshakeError::Io(_) => "io",
            HandshakeError::Config(_) => "config",
        }
    }

    /// The alert code either sent or received.
    pub fn alert_code(&self) -> Option<u8> {
        match self {
            HandshakeError::PeerAlert(c) => Some(*c),
            other => other.alert(),
        }
    }
}

impl From<std::io::Error> for HandshakeError {
    fn from(e: std::io::Error) -> Self {
        HandshakeError::Io(e.to_string())
    }
}
