//! Process exit codes. Handshake failures map to one code per error class;
//! a received alert maps to 100 plus the alert code.

use ssi_tls::handshake::HandshakeError;

pub const OK: u8 = 0;
pub const FAILURE: u8 = 1;
/// The handshake succeeded but did not take the flow named by `--expect-flow`.
pub const FLOW_MISMATCH: u8 = 3;
pub const PEER_ALERT_BASE: u8 = 100;

pub const CLASSES: [(&str, u8); 12] = [
    ("negotiation_mismatch", 20),
    ("handshake_failure", 21),
    ("bad_identity", 22),
    ("revoked_identity", 23),
    ("resolution_failure", 24),
    ("decode_error", 25),
    ("bad_signature", 26),
    ("finished_mismatch", 27),
    ("unexpected_message", 28),
    ("bad_record_mac", 29),
    ("io", 30),
    ("config", 31),
];

pub fn for_error(e: &HandshakeError) -> u8 {
    if let HandshakeError::PeerAlert(code) = e {
        return PEER_ALERT_BASE.saturating_add(*code);
    }
    CLASSES.iter().find(|(c, _)| *c == e.class()).map_or(FAILURE, |(_, n)| *n)
}
