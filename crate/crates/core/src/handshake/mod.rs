//! Client and server handshake state machines and the record layer.

mod client;
mod config;
mod conn;
mod error;
mod negotiate;
mod record;
mod server;
mod transport;

use std::io::{Read, Write};

pub use client::run_client;
pub use config::{ClientAuthRequest, EndpointConfig, PreferredMode, SsiIdentity, Tamper, TamperStage};
pub use conn::{PeerIdentity, PhaseTimers};
pub use error::*;
pub use negotiate::{negotiate_server_mode, AuthKind, ClientAuthPlan, Flow, ServerPlan};
pub use record::{RecordLayer, CT_ALERT, CT_APPLICATION_DATA, CT_HANDSHAKE, MAX_FRAGMENT};
pub use server::run_server;
pub use transport::{duplex, PipeEnd};

use crate::crypto::{Role, SessionKeys};
use crate::messages::{transcript_bytes_accounting, ByteAccounting, HandshakeTranscript, SsiParameters};

#[derive(Debug, Clone)]
pub struct HandshakeOutcome {
    pub role: Role,
    pub flow: Flow,
    /// Whether the client authenticated too.
    pub mutual: bool,
    pub session_keys: SessionKeys,
    pub peer: PeerIdentity,
    /// `ssi_parameters` from the ClientHello, if any.
    pub client_params: Option<SsiParameters>,
    pub transcript: HandshakeTranscript,
    pub timers: PhaseTimers,
}

impl HandshakeOutcome {
    pub fn accounting(&self, role: Role) -> ByteAccounting {
        transcript_bytes_accounting(&self.transcript, role)
    }
}

/// An established connection carrying application data.
pub struct Session<T> {
    rl: RecordLayer<T>,
    pub outcome: HandshakeOutcome,
}

impl<T: Read + Write> Session<T> {
    pub(crate) fn new(rl: RecordLayer<T>, outcome: HandshakeOutcome) -> Self {
        Session { rl, outcome }
    }

    /// A write that fails because the peer already aborted reports the
    /// peer's alert when one is waiting to be read.
    pub fn send(&mut self, data: &[u8]) -> Result<(), HandshakeError> {
        match self.rl.send_application_data(data) {
            Err(HandshakeError::Io(e)) => match self.rl.recv_application_data() {
                Err(alert @ HandshakeError::PeerAlert(_)) => Err(alert),
                _ => Err(HandshakeError::Io(e)),
            },
            r => r,
        }
    }

    /// Next payload, or None once the peer closed.
    pub fn recv(&mut self) -> Result<Option<Vec<u8>>, HandshakeError> {
        self.rl.recv_application_data()
    }

    pub fn close(&mut self) {
        self.rl.send_alert(ALERT_CLOSE_NOTIFY);
    }

    pub fn bytes_sent(&self) -> usize {
        self.rl.bytes_sent()
    }

    pub fn into_inner(self) -> T {
        self.rl.into_inner()
    }
}
