use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, Utc};

use super::HandshakeError;
use crate::crypto::{KeyPair, Role, SignatureSuite};
use crate::identity::{Did, DidMethodId, Resolver, TrustStore, VerifiableCredential};
use crate::messages::{AuthnMode, HandshakeMessage, SsiParameters};
use crate::pki::X509Identity;

/// How a client asks the server to authenticate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreferredMode {
    /// No `ssi_parameters`: the original handshake.
    X509,
    Did,
    Vc,
    /// Empty method list with an unspecified mode: the client holds a VC but
    /// wants the server to present X.509.
    VcButPeerX509,
}

impl PreferredMode {
    pub const ALL: [PreferredMode; 4] =
        [PreferredMode::X509, PreferredMode::Vc, PreferredMode::Did, PreferredMode::VcButPeerX509];

    pub fn name(self) -> &'static str {
        match self {
            PreferredMode::X509 => "x509",
            PreferredMode::Did => "did",
            PreferredMode::Vc => "vc",
            PreferredMode::VcButPeerX509 => "vc-peer-x509",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// What a server asks of the client.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClientAuthRequest {
    None,
    /// Same mechanism the server authenticates with: CertificateRequest in
    /// X.509 flows, SSIRequest in SSI flows (VC when the client sent the
    /// hybrid signal).
    Mirror,
    /// CertificateRequest even in SSI flows (client X.509, server SSI).
    X509,
    /// SSIRequest with this mode.
    Ssi(AuthnMode),
}

impl ClientAuthRequest {
    pub fn name(self) -> &'static str {
        match self {
            ClientAuthRequest::None => "none",
            ClientAuthRequest::Mirror => "mirror",
            ClientAuthRequest::X509 => "x509",
            ClientAuthRequest::Ssi(AuthnMode::Vc) => "vc",
            ClientAuthRequest::Ssi(AuthnMode::Did) => "did",
            ClientAuthRequest::Ssi(AuthnMode::Unspecified) => "ssi-unspecified",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "none" => ClientAuthRequest::None,
            "mirror" => ClientAuthRequest::Mirror,
            "x509" => ClientAuthRequest::X509,
            "vc" => ClientAuthRequest::Ssi(AuthnMode::Vc),
            "did" => ClientAuthRequest::Ssi(AuthnMode::Did),
            _ => return None,
        })
    }
}

/// DID, its controlling key, and optionally a credential about it.
#[derive(Debug, Clone)]
pub struct SsiIdentity {
    pub did: Did,
    pub keys: KeyPair,
    pub credential: Option<VerifiableCredential>,
}

/// Where a [`Tamper`] hook runs relative to the sender's transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TamperStage {
    /// The sender itself produces the altered message.
    BeforeTranscript,
    /// The sender's transcript keeps the original; the wire carries the
    /// altered copy, as an on-path attacker would produce for plaintext
    /// messages.
    InFlight,
}

/// Fault-injection hook applied to outgoing handshake messages.
#[derive(Clone)]
pub struct Tamper {
    pub stage: TamperStage,
    pub apply: Arc<dyn Fn(&mut HandshakeMessage) + Send + Sync>,
}

impl Tamper {
    pub fn new(stage: TamperStage, f: impl Fn(&mut HandshakeMessage) + Send + Sync + 'static) -> Self {
        Tamper { stage, apply: Arc::new(f) }
    }
}

impl fmt::Debug for Tamper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tamper").field("stage", &self.stage).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub role: Role,
    pub x509: Option<X509Identity>,
    pub ssi: Option<SsiIdentity>,
    pub supported_methods: Vec<DidMethodId>,
    /// Client only.
    pub preferred_mode: PreferredMode,
    /// Server only.
    pub client_auth: ClientAuthRequest,
    pub trust: Arc<TrustStore>,
    pub x509_roots: Vec<Vec<u8>>,
    pub resolver: Resolver,
    pub signature_algorithms: Vec<SignatureSuite>,
    /// Fixed time for validity checks; the system clock when unset.
    pub clock: Option<DateTime<Utc>>,
    pub tamper: Option<Tamper>,
}

impl EndpointConfig {
    pub fn new(role: Role) -> Self {
        EndpointConfig {
            role,
            x509: None,
            ssi: None,
            supported_methods: Vec::new(),
            preferred_mode: PreferredMode::X509,
            client_auth: ClientAuthRequest::None,
            trust: Arc::new(TrustStore::new()),
            x509_roots: Vec::new(),
            resolver: Resolver::new(),
            signature_algorithms: SignatureSuite::ALL.to_vec(),
            clock: None,
            tamper: None,
        }
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.unwrap_or_else(Utc::now)
    }

    pub fn schemes(&self) -> Vec<u16> {
        self.signature_algorithms.iter().map(|s| s.scheme()).collect()
    }

    pub fn own_did_method(&self) -> Option<DidMethodId> {
        self.ssi.as_ref().and_then(|s| s.did.method_id())
    }

    /// The `ssi_parameters` a client sends for its preferred mode.
    pub fn client_ssi_parameters(&self) -> Option<SsiParameters> {
        match self.preferred_mode {
            PreferredMode::X509 => None,
            PreferredMode::Did => Some(SsiParameters::new(AuthnMode::Did, self.supported_methods.clone())),
            PreferredMode::Vc => Some(SsiParameters::new(AuthnMode::Vc, self.supported_methods.clone())),
            PreferredMode::VcButPeerX509 => Some(SsiParameters::hybrid_x509_request()),
        }
    }

    pub fn validate(&self) -> Result<(), HandshakeError> {
        let err = |m: &str| Err(HandshakeError::Config(m.to_string()));
        if self.signature_algorithms.is_empty() {
            return err("signature_algorithms is empty");
        }
        if let Some(ssi) = &self.ssi {
            match ssi.did.method_id() {
                Some(m) if self.supported_methods.contains(&m) => {}
                _ => return err("own DID must use one of the supported DID methods"),
            }
            if let Some(vc) = &ssi.credential {
                if vc.subject() != &ssi.did {
                    return err("credential subject must be the endpoint's DID");
                }
            }
        }
        if self.supported_methods.len() > 255 {
            return err("too many DID methods");
        }
        if self.role == Role::Client {
            let has_vc = self.ssi.as_ref().is_some_and(|s| s.credential.is_some());
            match self.preferred_mode {
                PreferredMode::Did if self.ssi.is_none() => return err("DID mode needs an SSI identity"),
                PreferredMode::Vc | PreferredMode::VcButPeerX509 if !has_vc => {
                    return err("VC modes need an SSI identity with a credential")
                }
                PreferredMode::Did | PreferredMode::Vc if self.supported_methods.is_empty() => {
                    return err("SSI modes need at least one supported DID method")
                }
                _ => {}
            }
        }
        Ok(())
    }
}
