use super::{ClientAuthRequest, EndpointConfig};
use crate::identity::DidMethodId;
use crate::messages::{AuthnMode, SsiParameters};

/// Which message sequence a handshake followed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flow {
    Original,
    SsiVc,
    SsiDid,
    /// Server authenticates with SSI, client with X.509.
    HybridClientX509,
    /// Client signals a VC but asks for the server's X.509 chain.
    HybridServerX509,
    /// Client asked for SSI; the server answered with the original handshake.
    Fallback,
}

impl Flow {
    pub const ALL: [Flow; 6] = [
        Flow::Original,
        Flow::SsiVc,
        Flow::SsiDid,
        Flow::HybridClientX509,
        Flow::HybridServerX509,
        Flow::Fallback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Flow::Original => "original",
            Flow::SsiVc => "ssi-vc",
            Flow::SsiDid => "ssi-did",
            Flow::HybridClientX509 => "hybrid-client-x509",
            Flow::HybridServerX509 => "hybrid-server-x509",
            Flow::Fallback => "fallback",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// How one side proves its identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuthKind {
    X509,
    Vc,
    Did,
}

impl AuthKind {
    pub fn from_authn(m: AuthnMode) -> Option<Self> {
        match m {
            AuthnMode::Vc => Some(AuthKind::Vc),
            AuthnMode::Did => Some(AuthKind::Did),
            AuthnMode::Unspecified => None,
        }
    }
}

/// Server request for client authentication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClientAuthPlan {
    Certificate,
    Ssi(SsiParameters),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerPlan {
    pub flow: Flow,
    pub server_auth: AuthKind,
    pub client_auth: Option<ClientAuthPlan>,
}

fn intersect(a: &[DidMethodId], b: &[DidMethodId]) -> Vec<DidMethodId> {
    a.iter().copied().filter(|m| b.contains(m)).collect()
}

/// Server-side choice of flow. Total: every input yields a plan.
///
/// The server falls back to the original handshake when it has no SSI
/// identity, when its DID is on none of the client's methods, when VC mode is
/// proposed but it holds no credential, or when its identity key suite is not
/// among the client's signature algorithms. The client's mode is never
/// switched between VC and DID.
pub fn negotiate_server_mode(
    params: Option<&SsiParameters>,
    server: &EndpointConfig,
    client_schemes: &[u16],
) -> ServerPlan {
    let x509_client_auth = match server.client_auth {
        ClientAuthRequest::None => None,
        _ => Some(ClientAuthPlan::Certificate),
    };
    let original = |flow| ServerPlan { flow, server_auth: AuthKind::X509, client_auth: x509_client_auth.clone() };
    let Some(p) = params else { return original(Flow::Original) };
    let Some(ssi) = &server.ssi else { return original(Flow::Fallback) };

    if p.authn == AuthnMode::Unspecified {
        let mode = match server.client_auth {
            ClientAuthRequest::Ssi(m) if m != AuthnMode::Unspecified => m,
            _ => AuthnMode::Vc,
        };
        return ServerPlan {
            flow: Flow::HybridServerX509,
            server_auth: AuthKind::X509,
            client_auth: Some(ClientAuthPlan::Ssi(SsiParameters::new(mode, server.supported_methods.clone()))),
        };
    }

    let on_offered_method = ssi.did.method_id().is_some_and(|m| p.did_methods.contains(&m));
    let suite_offered = client_schemes.contains(&ssi.keys.suite().scheme());
    let has_credential = p.authn != AuthnMode::Vc || ssi.credential.is_some();
    if !(on_offered_method && suite_offered && has_credential) {
        return original(Flow::Fallback);
    }
    let (flow, server_auth) = match p.authn {
        AuthnMode::Vc => (Flow::SsiVc, AuthKind::Vc),
        _ => (Flow::SsiDid, AuthKind::Did),
    };
    let common = intersect(&p.did_methods, &server.supported_methods);
    let ssi_request = |mode| Some(ClientAuthPlan::Ssi(SsiParameters::new(mode, common.clone())));
    match server.client_auth {
        ClientAuthRequest::None => ServerPlan { flow, server_auth, client_auth: None },
        ClientAuthRequest::Mirror | ClientAuthRequest::Ssi(AuthnMode::Unspecified) => {
            ServerPlan { flow, server_auth, client_auth: ssi_request(p.authn) }
        }
        ClientAuthRequest::Ssi(m) => ServerPlan { flow, server_auth, client_auth: ssi_request(m) },
        ClientAuthRequest::X509 => ServerPlan {
            flow: Flow::HybridClientX509,
            server_auth,
            client_auth: Some(ClientAuthPlan::Certificate),
        },
    }
}
