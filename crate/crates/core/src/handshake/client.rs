use std::io::{Read, Write};
use std::time::Instant;

use rand_core::CryptoRngCore;

use super::conn::{unexpected, Conn};
use super::{AuthKind, EndpointConfig, Flow, HandshakeError, HandshakeOutcome, Session};
use crate::crypto::{ecdhe_exchange, CipherSuite, KeySchedule, Role, X25519KeyPair};
use crate::messages::{
    decode_key_share_server, decode_supported_versions_server, encode_key_share_client,
    encode_signature_algorithms, encode_supported_groups, encode_supported_versions_client,
    AuthnMode, ClientHello, Extensions, HandshakeMessage, SsiParameters, SsiRequest,
    EXT_KEY_SHARE, EXT_SIGNATURE_ALGORITHMS, EXT_SSI_PARAMETERS, EXT_SUPPORTED_GROUPS,
    EXT_SUPPORTED_VERSIONS, GROUP_X25519, LEGACY_VERSION, TLS13_VERSION,
};

const SUITE: CipherSuite = CipherSuite::Aes256GcmSha384;

/// What the server asked the client to present.
enum Requested {
    Certificate,
    Ssi { kind: AuthKind },
}

/// Runs the client side of a handshake over `io`.
pub fn run_client<T: Read + Write>(
    cfg: &EndpointConfig,
    io: T,
    rng: &mut dyn CryptoRngCore,
) -> Result<Session<T>, HandshakeError> {
    if cfg.role != Role::Client {
        return Err(HandshakeError::Config("run_client needs a client config".into()));
    }
    cfg.validate()?;
    let mut c = Conn::new(cfg, io, rng);
    match client_handshake(&mut c) {
        Ok(outcome) => Ok(Session::new(c.rl, outcome)),
        Err(e) => Err(c.abort(e)),
    }
}

/// The three conditions under which a client must refuse an SSIRequest.
fn check_ssi_request(
    cfg: &EndpointConfig,
    sent: Option<&SsiParameters>,
    req: &SsiRequest,
) -> Result<AuthKind, HandshakeError> {
    let mismatch = |m: &str| Err(HandshakeError::NegotiationMismatch(m.to_string()));
    let rp = req.params();
    let Some(sent) = sent else {
        return mismatch("SSIRequest although no ssi_parameters were offered");
    };
    let Some(kind) = AuthKind::from_authn(rp.authn) else {
        return mismatch("SSIRequest without an authentication mode");
    };
    if sent.authn != AuthnMode::Unspecified {
        if rp.authn != sent.authn {
            return mismatch("SSIRequest selects a different authentication mode");
        }
        if rp.did_methods.is_empty() || rp.did_methods.iter().any(|m| !sent.did_methods.contains(m)) {
            return mismatch("SSIRequest DID methods are not a common set");
        }
    }
    let Some(ssi) = &cfg.ssi else {
        return mismatch("client authentication requested but no SSI identity");
    };
    if !cfg.own_did_method().is_some_and(|m| rp.did_methods.contains(&m)) {
        return mismatch("client has no DID on a ledger the server can reach");
    }
    if kind == AuthKind::Vc && ssi.credential.is_none() {
        return mismatch("VC requested but client holds no credential");
    }
    if !req.signature_algorithms().contains(&ssi.keys.suite().scheme()) {
        return mismatch("server does not accept the client's signature algorithm");
    }
    Ok(kind)
}

fn client_handshake<T: Read + Write>(c: &mut Conn<'_, T>) -> Result<HandshakeOutcome, HandshakeError> {
    let cfg = c.cfg;
    let start = Instant::now();
    let kx = X25519KeyPair::generate(c.rng);
    let params = cfg.client_ssi_parameters();
    let offered = cfg.schemes();

    let mut extensions = Extensions::new()
        .with(EXT_SUPPORTED_VERSIONS, encode_supported_versions_client(&[TLS13_VERSION]))
        .with(EXT_SUPPORTED_GROUPS, encode_supported_groups(&[GROUP_X25519]))
        .with(EXT_SIGNATURE_ALGORITHMS, encode_signature_algorithms(&cfg.signature_algorithms))
        .with(EXT_KEY_SHARE, encode_key_share_client(&[(GROUP_X25519, kx.public_key().to_vec())]));
    if let Some(p) = &params {
        extensions.push(EXT_SSI_PARAMETERS, p.encode());
    }
    let mut random = [0u8; 32];
    c.rng.fill_bytes(&mut random);
    let mut session_id = vec![0u8; 32];
    c.rng.fill_bytes(&mut session_id);
    c.send(HandshakeMessage::ClientHello(ClientHello {
        legacy_version: LEGACY_VERSION,
        random,
        legacy_session_id: session_id.clone(),
        cipher_suites: vec![SUITE.code()],
        legacy_compression_methods: vec![0],
        extensions,
    }))?;

    let sh = match c.recv()? {
        HandshakeMessage::ServerHello(sh) => sh,
        other => return Err(unexpected("ServerHello", &other)),
    };
    if sh.cipher_suite != SUITE.code() || sh.legacy_session_id_echo != session_id {
        return Err(HandshakeError::HandshakeFailure("ServerHello parameters not offered".into()));
    }
    let version = sh.extensions.get(EXT_SUPPORTED_VERSIONS).map(decode_supported_versions_server);
    if !matches!(version, Some(Ok(TLS13_VERSION))) {
        return Err(HandshakeError::HandshakeFailure("server did not select TLS 1.3".into()));
    }
    let (group, server_share) = sh
        .extensions
        .get(EXT_KEY_SHARE)
        .ok_or_else(|| HandshakeError::HandshakeFailure("ServerHello without key_share".into()))
        .and_then(|d| decode_key_share_server(d).map_err(|e| HandshakeError::Decode(e.to_string())))?;
    if group != GROUP_X25519 {
        return Err(HandshakeError::HandshakeFailure("server chose an unoffered group".into()));
    }
    let shared = ecdhe_exchange(&kx, &server_share).map_err(|e| HandshakeError::HandshakeFailure(e.to_string()))?;
    let ks = KeySchedule::handshake(SUITE, &shared, &c.th());
    c.rl.set_read_keys(SUITE, ks.server_handshake_secret())?;
    c.rl.set_write_keys(SUITE, ks.client_handshake_secret());

    match c.recv()? {
        HandshakeMessage::EncryptedExtensions(ee) => {
            if ee.extensions.get(EXT_SSI_PARAMETERS).is_some() {
                return Err(HandshakeError::Decode("ssi_parameters in EncryptedExtensions".into()));
            }
        }
        other => return Err(unexpected("EncryptedExtensions", &other)),
    }

    let mut next = c.recv()?;
    let mut requested = None;
    let mut methods_for_server = params.as_ref().map(|p| p.did_methods.clone()).unwrap_or_default();
    match &next {
        HandshakeMessage::CertificateRequest(_) => {
            if cfg.x509.is_none() {
                return Err(HandshakeError::NegotiationMismatch(
                    "certificate requested but client has no X.509 identity".into(),
                ));
            }
            requested = Some(Requested::Certificate);
            next = c.recv()?;
        }
        HandshakeMessage::SsiRequest(req) => {
            let kind = check_ssi_request(cfg, params.as_ref(), req)?;
            if params.as_ref().is_some_and(|p| p.authn == AuthnMode::Unspecified) {
                methods_for_server = req.params().did_methods;
            }
            requested = Some(Requested::Ssi { kind });
            next = c.recv()?;
        }
        _ => {}
    }

    let hybrid_signal = params.as_ref().is_some_and(|p| p.authn == AuthnMode::Unspecified);
    let ssi_requested = matches!(requested, Some(Requested::Ssi { .. }));
    let (flow, peer) = match (&next, params.as_ref().map(|p| p.authn)) {
        (HandshakeMessage::Certificate(cert), authn) => {
            let flow = match authn {
                None => Flow::Original,
                Some(_) if hybrid_signal && ssi_requested => Flow::HybridServerX509,
                Some(_) if ssi_requested => {
                    return Err(HandshakeError::UnexpectedMessage(
                        "X.509 server authentication after an SSIRequest".into(),
                    ))
                }
                Some(_) => Flow::Fallback,
            };
            (flow, c.recv_x509(cert, &offered)?)
        }
        (HandshakeMessage::Vc(m), Some(AuthnMode::Vc)) => {
            let flow = if matches!(requested, Some(Requested::Certificate)) { Flow::HybridClientX509 } else { Flow::SsiVc };
            (flow, c.recv_vc(m, &methods_for_server, &offered)?)
        }
        (HandshakeMessage::Did(m), Some(AuthnMode::Did)) => {
            let flow = if matches!(requested, Some(Requested::Certificate)) { Flow::HybridClientX509 } else { Flow::SsiDid };
            (flow, c.recv_did(m, &methods_for_server, &offered)?)
        }
        (other, _) => return Err(unexpected("server identity", other)),
    };

    c.recv_finished(ks.server_handshake_secret())?;
    let client_hs = ks.client_handshake_secret().to_vec();
    let keys = ks.into_session_keys(&c.th());
    c.rl.set_read_keys(SUITE, &keys.app_secret_server)?;

    match &requested {
        None => {}
        Some(Requested::Certificate) => {
            let id = cfg.x509.as_ref().expect("checked above");
            c.send_x509(id)?;
        }
        Some(Requested::Ssi { kind, .. }) => {
            let ssi = cfg.ssi.as_ref().expect("checked by check_ssi_request");
            c.send_ssi(*kind == AuthKind::Vc, ssi)?;
        }
    }
    c.send_finished(&client_hs)?;
    c.rl.set_write_keys(SUITE, &keys.app_secret_client);
    c.rl.flush()?;
    c.timers.total = start.elapsed();

    Ok(HandshakeOutcome {
        role: Role::Client,
        flow,
        mutual: requested.is_some(),
        session_keys: keys,
        peer,
        client_params: params,
        transcript: std::mem::take(&mut c.transcript),
        timers: c.timers,
    })
}
