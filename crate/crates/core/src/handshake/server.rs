use std::io::{Read, Write};
use std::time::Instant;

use rand_core::CryptoRngCore;

use super::conn::{unexpected, Conn, PeerIdentity};
use super::{
    negotiate_server_mode, AuthKind, ClientAuthPlan, EndpointConfig, HandshakeError,
    HandshakeOutcome, Session,
};
use crate::crypto::{ecdhe_exchange, CipherSuite, KeySchedule, Role, X25519KeyPair};
use crate::messages::{
    decode_key_share_client, decode_supported_versions_client, encode_key_share_server,
    encode_signature_algorithms, CertificateRequest, EncryptedExtensions, Extensions,
    HandshakeMessage, ServerHello, SsiRequest, EXT_KEY_SHARE, EXT_SIGNATURE_ALGORITHMS,
    EXT_SUPPORTED_VERSIONS, GROUP_X25519, LEGACY_VERSION, TLS13_VERSION,
};

const SUITE: CipherSuite = CipherSuite::Aes256GcmSha384;

/// Runs the server side of a handshake over `io`.
pub fn run_server<T: Read + Write>(
    cfg: &EndpointConfig,
    io: T,
    rng: &mut dyn CryptoRngCore,
) -> Result<Session<T>, HandshakeError> {
    if cfg.role != Role::Server {
        return Err(HandshakeError::Config("run_server needs a server config".into()));
    }
    cfg.validate()?;
    let mut c = Conn::new(cfg, io, rng);
    match server_handshake(&mut c) {
        Ok(outcome) => Ok(Session::new(c.rl, outcome)),
        Err(e) => Err(c.abort(e)),
    }
}

fn failure(m: &str) -> HandshakeError {
    HandshakeError::HandshakeFailure(m.to_string())
}

fn server_handshake<T: Read + Write>(c: &mut Conn<'_, T>) -> Result<HandshakeOutcome, HandshakeError> {
    let cfg = c.cfg;
    let ch = match c.recv()? {
        HandshakeMessage::ClientHello(ch) => ch,
        other => return Err(unexpected("ClientHello", &other)),
    };
    let start = Instant::now();
    let decode = |e: crate::messages::DecodeError| HandshakeError::Decode(e.to_string());

    let versions = ch
        .extensions
        .get(EXT_SUPPORTED_VERSIONS)
        .map(decode_supported_versions_client)
        .transpose()
        .map_err(decode)?
        .unwrap_or_default();
    if !versions.contains(&TLS13_VERSION) {
        return Err(failure("client does not offer TLS 1.3"));
    }
    if !ch.cipher_suites.contains(&SUITE.code()) {
        return Err(failure("no common cipher suite"));
    }
    let client_schemes = ch
        .extensions
        .signature_algorithms()
        .map_err(decode)?
        .ok_or_else(|| failure("missing signature_algorithms"))?;
    let shares = ch
        .extensions
        .get(EXT_KEY_SHARE)
        .map(decode_key_share_client)
        .transpose()
        .map_err(decode)?
        .unwrap_or_default();
    let client_share = shares
        .iter()
        .find(|(g, _)| *g == GROUP_X25519)
        .map(|(_, k)| k.clone())
        .ok_or_else(|| failure("no x25519 key share"))?;
    let params = ch.extensions.ssi_parameters().map_err(decode)?;

    let plan = negotiate_server_mode(params.as_ref(), cfg, &client_schemes);
    if plan.server_auth == AuthKind::X509 {
        let id = cfg.x509.as_ref().ok_or_else(|| failure("no X.509 identity to fall back to"))?;
        if !client_schemes.contains(&id.keys.suite().scheme()) {
            return Err(failure("certificate key suite not offered by client"));
        }
    }

    let kx = X25519KeyPair::generate(c.rng);
    let shared = ecdhe_exchange(&kx, &client_share).map_err(|e| failure(&e.to_string()))?;
    let mut random = [0u8; 32];
    c.rng.fill_bytes(&mut random);
    c.send(HandshakeMessage::ServerHello(ServerHello {
        legacy_version: LEGACY_VERSION,
        random,
        legacy_session_id_echo: ch.legacy_session_id.clone(),
        cipher_suite: SUITE.code(),
        legacy_compression_method: 0,
        extensions: Extensions::new()
            .with(EXT_SUPPORTED_VERSIONS, TLS13_VERSION.to_be_bytes().to_vec())
            .with(EXT_KEY_SHARE, encode_key_share_server(GROUP_X25519, &kx.public_key())),
    }))?;
    let ks = KeySchedule::handshake(SUITE, &shared, &c.th());
    c.rl.set_write_keys(SUITE, ks.server_handshake_secret());
    c.rl.set_read_keys(SUITE, ks.client_handshake_secret())?;

    c.send(HandshakeMessage::EncryptedExtensions(EncryptedExtensions { extensions: Extensions::new() }))?;
    let own_schemes = cfg.schemes();
    match &plan.client_auth {
        None => {}
        Some(ClientAuthPlan::Certificate) => {
            c.send(HandshakeMessage::CertificateRequest(CertificateRequest {
                context: Vec::new(),
                extensions: Extensions::new()
                    .with(EXT_SIGNATURE_ALGORITHMS, encode_signature_algorithms(&cfg.signature_algorithms)),
            }))?;
        }
        Some(ClientAuthPlan::Ssi(p)) => {
            c.send(HandshakeMessage::SsiRequest(SsiRequest::new(p, &own_schemes)))?;
        }
    }
    match plan.server_auth {
        AuthKind::X509 => c.send_x509(cfg.x509.as_ref().expect("checked above"))?,
        kind => c.send_ssi(kind == AuthKind::Vc, cfg.ssi.as_ref().expect("plan requires SSI identity"))?,
    }
    c.send_finished(ks.server_handshake_secret())?;
    let client_hs = ks.client_handshake_secret().to_vec();
    let keys = ks.into_session_keys(&c.th());
    c.rl.set_write_keys(SUITE, &keys.app_secret_server);

    let peer = match &plan.client_auth {
        None => PeerIdentity::Anonymous,
        Some(ClientAuthPlan::Certificate) => match c.recv()? {
            HandshakeMessage::Certificate(cert) => c.recv_x509(&cert, &own_schemes)?,
            other => return Err(unexpected("Certificate", &other)),
        },
        Some(ClientAuthPlan::Ssi(p)) => match (c.recv()?, p.authn) {
            (HandshakeMessage::Vc(m), crate::messages::AuthnMode::Vc) => {
                c.recv_vc(&m, &p.did_methods, &own_schemes)?
            }
            (HandshakeMessage::Did(m), crate::messages::AuthnMode::Did) => {
                c.recv_did(&m, &p.did_methods, &own_schemes)?
            }
            (other, _) => return Err(unexpected("client identity", &other)),
        },
    };
    c.recv_finished(&client_hs)?;
    c.rl.set_read_keys(SUITE, &keys.app_secret_client)?;
    c.timers.total = start.elapsed();

    Ok(HandshakeOutcome {
        role: Role::Server,
        flow: plan.flow,
        mutual: plan.client_auth.is_some(),
        session_keys: keys,
        peer,
        client_params: params,
        transcript: std::mem::take(&mut c.transcript),
        timers: c.timers,
    })
}
