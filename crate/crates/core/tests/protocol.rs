mod common;

use std::io::{self, Read, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use ssi_tls::crypto::SignatureSuite;
use ssi_tls::handshake::{
    duplex, run_client, run_server, ClientAuthRequest, EndpointConfig, Flow, HandshakeError, PipeEnd,
    PreferredMode, Tamper, TamperStage,
};
use ssi_tls::identity::{DidDocument, DidMethod, DidMethodId, Resolver};
use ssi_tls::ledger::{LedgerClient, LedgerError, LedgerRecord, LedgerStore, Payload};
use ssi_tls::messages::{
    AuthnMode, HandshakeMessage, SsiParameters, SsiRequest, EXT_SIGNATURE_ALGORITHMS, EXT_SSI_PARAMETERS,
};
use ssi_tls::provision::{pooled_key, Fixture};

#[derive(Debug, Clone, Copy)]
enum ServerCapability {
    NoSsi,
    DidOnOfferedMethod,
    DidOffOfferedMethods,
}

fn matrix_configs(f: &Fixture, mode: PreferredMode, cap: ServerCapability) -> (EndpointConfig, EndpointConfig) {
    let mut client = f.client_config(mode);
    let mut server = f.server_config(ClientAuthRequest::None);
    client.supported_methods = vec![DidMethodId::IOTA];
    match cap {
        ServerCapability::NoSsi => server.ssi = None,
        ServerCapability::DidOnOfferedMethod => {}
        ServerCapability::DidOffOfferedMethods => server.ssi = Some(btcr_server(f)),
    }
    (client, server)
}

#[test]
fn negotiation_matrix() {
    use PreferredMode as M;
    use ServerCapability as S;
    // With the hybrid signal the client offers no methods, so any server
    // holding an SSI identity answers with the server-X.509 hybrid.
    let rows = [
        (M::X509, S::NoSsi, Flow::Original),
        (M::X509, S::DidOnOfferedMethod, Flow::Original),
        (M::X509, S::DidOffOfferedMethods, Flow::Original),
        (M::Vc, S::NoSsi, Flow::Fallback),
        (M::Vc, S::DidOnOfferedMethod, Flow::SsiVc),
        (M::Vc, S::DidOffOfferedMethods, Flow::Fallback),
        (M::Did, S::NoSsi, Flow::Fallback),
        (M::Did, S::DidOnOfferedMethod, Flow::SsiDid),
        (M::Did, S::DidOffOfferedMethods, Flow::Fallback),
        (M::VcButPeerX509, S::NoSsi, Flow::Fallback),
        (M::VcButPeerX509, S::DidOnOfferedMethod, Flow::HybridServerX509),
        (M::VcButPeerX509, S::DidOffOfferedMethods, Flow::HybridServerX509),
    ];
    for suite in SignatureSuite::ALL {
        let f = fixture(suite);
        for (i, (mode, cap, want)) in rows.into_iter().enumerate() {
            let (client, server) = matrix_configs(f, mode, cap);
            let (c, s) = connect(client, server, i as u64);
            let (c, s) = (c.unwrap(), s.unwrap_or_else(|e| panic!("{mode:?}/{cap:?}: {e}")));
            assert_eq!((c.flow, s.flow), (want, want), "{} {mode:?} / {cap:?}", suite.label());
            assert_eq!(c.session_keys, s.session_keys);
        }
    }
}

fn rewrite_ssi_request(edit: impl Fn(&mut SsiParameters, &mut Vec<u16>) + Send + Sync + 'static) -> Tamper {
    Tamper::new(TamperStage::BeforeTranscript, move |msg| {
        if let HandshakeMessage::SsiRequest(r) = msg {
            let mut params = r.params();
            let mut schemes = r.signature_algorithms();
            edit(&mut params, &mut schemes);
            *r = SsiRequest::new(&params, &schemes);
        }
    })
}

fn expect_client_mismatch(client: EndpointConfig, server: EndpointConfig, what: &str) {
    let (c, s) = connect(client, server, 5);
    let c = c.expect_err(what);
    assert_eq!(c.class(), "negotiation_mismatch", "{what}: {c}");
    assert!(matches!(s, Err(HandshakeError::PeerAlert(40))), "{what}: server saw {s:?}");
}

#[test]
fn ssi_request_abort_conditions() {
    let f = fixture(SignatureSuite::Ed25519);
    let mutual = |mode| (f.client_config(mode), f.server_config(ClientAuthRequest::Mirror));

    let (c, mut s) = mutual(PreferredMode::Vc);
    s.tamper = Some(rewrite_ssi_request(|p, _| p.authn = AuthnMode::Did));
    expect_client_mismatch(c, s, "mode switched from VC to DID");

    let (c, s) = (f.client_config(PreferredMode::Did), f.server_config(ClientAuthRequest::Ssi(AuthnMode::Vc)));
    expect_client_mismatch(c, s, "server configured for a different client mode");

    let (c, mut s) = mutual(PreferredMode::Vc);
    s.tamper = Some(rewrite_ssi_request(|p, _| p.did_methods.push(DidMethodId::DLX)));
    expect_client_mismatch(c, s, "method the client never offered");

    let (c, mut s) = mutual(PreferredMode::Did);
    s.tamper = Some(rewrite_ssi_request(|p, _| p.did_methods = vec![DidMethodId::BTCR]));
    expect_client_mismatch(c, s, "client DID not on the requested methods");

    let (c, mut s) = mutual(PreferredMode::Did);
    s.tamper = Some(rewrite_ssi_request(|_, schemes| *schemes = vec![SignatureSuite::RsaPssRsae2048Sha256.scheme()]));
    expect_client_mismatch(c, s, "client's signature scheme not accepted");

    let (c, mut s) = (f.client_config(PreferredMode::X509), f.server_config(ClientAuthRequest::Mirror));
    s.tamper = Some(Tamper::new(TamperStage::BeforeTranscript, |msg| {
        if let HandshakeMessage::CertificateRequest(_) = msg {
            let p = SsiParameters::new(AuthnMode::Vc, vec![DidMethodId::IOTA]);
            *msg = HandshakeMessage::SsiRequest(SsiRequest::new(&p, &[SignatureSuite::Ed25519.scheme()]));
        }
    }));
    expect_client_mismatch(c, s, "SSIRequest without ssi_parameters in the ClientHello");

    let (mut c, s) = mutual(PreferredMode::Vc);
    c.ssi.as_mut().unwrap().credential = None;
    c.preferred_mode = PreferredMode::Did;
    let s2 = f.server_config(ClientAuthRequest::Ssi(AuthnMode::Vc));
    drop(s);
    expect_client_mismatch(c, s2, "VC requested from a client without one");
}

#[test]
fn ssi_request_carries_both_extensions() {
    let f = fixture(SignatureSuite::EcdsaSecp256r1Sha256);
    let (c, _) = connect(f.client_config(PreferredMode::Vc), f.server_config(ClientAuthRequest::Mirror), 9);
    let c = c.unwrap();
    let req = c
        .transcript
        .entries()
        .iter()
        .find_map(|e| match &e.message {
            HandshakeMessage::SsiRequest(r) => Some(r.clone()),
            _ => None,
        })
        .expect("mutual VC flow has an SSIRequest");
    let types: Vec<u16> = req.extensions.types().collect();
    assert_eq!(types.len(), 2);
    assert!(types.contains(&EXT_SSI_PARAMETERS) && types.contains(&EXT_SIGNATURE_ALGORITHMS));
    assert_eq!(req.params(), SsiParameters::new(AuthnMode::Vc, vec![DidMethodId::IOTA, DidMethodId::BTCR]));
}

/// An on-path rewrite of the plaintext mode signal. Handshake keys are bound
/// to the transcript, so the endpoints end up with different keys and the
/// first protected record fails to authenticate.
#[test]
fn client_hello_mode_signal_tamper_is_detected() {
    for suite in SignatureSuite::ALL {
        let f = fixture(suite);
        for (mode, forged) in [(PreferredMode::Vc, AuthnMode::Did), (PreferredMode::Did, AuthnMode::Vc)] {
            let mut client = f.client_config(mode);
            client.tamper = Some(Tamper::new(TamperStage::InFlight, move |msg| {
                if let HandshakeMessage::ClientHello(ch) = msg {
                    let mut p = ch.extensions.ssi_parameters().unwrap().unwrap();
                    p.authn = forged;
                    for e in &mut ch.extensions.0 {
                        if e.typ == EXT_SSI_PARAMETERS {
                            e.data = p.encode();
                        }
                    }
                }
            }));
            let (c, s) = connect(client, f.server_config(ClientAuthRequest::Mirror), 3);
            let c = c.expect_err("client must abort");
            assert_eq!(c.class(), "bad_record_mac", "{} {mode:?}: {c}", suite.label());
            assert!(s.is_err(), "server must not complete");
        }
    }
}

/// Flips one bit in the last byte of the `target`-th write, i.e. inside the
/// AEAD tag of a protected record.
struct Corrupting {
    inner: PipeEnd,
    writes: usize,
    target: usize,
}

impl Read for Corrupting {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        self.inner.read(buf)
    }
}

impl Write for Corrupting {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.writes += 1;
        if self.writes == self.target {
            let mut b = buf.to_vec();
            *b.last_mut().unwrap() ^= 0x01;
            self.inner.write_all(&b)?;
            return Ok(buf.len());
        }
        self.inner.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

#[test]
fn record_bit_flip_is_bad_record_mac() {
    let f = fixture(SignatureSuite::Ed25519);
    let server = f.server_config(ClientAuthRequest::None);
    let client = f.client_config(PreferredMode::Did);
    let (a, b) = duplex();
    let srv = thread::spawn(move || {
        let io = Corrupting { inner: b, writes: 0, target: 1 };
        run_server(&server, io, &mut ChaCha20Rng::seed_from_u64(1)).map(|_| ())
    });
    let c = run_client(&client, a, &mut ChaCha20Rng::seed_from_u64(2)).map(|_| ());
    assert!(matches!(c, Err(HandshakeError::BadRecordMac)), "{c:?}");
    assert!(matches!(srv.join().unwrap(), Err(HandshakeError::PeerAlert(20))));
}

/// A ledger client that, once armed, answers with the document's key
/// replaced and the record left unsigned by that key.
struct SwappingLedger {
    inner: LedgerStore,
    armed: AtomicBool,
    replacement: Vec<u8>,
}

impl LedgerClient for SwappingLedger {
    fn get(&self, id: &str) -> Result<Option<LedgerRecord>, LedgerError> {
        let rec = self.inner.get(id)?;
        if !self.armed.load(Ordering::SeqCst) {
            return Ok(rec);
        }
        Ok(rec.map(|mut r| {
            if let Payload::Document { document } = &r.payload {
                let (suite, _) = document.authentication_key().unwrap();
                r.payload = Payload::Document {
                    document: DidDocument::new(document.id.clone(), suite, &self.replacement),
                };
            }
            r
        }))
    }

    fn put(&self, record: &LedgerRecord) -> Result<(), LedgerError> {
        self.inner.put(record)
    }
}

#[test]
fn mutated_resolved_key_fails_the_possession_proof() {
    for suite in SignatureSuite::ALL {
        let ledger = Arc::new(SwappingLedger {
            inner: LedgerStore::in_memory(DidMethodId::IOTA),
            armed: AtomicBool::new(false),
            replacement: pooled_key(suite, 300).public_key().to_vec(),
        });
        let resolver = Resolver::new().with(DidMethod::new(DidMethodId::IOTA, ledger.clone()));
        let f = Fixture::with_resolver(suite, resolver, 1, &mut seeded(4)).unwrap();
        for mode in [PreferredMode::Vc, PreferredMode::Did] {
            ledger.armed.store(false, Ordering::SeqCst);
            let (c, _) = connect(f.client_config(mode), f.server_config(ClientAuthRequest::None), 1);
            assert!(c.is_ok(), "{} {mode:?} before mutation: {c:?}", suite.label());
            ledger.armed.store(true, Ordering::SeqCst);
            let (c, s) = connect(f.client_config(mode), f.server_config(ClientAuthRequest::None), 2);
            let e = c.expect_err("client accepted a mutated key");
            assert_eq!(e.class(), "bad_signature", "{} {mode:?}: {e}", suite.label());
            assert!(matches!(s, Err(HandshakeError::PeerAlert(51))), "{s:?}");
        }
    }
}

#[test]
fn did_rotation_takes_effect_on_next_handshake() {
    let suite = SignatureSuite::EcdsaSecp256r1Sha256;
    let mut rng = seeded(21);
    let f = Fixture::new(suite, &mut rng).unwrap();
    let server = f.server();
    let method = f.method_for(&server.ssi.did).unwrap();
    let new_keys = pooled_key(suite, 400);
    method.did_update(&server.ssi.did, &server.ssi.keys, &new_keys, &mut rng).unwrap();

    let (c, _) = connect(f.client_config(PreferredMode::Did), f.server_config(ClientAuthRequest::None), 1);
    assert_eq!(c.expect_err("stale key must fail").class(), "bad_signature");

    let mut rotated = f.server_config(ClientAuthRequest::None);
    rotated.ssi.as_mut().unwrap().keys = new_keys.clone();
    let (c, _) = connect(f.client_config(PreferredMode::Did), rotated, 2);
    let c = c.unwrap();
    assert_eq!(c.peer.did(), Some(&server.ssi.did));

    // The stale key can no longer author ledger updates either.
    let stray = pooled_key(suite, 401);
    assert!(method.did_update(&server.ssi.did, &server.ssi.keys, &stray, &mut rng).is_err());
}
