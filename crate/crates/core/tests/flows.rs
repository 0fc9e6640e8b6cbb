use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use ssi_tls::crypto::{HashAlg, Role, SignatureSuite};
use ssi_tls::handshake::{
    duplex, run_client, run_server, ClientAuthRequest, EndpointConfig, Flow, HandshakeError,
    HandshakeOutcome, PeerIdentity, PreferredMode,
};
use ssi_tls::messages::AuthnMode;
use ssi_tls::provision::shared_fixture;

type Pair = (Result<HandshakeOutcome, HandshakeError>, Result<HandshakeOutcome, HandshakeError>);

fn connect(client: EndpointConfig, server: EndpointConfig) -> Pair {
    let (a, b) = duplex();
    let srv = thread::spawn(move || {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        run_server(&server, b, &mut rng).map(|mut s| {
            let got = s.recv().unwrap().unwrap();
            s.send(&got).unwrap();
            s.close();
            s.outcome
        })
    });
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let cli = run_client(&client, a, &mut rng).map(|mut s| {
        s.send(b"ping").unwrap();
        assert_eq!(s.recv().unwrap().as_deref(), Some(&b"ping"[..]));
        assert_eq!(s.recv().unwrap(), None);
        s.outcome
    });
    (cli, srv.join().unwrap())
}

fn run(suite: SignatureSuite, mode: PreferredMode, auth: ClientAuthRequest) -> (HandshakeOutcome, HandshakeOutcome) {
    let f = shared_fixture(suite);
    let (c, s) = connect(f.client_config(mode), f.server_config(auth));
    (c.expect("client"), s.expect("server"))
}

#[test]
fn vc_unilateral_ed25519() {
    let (c, s) = run(SignatureSuite::Ed25519, PreferredMode::Vc, ClientAuthRequest::None);
    assert_eq!(c.flow, Flow::SsiVc);
    assert_eq!(s.flow, Flow::SsiVc);
    assert!(!c.mutual);
    let f = shared_fixture(SignatureSuite::Ed25519);
    assert_eq!(c.peer.did(), Some(&f.server().ssi.did));
    assert!(matches!(s.peer, PeerIdentity::Anonymous));
    assert_eq!(c.session_keys, s.session_keys);
}

#[test]
fn every_flow_every_suite() {
    use ClientAuthRequest as A;
    use PreferredMode as M;
    let cases = [
        (M::X509, A::None, Flow::Original, false),
        (M::X509, A::Mirror, Flow::Original, true),
        (M::Vc, A::None, Flow::SsiVc, false),
        (M::Vc, A::Mirror, Flow::SsiVc, true),
        (M::Did, A::None, Flow::SsiDid, false),
        (M::Did, A::Mirror, Flow::SsiDid, true),
        (M::Vc, A::X509, Flow::HybridClientX509, true),
        (M::VcButPeerX509, A::Ssi(AuthnMode::Vc), Flow::HybridServerX509, true),
    ];
    for suite in SignatureSuite::ALL {
        for (mode, auth, flow, mutual) in cases {
            let (c, s) = run(suite, mode, auth);
            assert_eq!((c.flow, s.flow), (flow, flow), "{suite:?} {mode:?} {auth:?}");
            assert_eq!((c.mutual, s.mutual), (mutual, mutual));
            assert_eq!(c.transcript.hash(HashAlg::Sha384), s.transcript.hash(HashAlg::Sha384));
            assert_eq!(c.role, Role::Client);
        }
    }
}
