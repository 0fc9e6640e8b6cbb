#![allow(dead_code)]

use std::sync::{Arc, Mutex, OnceLock};
use std::collections::HashMap;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use ssi_tls::crypto::SignatureSuite;
use ssi_tls::handshake::{
    duplex, run_client, run_server, ClientAuthRequest, EndpointConfig, Flow, HandshakeError,
    HandshakeOutcome, PreferredMode, SsiIdentity, Tamper, TamperStage,
};
use ssi_tls::identity::{vc_deserialize, vc_serialize, DidMethodId};
use ssi_tls::messages::{AuthnMode, HandshakeMessage};
use ssi_tls::provision::{shared_fixture, Fixture};

pub type Side = Result<HandshakeOutcome, HandshakeError>;

/// Runs a handshake over an in-memory pipe, then echoes one payload.
pub fn connect(client: EndpointConfig, server: EndpointConfig, seed: u64) -> (Side, Side) {
    let (a, b) = duplex();
    let srv = thread::spawn(move || {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5e5e);
        run_server(&server, b, &mut rng).and_then(|mut s| {
            if let Some(got) = s.recv()? {
                s.send(&got)?;
            }
            s.close();
            Ok(s.outcome)
        })
    });
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let cli = run_client(&client, a, &mut rng).and_then(|mut s| {
        let payload = format!("echo {seed}");
        s.send(payload.as_bytes())?;
        match s.recv()? {
            Some(back) if back == payload.as_bytes() => {}
            other => return Err(HandshakeError::Io(format!("echo mismatch: {other:?}"))),
        }
        Ok(s.outcome)
    });
    (cli, srv.join().expect("server thread"))
}

/// The conformance flows. Fallback has two causes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    OriginalUni,
    OriginalMutual,
    VcUni,
    VcMutual,
    DidUni,
    DidMutual,
    /// Client X.509, server VC.
    HybridClientX509,
    /// Client VC, server X.509.
    HybridServerX509,
    /// Server holds no SSI identity.
    FallbackNoSsi,
    /// Server's DID is on a method the client did not offer.
    FallbackMethod,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::OriginalUni,
        Scenario::OriginalMutual,
        Scenario::VcUni,
        Scenario::VcMutual,
        Scenario::DidUni,
        Scenario::DidMutual,
        Scenario::HybridClientX509,
        Scenario::HybridServerX509,
        Scenario::FallbackNoSsi,
        Scenario::FallbackMethod,
    ];

    pub fn flow(self) -> Flow {
        match self {
            Scenario::OriginalUni | Scenario::OriginalMutual => Flow::Original,
            Scenario::VcUni | Scenario::VcMutual => Flow::SsiVc,
            Scenario::DidUni | Scenario::DidMutual => Flow::SsiDid,
            Scenario::HybridClientX509 => Flow::HybridClientX509,
            Scenario::HybridServerX509 => Flow::HybridServerX509,
            Scenario::FallbackNoSsi | Scenario::FallbackMethod => Flow::Fallback,
        }
    }

    pub fn mutual(self) -> bool {
        matches!(
            self,
            Scenario::OriginalMutual
                | Scenario::VcMutual
                | Scenario::DidMutual
                | Scenario::HybridClientX509
                | Scenario::HybridServerX509
        )
    }

    /// Identity kinds sent by (client, server). None = no client auth.
    pub fn kinds(self) -> (Option<Kind>, Kind) {
        use Kind::*;
        match self {
            Scenario::OriginalUni | Scenario::FallbackNoSsi | Scenario::FallbackMethod => (None, X509),
            Scenario::OriginalMutual => (Some(X509), X509),
            Scenario::VcUni => (None, Vc),
            Scenario::VcMutual => (Some(Vc), Vc),
            Scenario::DidUni => (None, Did),
            Scenario::DidMutual => (Some(Did), Did),
            Scenario::HybridClientX509 => (Some(X509), Vc),
            Scenario::HybridServerX509 => (Some(Vc), X509),
        }
    }

    pub fn configs(self, f: &Fixture) -> (EndpointConfig, EndpointConfig) {
        use ClientAuthRequest as A;
        use PreferredMode as M;
        let (mode, auth) = match self {
            Scenario::OriginalUni => (M::X509, A::None),
            Scenario::OriginalMutual => (M::X509, A::Mirror),
            Scenario::VcUni => (M::Vc, A::None),
            Scenario::VcMutual => (M::Vc, A::Mirror),
            Scenario::DidUni => (M::Did, A::None),
            Scenario::DidMutual => (M::Did, A::Mirror),
            Scenario::HybridClientX509 => (M::Vc, A::X509),
            Scenario::HybridServerX509 => (M::VcButPeerX509, A::Ssi(AuthnMode::Vc)),
            Scenario::FallbackNoSsi | Scenario::FallbackMethod => (M::Vc, A::None),
        };
        let mut client = f.client_config(mode);
        let mut server = f.server_config(auth);
        match self {
            Scenario::FallbackNoSsi => server.ssi = None,
            Scenario::FallbackMethod => {
                client.supported_methods = vec![DidMethodId::IOTA];
                server.ssi = Some(btcr_server(f));
            }
            _ => {}
        }
        (client, server)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    X509,
    Vc,
    Did,
}

/// The fixture server's key anchored on `btcr`, cached per suite.
pub fn btcr_server(f: &Fixture) -> SsiIdentity {
    static CACHE: OnceLock<Mutex<HashMap<SignatureSuite, SsiIdentity>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(f.suite)
        .or_insert_with(|| {
            let mut rng = ChaCha20Rng::seed_from_u64(99);
            f.identity_on(f.server(), DidMethodId::BTCR, &mut rng).expect("anchor on btcr")
        })
        .clone()
}

pub fn fixture(suite: SignatureSuite) -> &'static Fixture {
    shared_fixture(suite)
}

/// One way of corrupting an authenticated handshake.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    VcProof,
    DidVerifySig,
    CertVerifySig,
    FinishedMac,
    /// A CertificateVerify or DIDVerify captured from another session.
    Splice,
}

impl Mutation {
    pub const ALL: [Mutation; 5] =
        [Mutation::VcProof, Mutation::DidVerifySig, Mutation::CertVerifySig, Mutation::FinishedMac, Mutation::Splice];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::VcProof => "VC proof",
            Mutation::DidVerifySig => "DIDVerify signature",
            Mutation::CertVerifySig => "CertificateVerify signature",
            Mutation::FinishedMac => "Finished MAC",
            Mutation::Splice => "transcript splice/replay",
        }
    }

    /// Error class the verifying endpoint must report.
    pub fn expected_class(self) -> &'static str {
        match self {
            Mutation::VcProof => "bad_identity",
            Mutation::DidVerifySig | Mutation::CertVerifySig | Mutation::Splice => "bad_signature",
            Mutation::FinishedMac => "finished_mismatch",
        }
    }

    /// Whether an endpoint sending `kind` can be the target.
    pub fn applies_to(self, kind: Kind) -> bool {
        match self {
            Mutation::VcProof => kind == Kind::Vc,
            Mutation::DidVerifySig => kind != Kind::X509,
            Mutation::CertVerifySig => kind == Kind::X509,
            Mutation::FinishedMac | Mutation::Splice => true,
        }
    }
}

fn flip(bytes: &mut [u8], pos: usize, bit: u8) {
    if !bytes.is_empty() {
        let i = pos % bytes.len();
        bytes[i] ^= 1 << (bit % 8);
    }
}

/// Builds a hook that corrupts the targeted message. `captured` is the
/// replacement for a splice.
pub fn mutation_hook(m: Mutation, rng: &mut impl Rng, captured: Option<HandshakeMessage>) -> Tamper {
    let pos: usize = rng.gen();
    let bit: u8 = rng.gen();
    Tamper::new(TamperStage::BeforeTranscript, move |msg| {
        if m == Mutation::Splice {
            if let Some(c) = captured.as_ref().filter(|c| c.typ() == msg.typ()) {
                *msg = c.clone();
            }
            return;
        }
        match (m, msg) {
        (Mutation::VcProof, HandshakeMessage::Vc(v)) => {
            let mut vc = vc_deserialize(&v.vc).expect("own credential parses");
            flip(&mut vc.proof.proof_value, pos, bit);
            v.vc = vc_serialize(&vc);
        }
        (Mutation::DidVerifySig, HandshakeMessage::DidVerify(s))
        | (Mutation::CertVerifySig, HandshakeMessage::CertificateVerify(s)) => flip(&mut s.signature, pos, bit),
        (Mutation::FinishedMac, HandshakeMessage::Finished(f)) => flip(&mut f.verify_data, pos, bit),
        _ => {}
        }
    })
}

pub fn seeded(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn shared<T>(t: T) -> Arc<T> {
    Arc::new(t)
}
