use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::ops::AddAssign;
use std::time::{Duration, Instant};

use rand_core::CryptoRngCore;

use super::record::RecordLayer;
use super::{EndpointConfig, HandshakeError, SsiIdentity, TamperStage};
use crate::crypto::{
    build_signed_content, finished_mac, verify, HashAlg, Role, SignatureSuite, TranscriptHash,
    Verdict, VerifyPurpose,
};
use crate::identity::{vc_deserialize, vc_serialize, vc_verify, Did, DidMethodId, Resolution};
use crate::messages::{
    Certificate, DidMessage, Finished, HandshakeMessage, HandshakeTranscript, SignatureBody,
    VcMessage,
};
use crate::pki::{verify_chain, X509Identity};

/// Time spent in each identity-processing phase on one endpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimers {
    /// DID resolution, including ledger channel setup.
    pub resolve: Duration,
    /// VC parsing and verification, excluding resolution.
    pub vc_verify: Duration,
    /// Certificate chain validation, excluding CertificateVerify.
    pub chain_verify: Duration,
    /// CertificateVerify / DIDVerify signing.
    pub sign: Duration,
    /// Whole handshake. On a server: from ClientHello received to client
    /// Finished verified.
    pub total: Duration,
}

impl AddAssign for PhaseTimers {
    fn add_assign(&mut self, o: Self) {
        self.resolve += o.resolve;
        self.vc_verify += o.vc_verify;
        self.chain_verify += o.chain_verify;
        self.sign += o.sign;
        self.total += o.total;
    }
}

/// The authenticated peer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PeerIdentity {
    Anonymous,
    X509 { subject: String, suite: SignatureSuite, public_key: Vec<u8> },
    Did {
        did: Did,
        suite: SignatureSuite,
        public_key: Vec<u8>,
        /// Claims from the presented credential; empty in DID mode.
        claims: BTreeMap<String, String>,
        via_credential: bool,
    },
}

impl PeerIdentity {
    pub fn did(&self) -> Option<&Did> {
        match self {
            PeerIdentity::Did { did, .. } => Some(did),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PeerIdentity::Anonymous => "anonymous".into(),
            PeerIdentity::X509 { subject, suite, .. } => format!("x509 subject={subject} suite={suite}"),
            PeerIdentity::Did { did, suite, via_credential, claims, .. } => {
                let how = if *via_credential { "vc" } else { "did" };
                format!("{how} {did} suite={suite} claims={claims:?}")
            }
        }
    }
}

pub(crate) fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

/// State shared by the client and server machines.
pub(crate) struct Conn<'a, T> {
    pub cfg: &'a EndpointConfig,
    pub rng: &'a mut dyn CryptoRngCore,
    pub rl: RecordLayer<T>,
    pub transcript: HandshakeTranscript,
    pub hash: HashAlg,
    pub timers: PhaseTimers,
    pub role: Role,
}

impl<'a, T: Read + Write> Conn<'a, T> {
    pub fn new(cfg: &'a EndpointConfig, io: T, rng: &'a mut dyn CryptoRngCore) -> Self {
        Conn {
            cfg,
            rng,
            rl: RecordLayer::new(io),
            transcript: HandshakeTranscript::new(),
            hash: HashAlg::Sha384,
            timers: PhaseTimers::default(),
            role: cfg.role,
        }
    }

    pub fn th(&self) -> TranscriptHash {
        self.transcript.hash(self.hash)
    }

    pub fn send(&mut self, mut msg: HandshakeMessage) -> Result<(), HandshakeError> {
        let tamper = self.cfg.tamper.clone();
        if let Some(t) = tamper.as_ref().filter(|t| t.stage == TamperStage::BeforeTranscript) {
            (t.apply)(&mut msg);
        }
        let bytes = msg.encode();
        let wire = match tamper.as_ref().filter(|t| t.stage == TamperStage::InFlight) {
            Some(t) => {
                let mut altered = msg.clone();
                (t.apply)(&mut altered);
                altered.encode()
            }
            None => bytes.clone(),
        };
        self.transcript.push(self.role, msg, bytes);
        self.rl.write_handshake(&wire)
    }

    pub fn recv(&mut self) -> Result<HandshakeMessage, HandshakeError> {
        let bytes = self.rl.read_handshake()?;
        let msg = HandshakeMessage::decode(&bytes).map_err(|e| HandshakeError::Decode(e.to_string()))?;
        self.transcript.push(self.role.peer(), msg.clone(), bytes);
        Ok(msg)
    }

    /// Sends the alert for `e` (if it has one) and hands the error back.
    pub fn abort(&mut self, e: HandshakeError) -> HandshakeError {
        if let Some(a) = e.alert() {
            self.rl.send_alert(a);
        }
        e
    }

    fn sign_verify_body(&mut self, keys: &crate::crypto::KeyPair, purpose: VerifyPurpose) -> SignatureBody {
        let content = build_signed_content(self.role, purpose, &self.th());
        let t = Instant::now();
        let signature = keys.sign(&content, self.rng);
        self.timers.sign += t.elapsed();
        SignatureBody { scheme: keys.suite().scheme(), signature }
    }

    pub fn send_x509(&mut self, id: &X509Identity) -> Result<(), HandshakeError> {
        self.send(HandshakeMessage::Certificate(Certificate::from_chain(&id.chain)))?;
        let body = self.sign_verify_body(&id.keys, VerifyPurpose::CertificateVerify);
        self.send(HandshakeMessage::CertificateVerify(body))
    }

    pub fn send_ssi(&mut self, vc_mode: bool, ssi: &SsiIdentity) -> Result<(), HandshakeError> {
        if vc_mode {
            let vc = ssi
                .credential
                .as_ref()
                .ok_or_else(|| HandshakeError::Config("VC mode without a credential".into()))?;
            self.send(HandshakeMessage::Vc(VcMessage { vc: vc_serialize(vc) }))?;
        } else {
            let method = ssi
                .did
                .method_id()
                .ok_or_else(|| HandshakeError::Config("own DID method has no code".into()))?;
            self.send(HandshakeMessage::Did(DidMessage { method, did: ssi.did.to_string().into_bytes() }))?;
        }
        let body = self.sign_verify_body(&ssi.keys, VerifyPurpose::DidVerify);
        self.send(HandshakeMessage::DidVerify(body))
    }

    fn check_signature(
        &self,
        purpose: VerifyPurpose,
        body: &SignatureBody,
        suite: SignatureSuite,
        public_key: &[u8],
        th: &TranscriptHash,
        accepted_schemes: &[u16],
    ) -> Result<(), HandshakeError> {
        if body.scheme != suite.scheme() || !accepted_schemes.contains(&body.scheme) {
            return Err(HandshakeError::BadSignature(format!(
                "scheme 0x{:04x} does not match the {suite} key or was not offered",
                body.scheme
            )));
        }
        let content = build_signed_content(self.role.peer(), purpose, th);
        match verify(suite, public_key, &content, &body.signature) {
            Ok(Verdict::Accepted) => Ok(()),
            _ => Err(HandshakeError::BadSignature(format!("{purpose:?} signature rejected"))),
        }
    }

    /// Certificate already received; validates the chain, then receives and
    /// checks CertificateVerify.
    pub fn recv_x509(&mut self, cert: &Certificate, accepted: &[u16]) -> Result<PeerIdentity, HandshakeError> {
        let t = Instant::now();
        let leaf = verify_chain(&cert.chain(), &self.cfg.x509_roots, self.cfg.now());
        self.timers.chain_verify += t.elapsed();
        let leaf = leaf.map_err(|e| HandshakeError::BadIdentity(e.to_string()))?;
        let th = self.th();
        match self.recv()? {
            HandshakeMessage::CertificateVerify(body) => {
                self.check_signature(VerifyPurpose::CertificateVerify, &body, leaf.suite, &leaf.public_key, &th, accepted)?;
            }
            other => return Err(unexpected("CertificateVerify", &other)),
        }
        Ok(PeerIdentity::X509 { subject: leaf.subject, suite: leaf.suite, public_key: leaf.public_key })
    }

    fn resolve(&mut self, did: &Did) -> Result<(SignatureSuite, Vec<u8>), HandshakeError> {
        let t = Instant::now();
        let r = self.cfg.resolver.resolve(did);
        self.timers.resolve += t.elapsed();
        match r {
            Ok(Resolution::Document(doc)) => {
                doc.validate_for(did).map_err(|e| HandshakeError::BadIdentity(e.to_string()))
            }
            Ok(Resolution::Revoked) => Err(HandshakeError::RevokedIdentity(did.to_string())),
            Err(e) => Err(HandshakeError::ResolutionFailure(e.to_string())),
        }
    }

    fn recv_did_verify(
        &mut self,
        suite: SignatureSuite,
        public_key: &[u8],
        accepted: &[u16],
    ) -> Result<(), HandshakeError> {
        let th = self.th();
        match self.recv()? {
            HandshakeMessage::DidVerify(body) => {
                self.check_signature(VerifyPurpose::DidVerify, &body, suite, public_key, &th, accepted)
            }
            other => Err(unexpected("DIDVerify", &other)),
        }
    }

    /// VC already received: verifies it, resolves the subject, then receives
    /// and checks DIDVerify.
    pub fn recv_vc(
        &mut self,
        m: &VcMessage,
        methods: &[DidMethodId],
        accepted: &[u16],
    ) -> Result<PeerIdentity, HandshakeError> {
        let t = Instant::now();
        let checked = vc_deserialize(&m.vc)
            .map_err(|e| HandshakeError::BadIdentity(format!("credential: {e}")))
            .and_then(|vc| {
                vc_verify(&vc, &self.cfg.trust, self.cfg.now())
                    .map(|subject| (subject, vc.credential_subject.claims))
                    .map_err(|r| HandshakeError::BadIdentity(format!("credential rejected ({}): {r}", r.code())))
            });
        self.timers.vc_verify += t.elapsed();
        let (did, claims) = checked?;
        if !did.method_id().is_some_and(|id| methods.contains(&id)) {
            return Err(HandshakeError::NegotiationMismatch(format!(
                "credential subject {did} is not on an offered DID method"
            )));
        }
        let (suite, public_key) = self.resolve(&did)?;
        self.recv_did_verify(suite, &public_key, accepted)?;
        Ok(PeerIdentity::Did { did, suite, public_key, claims, via_credential: true })
    }

    /// DID message already received: checks method and trust, resolves, then
    /// receives and checks DIDVerify.
    pub fn recv_did(
        &mut self,
        m: &DidMessage,
        methods: &[DidMethodId],
        accepted: &[u16],
    ) -> Result<PeerIdentity, HandshakeError> {
        if !methods.contains(&m.method) {
            return Err(HandshakeError::NegotiationMismatch(format!("DID method {} was not offered", m.method)));
        }
        let did: Did = std::str::from_utf8(&m.did)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HandshakeError::BadIdentity("malformed DID".into()))?;
        if did.method_id() != Some(m.method) {
            return Err(HandshakeError::BadIdentity(format!("{did} does not match method byte {}", m.method)));
        }
        if !self.cfg.trust.is_trusted_did(&did) {
            return Err(HandshakeError::BadIdentity(format!("{did} is not a trusted DID")));
        }
        let (suite, public_key) = self.resolve(&did)?;
        self.recv_did_verify(suite, &public_key, accepted)?;
        Ok(PeerIdentity::Did { did, suite, public_key, claims: BTreeMap::new(), via_credential: false })
    }

    pub fn send_finished(&mut self, base_key: &[u8]) -> Result<(), HandshakeError> {
        let verify_data = finished_mac(self.hash, base_key, &self.th());
        self.send(HandshakeMessage::Finished(Finished { verify_data }))
    }

    pub fn recv_finished(&mut self, base_key: &[u8]) -> Result<(), HandshakeError> {
        let expected = finished_mac(self.hash, base_key, &self.th());
        match self.recv()? {
            HandshakeMessage::Finished(f) if ct_eq(&f.verify_data, &expected) => Ok(()),
            HandshakeMessage::Finished(_) => Err(HandshakeError::FinishedMismatch),
            other => Err(unexpected("Finished", &other)),
        }
    }
}

pub(crate) fn unexpected(expected: &str, got: &HandshakeMessage) -> HandshakeError {
    HandshakeError::UnexpectedMessage(format!("expected {expected}, got {}", got.name()))
}
