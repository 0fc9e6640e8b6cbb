use super::{HandshakeMessage, HandshakeTranscript};
use crate::crypto::{Role, SignatureSuite};
use crate::identity::vc_deserialize;
use crate::pki::certificate_objects;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PkObjectKind {
    PublicKey,
    Signature,
}

/// One public key or signature found in an identity message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkObject {
    pub message: &'static str,
    pub kind: PkObjectKind,
    pub suite: SignatureSuite,
    /// Budgeted size for the suite (see [`SignatureSuite::nominal_public_key_len`]).
    pub nominal_len: usize,
    /// Size as it appears on the wire.
    pub wire_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ByteAccounting {
    /// All handshake message bytes sent by the role, headers included.
    pub total_bytes: usize,
    /// Sum of nominal public-key and signature sizes.
    pub pk_object_bytes: usize,
    pub pk_object_wire_bytes: usize,
    pub objects: Vec<PkObject>,
}

fn sig_suite(scheme: u16) -> Option<SignatureSuite> {
    SignatureSuite::from_scheme(scheme)
}

/// Byte accounting for the messages `role` sent. Objects that cannot be
/// parsed are skipped rather than guessed.
pub fn transcript_bytes_accounting(transcript: &HandshakeTranscript, role: Role) -> ByteAccounting {
    let mut acc = ByteAccounting::default();
    let add = |acc: &mut ByteAccounting, message, kind, suite: SignatureSuite, wire_len| {
        let nominal_len = match kind {
            PkObjectKind::PublicKey => suite.nominal_public_key_len(),
            PkObjectKind::Signature => suite.nominal_signature_len(),
        };
        acc.objects.push(PkObject { message, kind, suite, nominal_len, wire_len });
    };
    for e in transcript.sent_by(role) {
        acc.total_bytes += e.bytes.len();
        match &e.message {
            HandshakeMessage::Certificate(c) => {
                for entry in &c.entries {
                    if let Ok(o) = certificate_objects(&entry.cert_data) {
                        add(&mut acc, "Certificate", PkObjectKind::PublicKey, o.key_suite, o.spki_key_len);
                        add(&mut acc, "Certificate", PkObjectKind::Signature, o.signature_suite, o.signature_len);
                    }
                }
            }
            HandshakeMessage::CertificateVerify(s) | HandshakeMessage::DidVerify(s) => {
                if let Some(suite) = sig_suite(s.scheme) {
                    add(&mut acc, e.message.name(), PkObjectKind::Signature, suite, s.signature.len());
                }
            }
            HandshakeMessage::Vc(m) => {
                if let Ok(vc) = vc_deserialize(&m.vc) {
                    if let Some(suite) = SignatureSuite::from_w3c_name(&vc.proof.type_) {
                        add(&mut acc, "VC", PkObjectKind::Signature, suite, vc.proof.proof_value.len());
                    }
                }
            }
            _ => {}
        }
    }
    acc.pk_object_bytes = acc.objects.iter().map(|o| o.nominal_len).sum();
    acc.pk_object_wire_bytes = acc.objects.iter().map(|o| o.wire_len).sum();
    acc
}
