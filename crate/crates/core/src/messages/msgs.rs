use super::codec::{put_u16, put_u24, put_vec16, put_vec24, put_vec8, u16_list, DecodeError, Reader};
use super::ext::{Extensions, EXT_SIGNATURE_ALGORITHMS, EXT_SSI_PARAMETERS};
use super::SsiParameters;
use crate::identity::DidMethodId;

pub const HS_CLIENT_HELLO: u8 = 1;
pub const HS_SERVER_HELLO: u8 = 2;
pub const HS_ENCRYPTED_EXTENSIONS: u8 = 8;
pub const HS_CERTIFICATE: u8 = 11;
pub const HS_CERTIFICATE_REQUEST: u8 = 13;
pub const HS_CERTIFICATE_VERIFY: u8 = 15;
pub const HS_FINISHED: u8 = 20;
// Unassigned in the TLS HandshakeType registry.
pub const HS_SSI_REQUEST: u8 = 26;
pub const HS_VC: u8 = 27;
pub const HS_DID: u8 = 28;
pub const HS_DID_VERIFY: u8 = 29;

pub const LEGACY_VERSION: u16 = 0x0303;
pub const HEADER_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientHello {
    pub legacy_version: u16,
    pub random: [u8; 32],
    pub legacy_session_id: Vec<u8>,
    pub cipher_suites: Vec<u16>,
    pub legacy_compression_methods: Vec<u8>,
    pub extensions: Extensions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerHello {
    pub legacy_version: u16,
    pub random: [u8; 32],
    pub legacy_session_id_echo: Vec<u8>,
    pub cipher_suite: u16,
    pub legacy_compression_method: u8,
    pub extensions: Extensions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptedExtensions {
    pub extensions: Extensions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateRequest {
    pub context: Vec<u8>,
    pub extensions: Extensions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateEntry {
    pub cert_data: Vec<u8>,
    pub extensions: Extensions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub context: Vec<u8>,
    pub entries: Vec<CertificateEntry>,
}

impl Certificate {
    pub fn from_chain(chain: &[Vec<u8>]) -> Self {
        Certificate {
            context: Vec::new(),
            entries: chain
                .iter()
                .map(|c| CertificateEntry { cert_data: c.clone(), extensions: Extensions::new() })
                .collect(),
        }
    }

    pub fn chain(&self) -> Vec<Vec<u8>> {
        self.entries.iter().map(|e| e.cert_data.clone()).collect()
    }
}

/// CertificateVerify and DIDVerify share this body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureBody {
    pub scheme: u16,
    pub signature: Vec<u8>,
}

/// Server request for SSI client authentication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsiRequest {
    pub extensions: Extensions,
}

impl SsiRequest {
    pub fn new(params: &SsiParameters, schemes: &[u16]) -> Self {
        let mut sig = Vec::new();
        super::codec::put_u16_list(&mut sig, schemes);
        SsiRequest {
            extensions: Extensions::new()
                .with(EXT_SSI_PARAMETERS, params.encode())
                .with(EXT_SIGNATURE_ALGORITHMS, sig),
        }
    }

    pub fn params(&self) -> SsiParameters {
        self.extensions
            .ssi_parameters()
            .ok()
            .flatten()
            .expect("validated at decode or construction")
    }

    pub fn signature_algorithms(&self) -> Vec<u16> {
        self.extensions
            .signature_algorithms()
            .ok()
            .flatten()
            .expect("validated at decode or construction")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcMessage {
    pub vc: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DidMessage {
    pub method: DidMethodId,
    pub did: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finished {
    pub verify_data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HandshakeMessage {
    ClientHello(ClientHello),
    ServerHello(ServerHello),
    EncryptedExtensions(EncryptedExtensions),
    CertificateRequest(CertificateRequest),
    Certificate(Certificate),
    CertificateVerify(SignatureBody),
    SsiRequest(SsiRequest),
    Vc(VcMessage),
    Did(DidMessage),
    DidVerify(SignatureBody),
    Finished(Finished),
}

impl HandshakeMessage {
    pub fn typ(&self) -> u8 {
        match self {
            HandshakeMessage::ClientHello(_) => HS_CLIENT_HELLO,
            HandshakeMessage::ServerHello(_) => HS_SERVER_HELLO,
            HandshakeMessage::EncryptedExtensions(_) => HS_ENCRYPTED_EXTENSIONS,
            HandshakeMessage::CertificateRequest(_) => HS_CERTIFICATE_REQUEST,
            HandshakeMessage::Certificate(_) => HS_CERTIFICATE,
            HandshakeMessage::CertificateVerify(_) => HS_CERTIFICATE_VERIFY,
            HandshakeMessage::SsiRequest(_) => HS_SSI_REQUEST,
            HandshakeMessage::Vc(_) => HS_VC,
            HandshakeMessage::Did(_) => HS_DID,
            HandshakeMessage::DidVerify(_) => HS_DID_VERIFY,
            HandshakeMessage::Finished(_) => HS_FINISHED,
        }
    }

    pub fn name(&self) -> &'static str {
        type_name(self.typ()).expect("known type")
    }

    fn encode_body(&self, out: &mut Vec<u8>) {
        match self {
            HandshakeMessage::ClientHello(m) => {
                put_u16(out, m.legacy_version);
                out.extend_from_slice(&m.random);
                put_vec8(out, &m.legacy_session_id);
                super::codec::put_u16_list(out, &m.cipher_suites);
                put_vec8(out, &m.legacy_compression_methods);
                m.extensions.encode(out);
            }
            HandshakeMessage::ServerHello(m) => {
                put_u16(out, m.legacy_version);
                out.extend_from_slice(&m.random);
                put_vec8(out, &m.legacy_session_id_echo);
                put_u16(out, m.cipher_suite);
                out.push(m.legacy_compression_method);
                m.extensions.encode(out);
            }
            HandshakeMessage::EncryptedExtensions(m) => m.extensions.encode(out),
            HandshakeMessage::CertificateRequest(m) => {
                put_vec8(out, &m.context);
                m.extensions.encode(out);
            }
            HandshakeMessage::Certificate(m) => {
                put_vec8(out, &m.context);
                let mut list = Vec::new();
                for e in &m.entries {
                    put_vec24(&mut list, &e.cert_data);
                    e.extensions.encode(&mut list);
                }
                put_vec24(out, &list);
            }
            HandshakeMessage::CertificateVerify(m) | HandshakeMessage::DidVerify(m) => {
                put_u16(out, m.scheme);
                put_vec16(out, &m.signature);
            }
            HandshakeMessage::SsiRequest(m) => m.extensions.encode(out),
            HandshakeMessage::Vc(m) => put_vec16(out, &m.vc),
            HandshakeMessage::Did(m) => {
                out.push(m.method.code());
                put_vec16(out, &m.did);
            }
            HandshakeMessage::Finished(m) => out.extend_from_slice(&m.verify_data),
        }
    }

    /// Framed encoding: type, 24-bit length, body.
    pub fn encode(&self) -> Vec<u8> {
        let mut body = Vec::new();
        self.encode_body(&mut body);
        let mut out = Vec::with_capacity(HEADER_LEN + body.len());
        out.push(self.typ());
        put_u24(&mut out, body.len());
        out.extend_from_slice(&body);
        out
    }

    /// Decodes exactly one framed message occupying all of `bytes`.
    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let typ = r.u8("handshake header")?;
        let len = r.u24("handshake header")?;
        let body = r.take(len, "handshake body")?;
        r.finish("handshake message")?;
        Self::decode_body(typ, body)
    }

    /// Length of the first framed message in `buf`, if the header is present.
    pub fn framed_len(buf: &[u8]) -> Option<usize> {
        if buf.len() < HEADER_LEN {
            return None;
        }
        Some(HEADER_LEN + (((buf[1] as usize) << 16) | ((buf[2] as usize) << 8) | buf[3] as usize))
    }

    pub fn decode_body(typ: u8, body: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(body);
        let msg = match typ {
            HS_CLIENT_HELLO => {
                let legacy_version = r.u16("legacy_version")?;
                let random = r.array::<32>("random")?;
                let legacy_session_id = r.vec8("legacy_session_id", 0, 32)?.to_vec();
                let suites = r.vec16("cipher_suites", 2, 0xfffe)?;
                let cipher_suites = u16_list(suites, "cipher_suites")?;
                let legacy_compression_methods = r.vec8("legacy_compression_methods", 1, 255)?.to_vec();
                let extensions = Extensions::decode(&mut r, 0)?;
                extensions.ssi_parameters()?;
                HandshakeMessage::ClientHello(ClientHello {
                    legacy_version,
                    random,
                    legacy_session_id,
                    cipher_suites,
                    legacy_compression_methods,
                    extensions,
                })
            }
            HS_SERVER_HELLO => {
                let legacy_version = r.u16("legacy_version")?;
                let random = r.array::<32>("random")?;
                let legacy_session_id_echo = r.vec8("legacy_session_id_echo", 0, 32)?.to_vec();
                let cipher_suite = r.u16("cipher_suite")?;
                let legacy_compression_method = r.u8("legacy_compression_method")?;
                let extensions = Extensions::decode(&mut r, 0)?;
                if extensions.get(EXT_SSI_PARAMETERS).is_some() {
                    return Err(DecodeError::UnexpectedExtension(EXT_SSI_PARAMETERS));
                }
                HandshakeMessage::ServerHello(ServerHello {
                    legacy_version,
                    random,
                    legacy_session_id_echo,
                    cipher_suite,
                    legacy_compression_method,
                    extensions,
                })
            }
            HS_ENCRYPTED_EXTENSIONS => {
                let extensions = Extensions::decode(&mut r, 0)?;
                if extensions.get(EXT_SSI_PARAMETERS).is_some() {
                    return Err(DecodeError::UnexpectedExtension(EXT_SSI_PARAMETERS));
                }
                HandshakeMessage::EncryptedExtensions(EncryptedExtensions { extensions })
            }
            HS_CERTIFICATE_REQUEST => {
                let context = r.vec8("certificate_request_context", 0, 255)?.to_vec();
                let extensions = Extensions::decode(&mut r, 2)?;
                if extensions.get(EXT_SSI_PARAMETERS).is_some() {
                    return Err(DecodeError::UnexpectedExtension(EXT_SSI_PARAMETERS));
                }
                HandshakeMessage::CertificateRequest(CertificateRequest { context, extensions })
            }
            HS_CERTIFICATE => {
                let context = r.vec8("certificate_request_context", 0, 255)?.to_vec();
                let list = r.vec24("certificate_list", 0, (1 << 24) - 1)?;
                let mut lr = Reader::new(list);
                let mut entries = Vec::new();
                while lr.remaining() > 0 {
                    let cert_data = lr.vec24("cert_data", 1, (1 << 24) - 1)?.to_vec();
                    let extensions = Extensions::decode(&mut lr, 0)?;
                    entries.push(CertificateEntry { cert_data, extensions });
                }
                HandshakeMessage::Certificate(Certificate { context, entries })
            }
            HS_CERTIFICATE_VERIFY | HS_DID_VERIFY => {
                let scheme = r.u16("signature scheme")?;
                let signature = r.vec16("signature", 0, 0xffff)?.to_vec();
                let body = SignatureBody { scheme, signature };
                if typ == HS_CERTIFICATE_VERIFY {
                    HandshakeMessage::CertificateVerify(body)
                } else {
                    HandshakeMessage::DidVerify(body)
                }
            }
            HS_SSI_REQUEST => {
                let extensions = Extensions::decode(&mut r, 2)?;
                for t in extensions.types() {
                    if t != EXT_SSI_PARAMETERS && t != EXT_SIGNATURE_ALGORITHMS {
                        return Err(DecodeError::UnexpectedExtension(t));
                    }
                }
                extensions
                    .ssi_parameters()?
                    .ok_or(DecodeError::MissingExtension(EXT_SSI_PARAMETERS))?;
                extensions
                    .signature_algorithms()?
                    .ok_or(DecodeError::MissingExtension(EXT_SIGNATURE_ALGORITHMS))?;
                HandshakeMessage::SsiRequest(SsiRequest { extensions })
            }
            HS_VC => HandshakeMessage::Vc(VcMessage { vc: r.vec16("vc", 0, 0xffff)?.to_vec() }),
            HS_DID => {
                let method = DidMethodId(r.u8("did_method")?);
                let did = r.vec16("did", 0, 0xffff)?.to_vec();
                HandshakeMessage::Did(DidMessage { method, did })
            }
            HS_FINISHED => {
                if body.is_empty() {
                    return Err(DecodeError::VectorLength { what: "verify_data", len: 0, min: 1, max: 64 });
                }
                r.take(body.len(), "verify_data")?;
                HandshakeMessage::Finished(Finished { verify_data: body.to_vec() })
            }
            other => return Err(DecodeError::UnknownType(other)),
        };
        r.finish(type_name(typ).unwrap_or("message"))?;
        Ok(msg)
    }
}

pub fn type_name(typ: u8) -> Option<&'static str> {
    Some(match typ {
        HS_CLIENT_HELLO => "ClientHello",
        HS_SERVER_HELLO => "ServerHello",
        HS_ENCRYPTED_EXTENSIONS => "EncryptedExtensions",
        HS_CERTIFICATE_REQUEST => "CertificateRequest",
        HS_CERTIFICATE => "Certificate",
        HS_CERTIFICATE_VERIFY => "CertificateVerify",
        HS_SSI_REQUEST => "SSIRequest",
        HS_VC => "VC",
        HS_DID => "DID",
        HS_DID_VERIFY => "DIDVerify",
        HS_FINISHED => "Finished",
        _ => return None,
    })
}
