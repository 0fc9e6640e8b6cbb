use std::fmt;

use hkdf::Hkdf;
use hmac::{Hmac, Mac};
use sha2::{Digest, Sha256, Sha384};

/// Signature suites usable for identity keys, each bound to one TLS
/// `SignatureScheme` and one W3C proof-type name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignatureSuite {
    EcdsaSecp256r1Sha256,
    RsaPssRsae2048Sha256,
    Ed25519,
}

impl SignatureSuite {
    pub const ALL: [SignatureSuite; 3] = [
        SignatureSuite::RsaPssRsae2048Sha256,
        SignatureSuite::EcdsaSecp256r1Sha256,
        SignatureSuite::Ed25519,
    ];

    /// RFC 8446 SignatureScheme name.
    pub fn ietf_name(self) -> &'static str {
        match self {
            SignatureSuite::EcdsaSecp256r1Sha256 => "ecdsa_secp256r1_sha256",
            SignatureSuite::RsaPssRsae2048Sha256 => "rsa_pss_rsae_sha256",
            SignatureSuite::Ed25519 => "ed25519",
        }
    }

    /// W3C proof / verification-method type name.
    pub fn w3c_name(self) -> &'static str {
        match self {
            SignatureSuite::EcdsaSecp256r1Sha256 => "EcdsaSecp256r1Signature2023",
            SignatureSuite::RsaPssRsae2048Sha256 => "RsaSignature2023",
            SignatureSuite::Ed25519 => "Ed25519Signature2023",
        }
    }

    /// Short label used on the command line and in reports.
    pub fn label(self) -> &'static str {
        match self {
            SignatureSuite::EcdsaSecp256r1Sha256 => "ecdsa",
            SignatureSuite::RsaPssRsae2048Sha256 => "rsa",
            SignatureSuite::Ed25519 => "eddsa",
        }
    }

    /// TLS SignatureScheme code point.
    pub fn scheme(self) -> u16 {
        match self {
            SignatureSuite::EcdsaSecp256r1Sha256 => 0x0403,
            SignatureSuite::RsaPssRsae2048Sha256 => 0x0804,
            SignatureSuite::Ed25519 => 0x0807,
        }
    }

    pub fn from_scheme(code: u16) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.scheme() == code)
    }

    pub fn from_w3c_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.w3c_name() == name)
    }

    pub fn from_label(label: &str) -> Option<Self> {
        let label = label.to_ascii_lowercase();
        Self::ALL.into_iter().find(|s| {
            s.label() == label || s.ietf_name() == label || s.w3c_name().eq_ignore_ascii_case(&label)
        })
    }

    /// Size of a public key object in the handshake-size accounting table.
    ///
    /// ECDSA keys count as compressed SEC1 points; RSA-2048 keys count 272 bytes.
    pub fn nominal_public_key_len(self) -> usize {
        match self {
            SignatureSuite::EcdsaSecp256r1Sha256 => 33,
            SignatureSuite::RsaPssRsae2048Sha256 => 272,
            SignatureSuite::Ed25519 => 32,
        }
    }

    /// Size of a signature object in the handshake-size accounting table.
    /// DER-encoded ECDSA signatures vary between 70 and 72 bytes on the wire;
    /// the table budgets 70.
    pub fn nominal_signature_len(self) -> usize {
        match self {
            SignatureSuite::EcdsaSecp256r1Sha256 => 70,
            SignatureSuite::RsaPssRsae2048Sha256 => 256,
            SignatureSuite::Ed25519 => 64,
        }
    }
}

impl fmt::Display for SignatureSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ietf_name())
    }
}

/// Hash functions used by the key schedule and transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HashAlg {
    Sha256,
    Sha384,
}

impl HashAlg {
    pub fn output_len(self) -> usize {
        match self {
            HashAlg::Sha256 => 32,
            HashAlg::Sha384 => 48,
        }
    }

    pub fn digest(self, data: &[u8]) -> Vec<u8> {
        match self {
            HashAlg::Sha256 => Sha256::digest(data).to_vec(),
            HashAlg::Sha384 => Sha384::digest(data).to_vec(),
        }
    }

    pub fn hmac(self, key: &[u8], data: &[u8]) -> Vec<u8> {
        match self {
            HashAlg::Sha256 => {
                let mut mac = Hmac::<Sha256>::new_from_slice(key).expect("hmac accepts any key");
                mac.update(data);
                mac.finalize().into_bytes().to_vec()
            }
            HashAlg::Sha384 => {
                let mut mac = Hmac::<Sha384>::new_from_slice(key).expect("hmac accepts any key");
                mac.update(data);
                mac.finalize().into_bytes().to_vec()
            }
        }
    }

    pub fn hkdf_extract(self, salt: &[u8], ikm: &[u8]) -> Vec<u8> {
        match self {
            HashAlg::Sha256 => Hkdf::<Sha256>::extract(Some(salt), ikm).0.to_vec(),
            HashAlg::Sha384 => Hkdf::<Sha384>::extract(Some(salt), ikm).0.to_vec(),
        }
    }

    pub fn hkdf_expand(self, prk: &[u8], info: &[u8], len: usize) -> Vec<u8> {
        let mut okm = vec![0u8; len];
        match self {
            HashAlg::Sha256 => Hkdf::<Sha256>::from_prk(prk)
                .expect("prk is a full hash output")
                .expand(info, &mut okm)
                .expect("requested length within hkdf bounds"),
            HashAlg::Sha384 => Hkdf::<Sha384>::from_prk(prk)
                .expect("prk is a full hash output")
                .expand(info, &mut okm)
                .expect("requested length within hkdf bounds"),
        }
        okm
    }
}

/// TLS 1.3 cipher suites. Only the SHA-384 suite is offered in handshakes; the
/// SHA-256 suite exists so the key schedule can be checked against published
/// traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CipherSuite {
    Aes128GcmSha256,
    Aes256GcmSha384,
}

impl CipherSuite {
    pub fn code(self) -> u16 {
        match self {
            CipherSuite::Aes128GcmSha256 => 0x1301,
            CipherSuite::Aes256GcmSha384 => 0x1302,
        }
    }

    pub fn from_code(code: u16) -> Option<Self> {
        match code {
            0x1301 => Some(CipherSuite::Aes128GcmSha256),
            0x1302 => Some(CipherSuite::Aes256GcmSha384),
            _ => None,
        }
    }

    pub fn hash(self) -> HashAlg {
        match self {
            CipherSuite::Aes128GcmSha256 => HashAlg::Sha256,
            CipherSuite::Aes256GcmSha384 => HashAlg::Sha384,
        }
    }

    pub fn key_len(self) -> usize {
        match self {
            CipherSuite::Aes128GcmSha256 => 16,
            CipherSuite::Aes256GcmSha384 => 32,
        }
    }

    pub fn iv_len(self) -> usize {
        12
    }

    pub fn name(self) -> &'static str {
        match self {
            CipherSuite::Aes128GcmSha256 => "TLS_AES_128_GCM_SHA256",
            CipherSuite::Aes256GcmSha384 => "TLS_AES_256_GCM_SHA384",
        }
    }
}
