//! X.509 chains for the original authentication mode and for the ledger
//! node's server certificate.
//!
//! Chains are three links long (root, intermediate, leaf); the root stays
//! out of the Certificate message. All three certificates share one signature
//! suite. Certificates are signed with ECDSA-SHA256, Ed25519 or
//! PKCS#1 v1.5 SHA-256 for RSA keys.

use chrono::{DateTime, Utc};
use p256::ecdsa::signature::Verifier as _;
use rand_core::CryptoRngCore;
use rcgen::{
    BasicConstraints, CertificateParams, DistinguishedName, DnType, IsCa, KeyIdMethod,
    KeyUsagePurpose, RemoteKeyPair, SerialNumber, SignatureAlgorithm,
};
use rsa::pkcs1::DecodeRsaPublicKey;
use sha2::{Digest, Sha256};
use x509_parser::prelude::{FromDer, X509Certificate};

use crate::crypto::{os_rng, KeyPair, SignatureSuite};

const OID_ED25519: &str = "1.3.101.112";
const OID_EC_PUBLIC_KEY: &str = "1.2.840.10045.2.1";
const OID_RSA_ENCRYPTION: &str = "1.2.840.113549.1.1.1";
const OID_ECDSA_SHA256: &str = "1.2.840.10045.4.3.2";
const OID_RSA_SHA256: &str = "1.2.840.113549.1.1.11";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PkiError {
    #[error("certificate {index} does not parse: {reason}")]
    Parse { index: usize, reason: String },
    #[error("empty certificate chain")]
    EmptyChain,
    #[error("certificate {0} has an unsupported key or signature algorithm")]
    Unsupported(usize),
    #[error("certificate {0} signature does not verify")]
    BadSignature(usize),
    #[error("certificate {0} is outside its validity period")]
    Expired(usize),
    #[error("certificate {0} is not a CA but signs another certificate")]
    NotCa(usize),
    #[error("chain does not terminate at a trusted root")]
    UnknownIssuer,
    #[error("certificate generation failed: {0}")]
    Generate(String),
}

/// End-entity X.509 credentials: the chain as sent on the wire and the leaf key.
#[derive(Debug, Clone)]
pub struct X509Identity {
    /// Leaf first, root excluded.
    pub chain: Vec<Vec<u8>>,
    pub keys: KeyPair,
}

/// A root certificate together with the identity it ultimately vouches for.
#[derive(Debug, Clone)]
pub struct IssuedChain {
    pub root: Vec<u8>,
    pub identity: X509Identity,
}

/// The outcome of validating a chain: who the leaf is and its key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiedLeaf {
    pub subject: String,
    pub suite: SignatureSuite,
    pub public_key: Vec<u8>,
}

struct Signer {
    keys: KeyPair,
    spki_key: Vec<u8>,
}

impl RemoteKeyPair for Signer {
    fn public_key(&self) -> &[u8] {
        &self.spki_key
    }

    fn sign(&self, msg: &[u8]) -> Result<Vec<u8>, rcgen::Error> {
        cert_sign(&self.keys, msg).map_err(|_| rcgen::Error::RemoteKeyError)
    }

    fn algorithm(&self) -> &'static SignatureAlgorithm {
        match self.keys.suite() {
            SignatureSuite::Ed25519 => &rcgen::PKCS_ED25519,
            SignatureSuite::EcdsaSecp256r1Sha256 => &rcgen::PKCS_ECDSA_P256_SHA256,
            SignatureSuite::RsaPssRsae2048Sha256 => &rcgen::PKCS_RSA_SHA256,
        }
    }
}

fn cert_sign(keys: &KeyPair, msg: &[u8]) -> Result<Vec<u8>, PkiError> {
    match keys.suite() {
        SignatureSuite::RsaPssRsae2048Sha256 => {
            use rsa::pkcs1::DecodeRsaPrivateKey;
            use rsa::signature::{SignatureEncoding, Signer as _};
            let sk = rsa::RsaPrivateKey::from_pkcs1_der(keys.secret_key())
                .map_err(|e| PkiError::Generate(e.to_string()))?;
            let key = rsa::pkcs1v15::SigningKey::<Sha256>::new(sk);
            Ok(key.sign(msg).to_vec())
        }
        _ => Ok(keys.sign(msg, &mut os_rng())),
    }
}

/// Public key bytes as they appear inside a SubjectPublicKeyInfo.
fn spki_key_bytes(keys: &KeyPair) -> Vec<u8> {
    match keys.suite() {
        SignatureSuite::EcdsaSecp256r1Sha256 => {
            let vk = p256::ecdsa::VerifyingKey::from_sec1_bytes(keys.public_key())
                .expect("key pair holds a valid point");
            vk.to_encoded_point(false).as_bytes().to_vec()
        }
        _ => keys.public_key().to_vec(),
    }
}

fn rcgen_key(keys: &KeyPair) -> Result<rcgen::KeyPair, PkiError> {
    rcgen::KeyPair::from_remote(Box::new(Signer { keys: keys.clone(), spki_key: spki_key_bytes(keys) }))
        .map_err(|e| PkiError::Generate(e.to_string()))
}

fn params(
    common_name: &str,
    ca: bool,
    keys: &KeyPair,
    rng: &mut dyn CryptoRngCore,
) -> CertificateParams {
    let mut p = CertificateParams::default();
    let mut dn = DistinguishedName::new();
    dn.push(DnType::CommonName, common_name);
    p.distinguished_name = dn;
    let mut serial = [0u8; 16];
    rng.fill_bytes(&mut serial);
    serial[0] &= 0x7f;
    p.serial_number = Some(SerialNumber::from_slice(&serial));
    let ski = Sha256::digest(keys.public_key());
    p.key_identifier_method = KeyIdMethod::PreSpecified(ski[..20].to_vec());
    if ca {
        p.is_ca = IsCa::Ca(BasicConstraints::Unconstrained);
        p.key_usages = vec![KeyUsagePurpose::KeyCertSign, KeyUsagePurpose::DigitalSignature];
    } else {
        p.is_ca = IsCa::ExplicitNoCa;
        p.key_usages = vec![KeyUsagePurpose::DigitalSignature];
        p.subject_alt_names = vec![rcgen::SanType::DnsName(
            common_name.try_into().unwrap_or_else(|_| "localhost".try_into().expect("valid name")),
        )];
    }
    p
}

/// Issues a root → intermediate → leaf chain whose keys all use `suite`.
pub fn issue_chain(
    suite: SignatureSuite,
    subject: &str,
    rng: &mut dyn CryptoRngCore,
) -> Result<IssuedChain, PkiError> {
    let root_keys = KeyPair::generate(suite, rng);
    let inter_keys = KeyPair::generate(suite, rng);
    let leaf_keys = KeyPair::generate(suite, rng);
    issue_chain_with_keys(subject, &root_keys, &inter_keys, leaf_keys, rng)
}

pub fn issue_chain_with_keys(
    subject: &str,
    root_keys: &KeyPair,
    inter_keys: &KeyPair,
    leaf_keys: KeyPair,
    rng: &mut dyn CryptoRngCore,
) -> Result<IssuedChain, PkiError> {
    let gen = |e: rcgen::Error| PkiError::Generate(e.to_string());
    let root_rc = rcgen_key(root_keys)?;
    let inter_rc = rcgen_key(inter_keys)?;
    let leaf_rc = rcgen_key(&leaf_keys)?;

    let root = params(&format!("{subject} Root CA"), true, root_keys, rng)
        .self_signed(&root_rc)
        .map_err(gen)?;
    let inter = params(&format!("{subject} Intermediate CA"), true, inter_keys, rng)
        .signed_by(&inter_rc, &root, &root_rc)
        .map_err(gen)?;
    let leaf = params(subject, false, &leaf_keys, rng)
        .signed_by(&leaf_rc, &inter, &inter_rc)
        .map_err(gen)?;

    Ok(IssuedChain {
        root: root.der().to_vec(),
        identity: X509Identity {
            chain: vec![leaf.der().to_vec(), inter.der().to_vec()],
            keys: leaf_keys,
        },
    })
}

/// Parsed view of one certificate's key and signature objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateObjects {
    pub key_suite: SignatureSuite,
    /// The key in this crate's encoding (compressed point for ECDSA).
    pub public_key: Vec<u8>,
    /// Length of the key as carried in the certificate.
    pub spki_key_len: usize,
    pub signature_suite: SignatureSuite,
    pub signature_len: usize,
}

pub fn certificate_objects(der: &[u8]) -> Result<CertificateObjects, PkiError> {
    let cert = parse(0, der)?;
    let (key_suite, public_key, spki_key_len) = leaf_key(0, &cert)?;
    let signature_suite = match cert.signature_algorithm.algorithm.to_id_string().as_str() {
        OID_ECDSA_SHA256 => SignatureSuite::EcdsaSecp256r1Sha256,
        OID_ED25519 => SignatureSuite::Ed25519,
        OID_RSA_SHA256 => SignatureSuite::RsaPssRsae2048Sha256,
        _ => return Err(PkiError::Unsupported(0)),
    };
    Ok(CertificateObjects {
        key_suite,
        public_key,
        spki_key_len,
        signature_suite,
        signature_len: cert.signature_value.data.len(),
    })
}

fn parse(index: usize, der: &[u8]) -> Result<X509Certificate<'_>, PkiError> {
    match X509Certificate::from_der(der) {
        Ok((rest, cert)) if rest.is_empty() => Ok(cert),
        Ok(_) => Err(PkiError::Parse { index, reason: "trailing bytes".into() }),
        Err(e) => Err(PkiError::Parse { index, reason: e.to_string() }),
    }
}

fn leaf_key(
    index: usize,
    cert: &X509Certificate<'_>,
) -> Result<(SignatureSuite, Vec<u8>, usize), PkiError> {
    let spki = &cert.tbs_certificate.subject_pki;
    let raw = spki.subject_public_key.data.as_ref();
    match spki.algorithm.algorithm.to_id_string().as_str() {
        OID_ED25519 if raw.len() == 32 => Ok((SignatureSuite::Ed25519, raw.to_vec(), raw.len())),
        OID_EC_PUBLIC_KEY => {
            let vk = p256::ecdsa::VerifyingKey::from_sec1_bytes(raw)
                .map_err(|_| PkiError::Unsupported(index))?;
            let compressed = vk.to_encoded_point(true).as_bytes().to_vec();
            Ok((SignatureSuite::EcdsaSecp256r1Sha256, compressed, raw.len()))
        }
        OID_RSA_ENCRYPTION => {
            rsa::RsaPublicKey::from_pkcs1_der(raw).map_err(|_| PkiError::Unsupported(index))?;
            Ok((SignatureSuite::RsaPssRsae2048Sha256, raw.to_vec(), raw.len()))
        }
        _ => Err(PkiError::Unsupported(index)),
    }
}

/// Checks the certificate signature of `child` against `issuer`'s key.
fn check_signed_by(
    index: usize,
    child: &X509Certificate<'_>,
    issuer: &X509Certificate<'_>,
) -> Result<(), PkiError> {
    if child.issuer() != issuer.subject() {
        return Err(PkiError::UnknownIssuer);
    }
    let (issuer_suite, issuer_key, _) = leaf_key(index + 1, issuer)?;
    let tbs = child.tbs_certificate.as_ref();
    let sig = child.signature_value.data.as_ref();
    let ok = match (child.signature_algorithm.algorithm.to_id_string().as_str(), issuer_suite) {
        (OID_ED25519, SignatureSuite::Ed25519) => {
            crate::crypto::verify(issuer_suite, &issuer_key, tbs, sig)
                .map_err(|_| PkiError::Unsupported(index + 1))?
                .is_accepted()
        }
        (OID_ECDSA_SHA256, SignatureSuite::EcdsaSecp256r1Sha256) => {
            crate::crypto::verify(issuer_suite, &issuer_key, tbs, sig)
                .map_err(|_| PkiError::Unsupported(index + 1))?
                .is_accepted()
        }
        (OID_RSA_SHA256, SignatureSuite::RsaPssRsae2048Sha256) => {
            let pk = rsa::RsaPublicKey::from_pkcs1_der(&issuer_key)
                .map_err(|_| PkiError::Unsupported(index + 1))?;
            let vk = rsa::pkcs1v15::VerifyingKey::<Sha256>::new(pk);
            match rsa::pkcs1v15::Signature::try_from(sig) {
                Ok(s) => vk.verify(tbs, &s).is_ok(),
                Err(_) => false,
            }
        }
        _ => return Err(PkiError::Unsupported(index)),
    };
    if ok {
        Ok(())
    } else {
        Err(PkiError::BadSignature(index))
    }
}

fn is_ca(cert: &X509Certificate<'_>) -> bool {
    matches!(cert.basic_constraints(), Ok(Some(bc)) if bc.value.ca)
}

fn within_validity(cert: &X509Certificate<'_>, now: DateTime<Utc>) -> bool {
    let t = now.timestamp();
    let v = cert.validity();
    v.not_before.timestamp() <= t && t <= v.not_after.timestamp()
}

/// Validates a leaf-first chain against a set of trusted roots.
pub fn verify_chain(
    chain: &[Vec<u8>],
    roots: &[Vec<u8>],
    now: DateTime<Utc>,
) -> Result<VerifiedLeaf, PkiError> {
    if chain.is_empty() {
        return Err(PkiError::EmptyChain);
    }
    let certs = chain
        .iter()
        .enumerate()
        .map(|(i, der)| parse(i, der))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, cert) in certs.iter().enumerate() {
        if !within_validity(cert, now) {
            return Err(PkiError::Expired(i));
        }
        if i > 0 && !is_ca(cert) {
            return Err(PkiError::NotCa(i));
        }
    }
    for i in 0..certs.len() - 1 {
        check_signed_by(i, &certs[i], &certs[i + 1])?;
    }
    let top = certs.last().expect("non-empty");
    let top_index = certs.len() - 1;
    let mut anchored = false;
    for root_der in roots {
        let Ok(root) = parse(certs.len(), root_der) else { continue };
        if root.subject() != top.issuer() || !is_ca(&root) {
            continue;
        }
        if check_signed_by(top_index, top, &root).is_ok() {
            anchored = true;
            break;
        }
    }
    if !anchored {
        return Err(PkiError::UnknownIssuer);
    }
    let leaf = &certs[0];
    let (suite, public_key, _) = leaf_key(0, leaf)?;
    let subject = leaf
        .subject()
        .iter_common_name()
        .next()
        .and_then(|cn| cn.as_str().ok())
        .unwrap_or_default()
        .to_string();
    Ok(VerifiedLeaf { subject, suite, public_key })
}

pub fn cert_to_pem(der: &[u8]) -> String {
    pem::encode(&pem::Pem::new("CERTIFICATE", der.to_vec()))
}

pub fn certs_from_pem(text: &str) -> Result<Vec<Vec<u8>>, pem::PemError> {
    Ok(pem::parse_many(text)?
        .into_iter()
        .filter(|p| p.tag() == "CERTIFICATE")
        .map(|p| p.into_contents())
        .collect())
}
