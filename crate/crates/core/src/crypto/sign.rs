use std::fmt;

use p256::ecdsa::signature::Signer as _;
use rand::rngs::OsRng;
use rand_core::CryptoRngCore;
use rsa::pkcs1::{DecodeRsaPrivateKey, DecodeRsaPublicKey, EncodeRsaPrivateKey, EncodeRsaPublicKey};
use rsa::signature::{RandomizedSigner, SignatureEncoding, Verifier as _};
use sha2::Sha256;

use super::{CryptoError, SignatureSuite};

const RSA_BITS: usize = 2048;

/// Result of checking a signature against a well-formed key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected,
}

impl Verdict {
    pub fn is_accepted(self) -> bool {
        self == Verdict::Accepted
    }
}

/// An identity key pair.
///
/// Encodings: Ed25519 uses the 32-byte seed and 32-byte public key; ECDSA
/// P-256 uses the 32-byte scalar and the 33-byte compressed SEC1 point; RSA
/// uses PKCS#1 DER for both halves.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    suite: SignatureSuite,
    secret_key: Vec<u8>,
    public_key: Vec<u8>,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("suite", &self.suite)
            .field("public_key", &hex::encode(&self.public_key))
            .finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn generate(suite: SignatureSuite, rng: &mut dyn CryptoRngCore) -> Self {
        match suite {
            SignatureSuite::Ed25519 => {
                let mut seed = [0u8; 32];
                rng.fill_bytes(&mut seed);
                Self::from_secret(suite, &seed).expect("any 32-byte seed is a valid key")
            }
            SignatureSuite::EcdsaSecp256r1Sha256 => {
                let sk = p256::ecdsa::SigningKey::random(&mut CryptoRngAdapter(rng));
                Self::from_secret(suite, &sk.to_bytes()).expect("fresh scalar is valid")
            }
            SignatureSuite::RsaPssRsae2048Sha256 => {
                let sk = rsa::RsaPrivateKey::new(&mut CryptoRngAdapter(rng), RSA_BITS)
                    .expect("rsa key generation");
                let der = sk.to_pkcs1_der().expect("pkcs1 encode");
                Self::from_secret(suite, der.as_bytes()).expect("fresh rsa key is valid")
            }
        }
    }

    /// Rebuilds a key pair from its secret half, deriving the public key.
    pub fn from_secret(suite: SignatureSuite, secret_key: &[u8]) -> Result<Self, CryptoError> {
        let public_key = match suite {
            SignatureSuite::Ed25519 => ed25519_signing_key(secret_key)?
                .verifying_key()
                .to_bytes()
                .to_vec(),
            SignatureSuite::EcdsaSecp256r1Sha256 => ecdsa_signing_key(secret_key)?
                .verifying_key()
                .to_encoded_point(true)
                .as_bytes()
                .to_vec(),
            SignatureSuite::RsaPssRsae2048Sha256 => {
                let sk = rsa_private_key(secret_key)?;
                sk.to_public_key()
                    .to_pkcs1_der()
                    .map_err(|e| CryptoError::malformed(suite, e))?
                    .into_vec()
            }
        };
        Ok(KeyPair { suite, secret_key: secret_key.to_vec(), public_key })
    }

    pub fn suite(&self) -> SignatureSuite {
        self.suite
    }

    pub fn public_key(&self) -> &[u8] {
        &self.public_key
    }

    pub fn secret_key(&self) -> &[u8] {
        &self.secret_key
    }

    pub fn sign(&self, content: &[u8], rng: &mut dyn CryptoRngCore) -> Vec<u8> {
        sign(self.suite, &self.secret_key, content, rng).expect("key pair holds a valid secret")
    }
}

/// Signs `content`. Ed25519 and ECDSA (RFC 6979 nonces) are deterministic;
/// RSA-PSS draws its salt from `rng`.
pub fn sign(
    suite: SignatureSuite,
    secret_key: &[u8],
    content: &[u8],
    rng: &mut dyn CryptoRngCore,
) -> Result<Vec<u8>, CryptoError> {
    Ok(match suite {
        SignatureSuite::Ed25519 => ed25519_signing_key(secret_key)?.sign(content).to_vec(),
        SignatureSuite::EcdsaSecp256r1Sha256 => {
            let sig: p256::ecdsa::Signature = ecdsa_signing_key(secret_key)?.sign(content);
            sig.to_der().as_bytes().to_vec()
        }
        SignatureSuite::RsaPssRsae2048Sha256 => {
            let key = rsa::pss::BlindedSigningKey::<Sha256>::new(rsa_private_key(secret_key)?);
            key.sign_with_rng(&mut CryptoRngAdapter(rng), content).to_vec()
        }
    })
}

/// Verifies `signature` over `content`. A malformed public key is an error;
/// a malformed or wrong signature is a rejection.
pub fn verify(
    suite: SignatureSuite,
    public_key: &[u8],
    content: &[u8],
    signature: &[u8],
) -> Result<Verdict, CryptoError> {
    let ok = match suite {
        SignatureSuite::Ed25519 => {
            let bytes: [u8; 32] = public_key
                .try_into()
                .map_err(|_| CryptoError::malformed(suite, "public key must be 32 bytes"))?;
            let vk = ed25519_dalek::VerifyingKey::from_bytes(&bytes)
                .map_err(|e| CryptoError::malformed(suite, e))?;
            match ed25519_dalek::Signature::from_slice(signature) {
                Ok(sig) => vk.verify_strict(content, &sig).is_ok(),
                Err(_) => false,
            }
        }
        SignatureSuite::EcdsaSecp256r1Sha256 => {
            let vk = p256::ecdsa::VerifyingKey::from_sec1_bytes(public_key)
                .map_err(|e| CryptoError::malformed(suite, e))?;
            match p256::ecdsa::Signature::from_der(signature) {
                Ok(sig) => vk.verify(content, &sig).is_ok(),
                Err(_) => false,
            }
        }
        SignatureSuite::RsaPssRsae2048Sha256 => {
            let pk = rsa::RsaPublicKey::from_pkcs1_der(public_key)
                .map_err(|e| CryptoError::malformed(suite, e))?;
            let vk = rsa::pss::VerifyingKey::<Sha256>::new(pk);
            match rsa::pss::Signature::try_from(signature) {
                Ok(sig) => vk.verify(content, &sig).is_ok(),
                Err(_) => false,
            }
        }
    };
    Ok(if ok { Verdict::Accepted } else { Verdict::Rejected })
}

/// Checks that `public_key` is a well-formed key for `suite`.
pub fn validate_public_key(suite: SignatureSuite, public_key: &[u8]) -> Result<(), CryptoError> {
    match suite {
        SignatureSuite::Ed25519 => {
            let bytes: [u8; 32] = public_key
                .try_into()
                .map_err(|_| CryptoError::malformed(suite, "public key must be 32 bytes"))?;
            ed25519_dalek::VerifyingKey::from_bytes(&bytes)
                .map_err(|e| CryptoError::malformed(suite, e))?;
        }
        SignatureSuite::EcdsaSecp256r1Sha256 => {
            p256::ecdsa::VerifyingKey::from_sec1_bytes(public_key)
                .map_err(|e| CryptoError::malformed(suite, e))?;
        }
        SignatureSuite::RsaPssRsae2048Sha256 => {
            rsa::RsaPublicKey::from_pkcs1_der(public_key)
                .map_err(|e| CryptoError::malformed(suite, e))?;
        }
    }
    Ok(())
}

/// Fresh OS-seeded generator for callers that do not need reproducibility.
pub fn os_rng() -> OsRng {
    OsRng
}

fn ed25519_signing_key(secret: &[u8]) -> Result<ed25519_dalek::SigningKey, CryptoError> {
    let seed: [u8; 32] = secret
        .try_into()
        .map_err(|_| CryptoError::malformed(SignatureSuite::Ed25519, "seed must be 32 bytes"))?;
    Ok(ed25519_dalek::SigningKey::from_bytes(&seed))
}

fn ecdsa_signing_key(secret: &[u8]) -> Result<p256::ecdsa::SigningKey, CryptoError> {
    p256::ecdsa::SigningKey::from_slice(secret)
        .map_err(|e| CryptoError::malformed(SignatureSuite::EcdsaSecp256r1Sha256, e))
}

fn rsa_private_key(secret: &[u8]) -> Result<rsa::RsaPrivateKey, CryptoError> {
    rsa::RsaPrivateKey::from_pkcs1_der(secret)
        .map_err(|e| CryptoError::malformed(SignatureSuite::RsaPssRsae2048Sha256, e))
}

/// Lets a `dyn CryptoRngCore` satisfy APIs that want a sized generator.
pub(crate) struct CryptoRngAdapter<'a>(pub &'a mut dyn CryptoRngCore);

impl rand_core::RngCore for CryptoRngAdapter<'_> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        self.0.try_fill_bytes(dest)
    }
}

impl rand_core::CryptoRng for CryptoRngAdapter<'_> {}
