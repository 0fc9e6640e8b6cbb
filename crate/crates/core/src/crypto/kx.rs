use rand_core::CryptoRngCore;
use x25519_dalek::{PublicKey, StaticSecret};

use super::CryptoError;

/// Ephemeral X25519 key pair for the handshake key exchange.
#[derive(Clone)]
pub struct X25519KeyPair {
    secret: StaticSecret,
    public: [u8; 32],
}

impl X25519KeyPair {
    pub fn generate(rng: &mut dyn CryptoRngCore) -> Self {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        Self::from_secret(bytes)
    }

    pub fn from_secret(bytes: [u8; 32]) -> Self {
        let secret = StaticSecret::from(bytes);
        let public = PublicKey::from(&secret).to_bytes();
        X25519KeyPair { secret, public }
    }

    pub fn public_key(&self) -> [u8; 32] {
        self.public
    }
}

/// Computes the X25519 shared secret, rejecting the all-zero output that a
/// low-order peer point produces.
pub fn ecdhe_exchange(local: &X25519KeyPair, peer_public: &[u8]) -> Result<[u8; 32], CryptoError> {
    let peer: [u8; 32] = peer_public
        .try_into()
        .map_err(|_| CryptoError::InvalidKeyShare("x25519 share must be 32 bytes"))?;
    let shared = local.secret.diffie_hellman(&PublicKey::from(peer));
    if !shared.was_contributory() {
        return Err(CryptoError::InvalidKeyShare("non-contributory x25519 exchange"));
    }
    Ok(shared.to_bytes())
}
