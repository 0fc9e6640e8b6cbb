use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes128Gcm, Aes256Gcm, Nonce};

use super::{CipherSuite, CryptoError, TrafficKeys};

enum Cipher {
    Aes128(Box<Aes128Gcm>),
    Aes256(Box<Aes256Gcm>),
}

/// One direction of RFC 8446 record protection: per-record nonce is the
/// static IV XORed with the 64-bit sequence number.
pub struct RecordCipher {
    cipher: Cipher,
    iv: [u8; 12],
    seq: u64,
}

impl RecordCipher {
    pub fn new(suite: CipherSuite, keys: &TrafficKeys) -> Self {
        let cipher = match suite {
            CipherSuite::Aes128GcmSha256 => {
                Cipher::Aes128(Box::new(Aes128Gcm::new_from_slice(&keys.key).expect("16-byte key")))
            }
            CipherSuite::Aes256GcmSha384 => {
                Cipher::Aes256(Box::new(Aes256Gcm::new_from_slice(&keys.key).expect("32-byte key")))
            }
        };
        let iv: [u8; 12] = keys.iv.as_slice().try_into().expect("12-byte iv");
        RecordCipher { cipher, iv, seq: 0 }
    }

    fn next_nonce(&mut self) -> Result<[u8; 12], CryptoError> {
        let mut nonce = self.iv;
        for (n, s) in nonce[4..].iter_mut().zip(self.seq.to_be_bytes()) {
            *n ^= s;
        }
        self.seq = self.seq.checked_add(1).ok_or(CryptoError::SequenceExhausted)?;
        Ok(nonce)
    }

    pub fn seal(&mut self, aad: &[u8], plaintext: &[u8]) -> Result<Vec<u8>, CryptoError> {
        let nonce = self.next_nonce()?;
        let payload = Payload { msg: plaintext, aad };
        let nonce = &Nonce::from(nonce);
        match &self.cipher {
            Cipher::Aes128(c) => c.encrypt(nonce, payload),
            Cipher::Aes256(c) => c.encrypt(nonce, payload),
        }
        .map_err(|_| CryptoError::AeadFailure)
    }

    pub fn open(&mut self, aad: &[u8], ciphertext: &[u8]) -> Result<Vec<u8>, CryptoError> {
        let nonce = self.next_nonce()?;
        let payload = Payload { msg: ciphertext, aad };
        let nonce = &Nonce::from(nonce);
        match &self.cipher {
            Cipher::Aes128(c) => c.decrypt(nonce, payload),
            Cipher::Aes256(c) => c.decrypt(nonce, payload),
        }
        .map_err(|_| CryptoError::AeadFailure)
    }

    pub fn sequence(&self) -> u64 {
        self.seq
    }
}

pub const AEAD_TAG_LEN: usize = 16;
