use std::fmt;

use super::{CipherSuite, HashAlg};

/// Hash of the handshake messages exchanged so far.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TranscriptHash(pub Vec<u8>);

impl TranscriptHash {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for TranscriptHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TranscriptHash({})", hex::encode(&self.0))
    }
}

/// HKDF-Expand-Label from RFC 8446 §7.1.
pub fn hkdf_expand_label(
    hash: HashAlg,
    secret: &[u8],
    label: &str,
    context: &[u8],
    len: usize,
) -> Vec<u8> {
    let full_label_len = 6 + label.len();
    let mut info = Vec::with_capacity(4 + full_label_len + context.len());
    info.extend_from_slice(&(len as u16).to_be_bytes());
    info.push(full_label_len as u8);
    info.extend_from_slice(b"tls13 ");
    info.extend_from_slice(label.as_bytes());
    info.push(context.len() as u8);
    info.extend_from_slice(context);
    hash.hkdf_expand(secret, &info, len)
}

pub fn derive_secret(hash: HashAlg, secret: &[u8], label: &str, th: &[u8]) -> Vec<u8> {
    hkdf_expand_label(hash, secret, label, th, hash.output_len())
}

/// Traffic secrets for both directions of a completed handshake.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKeys {
    pub cipher_suite: CipherSuite,
    pub handshake_secret_client: Vec<u8>,
    pub handshake_secret_server: Vec<u8>,
    pub app_secret_client: Vec<u8>,
    pub app_secret_server: Vec<u8>,
}

impl fmt::Debug for SessionKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionKeys")
            .field("cipher_suite", &self.cipher_suite)
            .finish_non_exhaustive()
    }
}

/// The RFC 8446 key-schedule ladder without PSK.
#[derive(Clone)]
pub struct KeySchedule {
    suite: CipherSuite,
    handshake_secret: Option<Vec<u8>>,
    client_hs: Vec<u8>,
    server_hs: Vec<u8>,
}

impl KeySchedule {
    /// Early secret through the handshake traffic secrets. `hello_hash`
    /// covers ClientHello..ServerHello.
    pub fn handshake(suite: CipherSuite, shared_secret: &[u8], hello_hash: &TranscriptHash) -> Self {
        let hash = suite.hash();
        let zeros = vec![0u8; hash.output_len()];
        let early = hash.hkdf_extract(&zeros, &zeros);
        let empty = hash.digest(b"");
        let derived = derive_secret(hash, &early, "derived", &empty);
        let handshake_secret = hash.hkdf_extract(&derived, shared_secret);
        let client_hs = derive_secret(hash, &handshake_secret, "c hs traffic", hello_hash.as_bytes());
        let server_hs = derive_secret(hash, &handshake_secret, "s hs traffic", hello_hash.as_bytes());
        KeySchedule { suite, handshake_secret: Some(handshake_secret), client_hs, server_hs }
    }

    pub fn suite(&self) -> CipherSuite {
        self.suite
    }

    pub fn client_handshake_secret(&self) -> &[u8] {
        &self.client_hs
    }

    pub fn server_handshake_secret(&self) -> &[u8] {
        &self.server_hs
    }

    fn master_secret(&self) -> Vec<u8> {
        let hash = self.suite.hash();
        let hs = self.handshake_secret.as_ref().expect("handshake secret present");
        let empty = hash.digest(b"");
        let derived = derive_secret(hash, hs, "derived", &empty);
        hash.hkdf_extract(&derived, &vec![0u8; hash.output_len()])
    }

    /// Master secret and application traffic secrets. `server_finished_hash`
    /// covers ClientHello..server Finished.
    pub fn into_session_keys(self, server_finished_hash: &TranscriptHash) -> SessionKeys {
        let hash = self.suite.hash();
        let master = self.master_secret();
        let th = server_finished_hash.as_bytes();
        SessionKeys {
            cipher_suite: self.suite,
            app_secret_client: derive_secret(hash, &master, "c ap traffic", th),
            app_secret_server: derive_secret(hash, &master, "s ap traffic", th),
            handshake_secret_client: self.client_hs,
            handshake_secret_server: self.server_hs,
        }
    }
}

/// Full ladder in one call.
pub fn derive_session_keys(
    suite: CipherSuite,
    shared_secret: &[u8],
    hello_hash: &TranscriptHash,
    server_finished_hash: &TranscriptHash,
) -> SessionKeys {
    KeySchedule::handshake(suite, shared_secret, hello_hash).into_session_keys(server_finished_hash)
}

/// Finished verify_data: HMAC(finished_key, th) with
/// finished_key = HKDF-Expand-Label(base_key, "finished", "", Hash.length).
pub fn finished_mac(hash: HashAlg, base_key: &[u8], th: &TranscriptHash) -> Vec<u8> {
    let finished_key = hkdf_expand_label(hash, base_key, "finished", b"", hash.output_len());
    hash.hmac(&finished_key, th.as_bytes())
}

/// Record-protection key and IV for one direction.
#[derive(Clone, PartialEq, Eq)]
pub struct TrafficKeys {
    pub key: Vec<u8>,
    pub iv: Vec<u8>,
}

impl TrafficKeys {
    pub fn derive(suite: CipherSuite, secret: &[u8]) -> Self {
        let hash = suite.hash();
        TrafficKeys {
            key: hkdf_expand_label(hash, secret, "key", b"", suite.key_len()),
            iv: hkdf_expand_label(hash, secret, "iv", b"", suite.iv_len()),
        }
    }
}
