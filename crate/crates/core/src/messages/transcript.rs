use super::HandshakeMessage;
use crate::crypto::{HashAlg, Role, TranscriptHash};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub sender: Role,
    pub message: HandshakeMessage,
    /// Exact framed bytes as sent.
    pub bytes: Vec<u8>,
}

/// Ordered log of handshake messages in both directions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HandshakeTranscript {
    entries: Vec<TranscriptEntry>,
}

impl HandshakeTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sender: Role, message: HandshakeMessage, bytes: Vec<u8>) {
        self.entries.push(TranscriptEntry { sender, message, bytes });
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Hash over the first `n` messages.
    pub fn hash_prefix(&self, hash: HashAlg, n: usize) -> TranscriptHash {
        let mut all = Vec::new();
        for e in &self.entries[..n] {
            all.extend_from_slice(&e.bytes);
        }
        TranscriptHash(hash.digest(&all))
    }

    pub fn hash(&self, hash: HashAlg) -> TranscriptHash {
        self.hash_prefix(hash, self.entries.len())
    }

    pub fn sent_by(&self, role: Role) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries.iter().filter(move |e| e.sender == role)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.message.name()).collect()
    }
}
