//! Handshake message and extension codecs, transcript and byte accounting.

mod accounting;
mod codec;
mod dump;
mod ext;
mod msgs;
mod transcript;

pub use accounting::{transcript_bytes_accounting, ByteAccounting, PkObject, PkObjectKind};
pub use codec::{DecodeError, Reader};
pub use dump::{dump, dump_transcript};
pub use ext::*;
pub use msgs::*;
pub use transcript::{HandshakeTranscript, TranscriptEntry};
