use std::io::{Read, Write};

use super::error::{HandshakeError, ALERT_CLOSE_NOTIFY};
use crate::crypto::{CipherSuite, RecordCipher, TrafficKeys, AEAD_TAG_LEN};
use crate::messages::HandshakeMessage;

pub const CT_CHANGE_CIPHER_SPEC: u8 = 20;
pub const CT_ALERT: u8 = 21;
pub const CT_HANDSHAKE: u8 = 22;
pub const CT_APPLICATION_DATA: u8 = 23;

pub const MAX_FRAGMENT: usize = 1 << 14;
const MAX_CIPHERTEXT: usize = MAX_FRAGMENT + 256;
const MAX_HANDSHAKE_MESSAGE: usize = 1 << 18;

/// TLS 1.3 record layer over a byte stream. Writes are buffered until the
/// next read or an explicit flush, so one flight goes out in one write.
pub struct RecordLayer<T> {
    io: T,
    out: Vec<u8>,
    read_cipher: Option<RecordCipher>,
    write_cipher: Option<RecordCipher>,
    hs_buf: Vec<u8>,
    bytes_sent: usize,
    bytes_received: usize,
}

impl<T: Read + Write> RecordLayer<T> {
    pub fn new(io: T) -> Self {
        RecordLayer {
            io,
            out: Vec::new(),
            read_cipher: None,
            write_cipher: None,
            hs_buf: Vec::new(),
            bytes_sent: 0,
            bytes_received: 0,
        }
    }

    pub fn into_inner(self) -> T {
        self.io
    }

    pub fn get_mut(&mut self) -> &mut T {
        &mut self.io
    }

    pub fn bytes_sent(&self) -> usize {
        self.bytes_sent
    }

    pub fn bytes_received(&self) -> usize {
        self.bytes_received
    }

    pub fn set_write_keys(&mut self, suite: CipherSuite, secret: &[u8]) {
        self.write_cipher = Some(RecordCipher::new(suite, &TrafficKeys::derive(suite, secret)));
    }

    /// Changing read keys with a partial handshake message buffered means the
    /// peer straddled a key change.
    pub fn set_read_keys(&mut self, suite: CipherSuite, secret: &[u8]) -> Result<(), HandshakeError> {
        if !self.hs_buf.is_empty() {
            return Err(HandshakeError::UnexpectedMessage("data pending across key change".into()));
        }
        self.read_cipher = Some(RecordCipher::new(suite, &TrafficKeys::derive(suite, secret)));
        Ok(())
    }

    pub fn write_record(&mut self, content_type: u8, data: &[u8]) -> Result<(), HandshakeError> {
        for chunk in data.chunks(MAX_FRAGMENT) {
            match self.write_cipher.as_mut() {
                Some(cipher) => {
                    let mut inner = Vec::with_capacity(chunk.len() + 1);
                    inner.extend_from_slice(chunk);
                    inner.push(content_type);
                    let len = (inner.len() + AEAD_TAG_LEN) as u16;
                    let header = [CT_APPLICATION_DATA, 3, 3, (len >> 8) as u8, len as u8];
                    let sealed = cipher
                        .seal(&header, &inner)
                        .map_err(|e| HandshakeError::Config(e.to_string()))?;
                    self.out.extend_from_slice(&header);
                    self.out.extend_from_slice(&sealed);
                }
                None => {
                    let len = chunk.len() as u16;
                    self.out.extend_from_slice(&[content_type, 3, 3, (len >> 8) as u8, len as u8]);
                    self.out.extend_from_slice(chunk);
                }
            }
        }
        Ok(())
    }

    pub fn write_handshake(&mut self, bytes: &[u8]) -> Result<(), HandshakeError> {
        self.write_record(CT_HANDSHAKE, bytes)
    }

    pub fn flush(&mut self) -> Result<(), HandshakeError> {
        if !self.out.is_empty() {
            // Output that could not be written is dropped so that pending
            // records (such as the peer's alert) can still be read.
            if let Err(e) = self.io.write_all(&self.out).and_then(|_| self.io.flush()) {
                self.out.clear();
                return Err(e.into());
            }
            self.bytes_sent += self.out.len();
            self.out.clear();
        }
        Ok(())
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> Result<(), HandshakeError> {
        self.io.read_exact(buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => HandshakeError::Io("connection closed".into()),
            _ => e.into(),
        })?;
        self.bytes_received += buf.len();
        Ok(())
    }

    /// Next record as (content type, plaintext). Flushes pending output first.
    pub fn read_record(&mut self) -> Result<(u8, Vec<u8>), HandshakeError> {
        self.flush()?;
        loop {
            let mut header = [0u8; 5];
            self.read_exact(&mut header)?;
            let len = u16::from_be_bytes([header[3], header[4]]) as usize;
            if len > MAX_CIPHERTEXT {
                return Err(HandshakeError::Decode(format!("record length {len} too large")));
            }
            let mut body = vec![0u8; len];
            self.read_exact(&mut body)?;
            let outer = header[0];
            if outer == CT_CHANGE_CIPHER_SPEC {
                continue;
            }
            let Some(cipher) = self.read_cipher.as_mut() else {
                return Ok((outer, body));
            };
            if outer != CT_APPLICATION_DATA {
                // A plaintext alert can still arrive if the peer failed before
                // deriving keys.
                if outer == CT_ALERT {
                    return Ok((outer, body));
                }
                return Err(HandshakeError::UnexpectedMessage(format!("plaintext record type {outer}")));
            }
            let mut plain = cipher.open(&header, &body).map_err(|_| HandshakeError::BadRecordMac)?;
            while plain.last() == Some(&0) {
                plain.pop();
            }
            let inner = plain
                .pop()
                .ok_or_else(|| HandshakeError::UnexpectedMessage("record without content type".into()))?;
            return Ok((inner, plain));
        }
    }

    /// Next complete handshake message, framed bytes exactly as received.
    pub fn read_handshake(&mut self) -> Result<Vec<u8>, HandshakeError> {
        loop {
            if let Some(n) = HandshakeMessage::framed_len(&self.hs_buf) {
                if n > MAX_HANDSHAKE_MESSAGE {
                    return Err(HandshakeError::Decode(format!("handshake message of {n} bytes")));
                }
                if self.hs_buf.len() >= n {
                    return Ok(self.hs_buf.drain(..n).collect());
                }
            }
            let (ct, data) = self.read_record()?;
            match ct {
                CT_HANDSHAKE => self.hs_buf.extend_from_slice(&data),
                CT_ALERT => return Err(alert_error(&data)),
                other => {
                    return Err(HandshakeError::UnexpectedMessage(format!(
                        "record type {other} during handshake"
                    )))
                }
            }
        }
    }

    /// Best effort: the connection is being torn down anyway.
    pub fn send_alert(&mut self, description: u8) {
        let level = if description == ALERT_CLOSE_NOTIFY { 1 } else { 2 };
        if self.write_record(CT_ALERT, &[level, description]).is_ok() {
            let _ = self.flush();
        }
    }

    pub fn send_application_data(&mut self, data: &[u8]) -> Result<(), HandshakeError> {
        self.write_record(CT_APPLICATION_DATA, data)?;
        self.flush()
    }

    /// Next application-data payload, or None after close_notify.
    pub fn recv_application_data(&mut self) -> Result<Option<Vec<u8>>, HandshakeError> {
        loop {
            let (ct, data) = self.read_record()?;
            match ct {
                CT_APPLICATION_DATA if data.is_empty() => continue,
                CT_APPLICATION_DATA => return Ok(Some(data)),
                CT_ALERT if data.get(1) == Some(&ALERT_CLOSE_NOTIFY) => return Ok(None),
                CT_ALERT => return Err(alert_error(&data)),
                other => {
                    return Err(HandshakeError::UnexpectedMessage(format!(
                        "record type {other} after handshake"
                    )))
                }
            }
        }
    }
}

fn alert_error(data: &[u8]) -> HandshakeError {
    match data {
        [_, desc] => HandshakeError::PeerAlert(*desc),
        _ => HandshakeError::Decode("malformed alert".into()),
    }
}
