/// Errors from decoding wire structures. Every variant maps to a
/// `decode_error` alert.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("truncated {0}")]
    Truncated(&'static str),
    #[error("{0} has {1} trailing bytes")]
    Trailing(&'static str, usize),
    #[error("unknown handshake type {0}")]
    UnknownType(u8),
    #[error("{what} length {len} outside {min}..={max}")]
    VectorLength { what: &'static str, len: usize, min: usize, max: usize },
    #[error("{what}: length {len} is not a multiple of {unit}")]
    Misaligned { what: &'static str, len: usize, unit: usize },
    #[error("duplicate extension {0}")]
    DuplicateExtension(u16),
    #[error("missing extension {0}")]
    MissingExtension(u16),
    #[error("extension {0} not allowed here")]
    UnexpectedExtension(u16),
    #[error("invalid {0}")]
    Invalid(&'static str),
}

/// Cursor over a byte slice.
#[derive(Debug)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(DecodeError::Truncated(what));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self, what: &'static str) -> Result<u8, DecodeError> {
        Ok(self.take(1, what)?[0])
    }

    pub fn u16(&mut self, what: &'static str) -> Result<u16, DecodeError> {
        let b = self.take(2, what)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    pub fn u24(&mut self, what: &'static str) -> Result<usize, DecodeError> {
        let b = self.take(3, what)?;
        Ok(((b[0] as usize) << 16) | ((b[1] as usize) << 8) | b[2] as usize)
    }

    pub fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], DecodeError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn vec(
        &mut self,
        len: usize,
        what: &'static str,
        min: usize,
        max: usize,
    ) -> Result<&'a [u8], DecodeError> {
        if len < min || len > max {
            return Err(DecodeError::VectorLength { what, len, min, max });
        }
        self.take(len, what)
    }

    /// `opaque x<min..max>` with a one-byte length.
    pub fn vec8(&mut self, what: &'static str, min: usize, max: usize) -> Result<&'a [u8], DecodeError> {
        let len = self.u8(what)? as usize;
        self.vec(len, what, min, max)
    }

    pub fn vec16(&mut self, what: &'static str, min: usize, max: usize) -> Result<&'a [u8], DecodeError> {
        let len = self.u16(what)? as usize;
        self.vec(len, what, min, max)
    }

    pub fn vec24(&mut self, what: &'static str, min: usize, max: usize) -> Result<&'a [u8], DecodeError> {
        let len = self.u24(what)?;
        self.vec(len, what, min, max)
    }

    pub fn finish(&self, what: &'static str) -> Result<(), DecodeError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(DecodeError::Trailing(what, n)),
        }
    }
}

/// Splits a vector of fixed-width `u16` code points.
pub fn u16_list(body: &[u8], what: &'static str) -> Result<Vec<u16>, DecodeError> {
    if body.len() % 2 != 0 {
        return Err(DecodeError::Misaligned { what, len: body.len(), unit: 2 });
    }
    Ok(body.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect())
}

pub fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_be_bytes());
}

pub fn put_u24(out: &mut Vec<u8>, v: usize) {
    assert!(v < 1 << 24, "u24 overflow");
    out.extend_from_slice(&(v as u32).to_be_bytes()[1..]);
}

pub fn put_vec8(out: &mut Vec<u8>, body: &[u8]) {
    out.push(u8::try_from(body.len()).expect("vec8 overflow"));
    out.extend_from_slice(body);
}

pub fn put_vec16(out: &mut Vec<u8>, body: &[u8]) {
    put_u16(out, u16::try_from(body.len()).expect("vec16 overflow"));
    out.extend_from_slice(body);
}

pub fn put_vec24(out: &mut Vec<u8>, body: &[u8]) {
    put_u24(out, body.len());
    out.extend_from_slice(body);
}

pub fn put_u16_list(out: &mut Vec<u8>, items: &[u16]) {
    let mut body = Vec::with_capacity(items.len() * 2);
    for i in items {
        put_u16(&mut body, *i);
    }
    put_vec16(out, &body);
}
