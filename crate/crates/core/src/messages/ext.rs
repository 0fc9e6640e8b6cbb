use std::fmt;

use super::codec::{put_u16, put_u16_list, put_vec16, put_vec8, u16_list, DecodeError, Reader};
use crate::crypto::SignatureSuite;
use crate::identity::DidMethodId;

pub const EXT_SUPPORTED_GROUPS: u16 = 10;
pub const EXT_SIGNATURE_ALGORITHMS: u16 = 13;
pub const EXT_SUPPORTED_VERSIONS: u16 = 43;
pub const EXT_KEY_SHARE: u16 = 51;
/// Private-use code point; no IANA assignment exists for this extension.
pub const EXT_SSI_PARAMETERS: u16 = 65282;

pub const TLS13_VERSION: u16 = 0x0304;
pub const GROUP_X25519: u16 = 0x001d;

pub fn extension_name(typ: u16) -> Option<&'static str> {
    Some(match typ {
        EXT_SUPPORTED_GROUPS => "supported_groups",
        EXT_SIGNATURE_ALGORITHMS => "signature_algorithms",
        EXT_SUPPORTED_VERSIONS => "supported_versions",
        EXT_KEY_SHARE => "key_share",
        EXT_SSI_PARAMETERS => "ssi_parameters",
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Extension {
    pub typ: u16,
    pub data: Vec<u8>,
}

impl Extension {
    pub fn new(typ: u16, data: Vec<u8>) -> Self {
        Extension { typ, data }
    }
}

/// An extension block in wire order. Unknown types are kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Extensions(pub Vec<Extension>);

impl Extensions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, typ: u16, data: Vec<u8>) {
        assert!(self.get(typ).is_none(), "duplicate extension {typ}");
        self.0.push(Extension::new(typ, data));
    }

    pub fn with(mut self, typ: u16, data: Vec<u8>) -> Self {
        self.push(typ, data);
        self
    }

    pub fn get(&self, typ: u16) -> Option<&[u8]> {
        self.0.iter().find(|e| e.typ == typ).map(|e| e.data.as_slice())
    }

    pub fn types(&self) -> impl Iterator<Item = u16> + '_ {
        self.0.iter().map(|e| e.typ)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        let mut body = Vec::new();
        for e in &self.0 {
            put_u16(&mut body, e.typ);
            put_vec16(&mut body, &e.data);
        }
        put_vec16(out, &body);
    }

    pub fn decode(r: &mut Reader<'_>, min: usize) -> Result<Self, DecodeError> {
        let block = r.vec16("extensions", min, 0xffff)?;
        let mut r = Reader::new(block);
        let mut out = Extensions::new();
        while r.remaining() > 0 {
            let typ = r.u16("extension type")?;
            let data = r.vec16("extension data", 0, 0xffff)?;
            if out.get(typ).is_some() {
                return Err(DecodeError::DuplicateExtension(typ));
            }
            out.0.push(Extension::new(typ, data.to_vec()));
        }
        Ok(out)
    }

    pub fn ssi_parameters(&self) -> Result<Option<SsiParameters>, DecodeError> {
        self.get(EXT_SSI_PARAMETERS).map(SsiParameters::decode).transpose()
    }

    pub fn signature_algorithms(&self) -> Result<Option<Vec<u16>>, DecodeError> {
        self.get(EXT_SIGNATURE_ALGORITHMS)
            .map(|d| {
                let mut r = Reader::new(d);
                let list = r.vec16("signature_algorithms", 2, 0xfffe)?;
                r.finish("signature_algorithms")?;
                u16_list(list, "signature_algorithms")
            })
            .transpose()
    }
}

/// `AuthenticationMode` of the `ssi_parameters` extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuthnMode {
    /// Zero byte, paired with an empty method list: the hybrid signal where
    /// the client holds a VC but asks the server for X.509.
    Unspecified,
    Did,
    Vc,
}

impl AuthnMode {
    pub fn code(self) -> u8 {
        match self {
            AuthnMode::Unspecified => 0,
            AuthnMode::Did => 1,
            AuthnMode::Vc => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(AuthnMode::Unspecified),
            1 => Some(AuthnMode::Did),
            2 => Some(AuthnMode::Vc),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AuthnMode::Unspecified => "unspecified",
            AuthnMode::Did => "DID",
            AuthnMode::Vc => "VC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SsiParameters {
    pub authn: AuthnMode,
    pub did_methods: Vec<DidMethodId>,
}

impl SsiParameters {
    pub fn new(authn: AuthnMode, did_methods: Vec<DidMethodId>) -> Self {
        SsiParameters { authn, did_methods }
    }

    pub fn hybrid_x509_request() -> Self {
        SsiParameters { authn: AuthnMode::Unspecified, did_methods: Vec::new() }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.authn.code()];
        let methods: Vec<u8> = self.did_methods.iter().map(|m| m.code()).collect();
        put_vec8(&mut out, &methods);
        out
    }

    /// The method list may be empty, but only together with an
    /// unspecified mode, and vice versa.
    pub fn decode(data: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(data);
        let authn = AuthnMode::from_code(r.u8("ssi_parameters.authn")?)
            .ok_or(DecodeError::Invalid("authentication mode"))?;
        let methods = r.vec8("ssi_parameters.did_methods", 0, 255)?;
        r.finish("ssi_parameters")?;
        if (authn == AuthnMode::Unspecified) != methods.is_empty() {
            return Err(DecodeError::Invalid("ssi_parameters mode/method-list pairing"));
        }
        Ok(SsiParameters { authn, did_methods: methods.iter().map(|&c| DidMethodId(c)).collect() })
    }
}

impl fmt::Display for SsiParameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "authn={} methods=[", self.authn.name())?;
        for (i, m) in self.did_methods.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("]")
    }
}

pub fn encode_signature_algorithms(suites: &[SignatureSuite]) -> Vec<u8> {
    let codes: Vec<u16> = suites.iter().map(|s| s.scheme()).collect();
    let mut out = Vec::new();
    put_u16_list(&mut out, &codes);
    out
}

pub fn encode_supported_groups(groups: &[u16]) -> Vec<u8> {
    let mut out = Vec::new();
    put_u16_list(&mut out, groups);
    out
}

pub fn encode_supported_versions_client(versions: &[u16]) -> Vec<u8> {
    let mut body = Vec::new();
    for v in versions {
        put_u16(&mut body, *v);
    }
    let mut out = Vec::new();
    put_vec8(&mut out, &body);
    out
}

pub fn decode_supported_versions_client(data: &[u8]) -> Result<Vec<u16>, DecodeError> {
    let mut r = Reader::new(data);
    let list = r.vec8("supported_versions", 2, 254)?;
    r.finish("supported_versions")?;
    u16_list(list, "supported_versions")
}

pub fn decode_supported_versions_server(data: &[u8]) -> Result<u16, DecodeError> {
    let mut r = Reader::new(data);
    let v = r.u16("supported_versions")?;
    r.finish("supported_versions")?;
    Ok(v)
}

pub fn encode_key_share_client(entries: &[(u16, Vec<u8>)]) -> Vec<u8> {
    let mut body = Vec::new();
    for (g, k) in entries {
        put_u16(&mut body, *g);
        put_vec16(&mut body, k);
    }
    let mut out = Vec::new();
    put_vec16(&mut out, &body);
    out
}

pub fn decode_key_share_client(data: &[u8]) -> Result<Vec<(u16, Vec<u8>)>, DecodeError> {
    let mut r = Reader::new(data);
    let list = r.vec16("key_share", 0, 0xffff)?;
    r.finish("key_share")?;
    let mut r = Reader::new(list);
    let mut out = Vec::new();
    while r.remaining() > 0 {
        let g = r.u16("key_share.group")?;
        let k = r.vec16("key_share.key_exchange", 1, 0xffff)?;
        out.push((g, k.to_vec()));
    }
    Ok(out)
}

pub fn encode_key_share_server(group: u16, key: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    put_u16(&mut out, group);
    put_vec16(&mut out, key);
    out
}

pub fn decode_key_share_server(data: &[u8]) -> Result<(u16, Vec<u8>), DecodeError> {
    let mut r = Reader::new(data);
    let g = r.u16("key_share.group")?;
    let k = r.vec16("key_share.key_exchange", 1, 0xffff)?;
    r.finish("key_share")?;
    Ok((g, k.to_vec()))
}
