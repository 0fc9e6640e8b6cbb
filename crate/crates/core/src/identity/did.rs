use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One-byte DID Method code as carried in `ssi_parameters` and the DID message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DidMethodId(pub u8);

impl DidMethodId {
    pub const IOTA: DidMethodId = DidMethodId(0);
    pub const BTCR: DidMethodId = DidMethodId(1);
    /// The in-repo ledger.
    pub const DLT: DidMethodId = DidMethodId(2);
    /// A second in-repo ledger instance, used to exercise method mismatches.
    pub const DLX: DidMethodId = DidMethodId(3);

    const KNOWN: [(u8, &'static str); 4] = [(0, "iota"), (1, "btcr"), (2, "dlt"), (3, "dlx")];

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn name(self) -> Option<&'static str> {
        Self::KNOWN.iter().find(|(c, _)| *c == self.0).map(|(_, n)| *n)
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::KNOWN.iter().find(|(_, n)| *n == name).map(|(c, _)| DidMethodId(*c))
    }
}

impl fmt::Display for DidMethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(n) => write!(f, "{n}({})", self.0),
            None => write!(f, "method({})", self.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid DID {input:?}: {reason}")]
pub struct DidParseError {
    pub input: String,
    pub reason: &'static str,
}

/// A decentralized identifier, `did:<method-name>:<method-specific-id>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Did {
    method: String,
    method_specific_id: String,
}

impl Did {
    pub fn new(method: &str, method_specific_id: &str) -> Result<Self, DidParseError> {
        format!("did:{method}:{method_specific_id}").parse()
    }

    pub fn method_name(&self) -> &str {
        &self.method
    }

    pub fn method_specific_id(&self) -> &str {
        &self.method_specific_id
    }

    /// The registered method code, if the method name is known.
    pub fn method_id(&self) -> Option<DidMethodId> {
        DidMethodId::from_name(&self.method)
    }

    /// `did#fragment` URL for a verification method of this DID.
    pub fn with_fragment(&self, fragment: &str) -> String {
        format!("{self}#{fragment}")
    }
}

/// Splits a DID URL into the DID and its optional fragment.
pub fn split_did_url(url: &str) -> Result<(Did, Option<&str>), DidParseError> {
    match url.split_once('#') {
        Some((did, frag)) => Ok((did.parse()?, Some(frag))),
        None => Ok((url.parse()?, None)),
    }
}

impl fmt::Display for Did {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "did:{}:{}", self.method, self.method_specific_id)
    }
}

impl FromStr for Did {
    type Err = DidParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| DidParseError { input: s.to_string(), reason };
        let rest = s.strip_prefix("did:").ok_or_else(|| err("missing did: scheme"))?;
        let (method, msi) = rest.split_once(':').ok_or_else(|| err("missing method name"))?;
        if method.is_empty()
            || !method.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
        {
            return Err(err("method name must be lowercase alphanumeric"));
        }
        if msi.is_empty() {
            return Err(err("empty method-specific id"));
        }
        if !msi
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'-' | b'_' | b':' | b'%'))
        {
            return Err(err("illegal character in method-specific id"));
        }
        Ok(Did { method: method.to_string(), method_specific_id: msi.to_string() })
    }
}

impl Serialize for Did {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Did {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let d: Did = "did:method-name:123456789".parse().unwrap();
        assert_eq!(d.method_name(), "method-name");
        assert_eq!(d.to_string(), "did:method-name:123456789");
        assert_eq!(d.method_id(), None);
        let d: Did = format!("did:dlt:{}", "a".repeat(64)).parse().unwrap();
        assert_eq!(d.to_string().len(), 72);
        assert_eq!(d.method_id(), Some(DidMethodId::DLT));
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "did:", "did:x", "did:x:", "did:X:1", "dod:x:1", "did:x:a b"] {
            assert!(s.parse::<Did>().is_err(), "{s}");
        }
    }

    #[test]
    fn did_url_fragment() {
        let (d, f) = split_did_url("did:method-name:abcdefghi#key-1").unwrap();
        assert_eq!(d.to_string(), "did:method-name:abcdefghi");
        assert_eq!(f, Some("key-1"));
    }

    #[test]
    fn method_codes() {
        assert_eq!(DidMethodId::IOTA.name(), Some("iota"));
        assert_eq!(DidMethodId::BTCR.name(), Some("btcr"));
        assert!(DidMethodId::DLT.code() >= 2);
        assert_eq!(DidMethodId(200).name(), None);
    }
}
