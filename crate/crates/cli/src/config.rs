//! Flat `key = value` endpoint configuration.
//!
//! ```text
//! suite = eddsa                  # signature_algorithms, comma separated
//! x509_chain = server-chain.pem  # leaf first
//! x509_key = server.key
//! x509_roots = ca.pem
//! did = did:iota:...
//! did_key = did.key
//! vc = server-vc.json
//! methods = iota                 # DID methods offered/accepted; defaults to the ledgers
//! ledger.iota = tcp://127.0.0.1:7400   # or file:ledger-iota.log
//! ledger_roots = ledger-ca.pem
//! ledger_insecure_plaintext = false
//! trusted_issuers = issuers/
//! trusted_dids = dids.txt
//! mode = did                     # client: x509 | did | vc | vc-peer-x509
//! client_auth = none             # server: none | mirror | x509 | vc | did
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use ssi_tls::crypto::{Role, SignatureSuite};
use ssi_tls::handshake::{ClientAuthRequest, EndpointConfig, PreferredMode, SsiIdentity};
use ssi_tls::identity::{vc_deserialize, Did, DidMethod, DidMethodId, Resolver, TrustStore};
use ssi_tls::ledger::{ChannelMode, LedgerClient, LedgerStore, RemoteLedgerClient};
use ssi_tls::pki::{certs_from_pem, X509Identity};

use crate::keyfile;

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    base: PathBuf,
}

impl Settings {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Settings { values, base: base.to_path_buf() })
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut s = match path {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Settings::parse(&text, p.parent().unwrap_or(Path::new(".")))?
            }
            None => Settings { values: BTreeMap::new(), base: PathBuf::from(".") },
        };
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| anyhow!("--set expects key=value, got {o}"))?;
            s.values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(s)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| self.resolve(v))
    }

    fn resolve(&self, v: &str) -> PathBuf {
        let p = Path::new(v);
        if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) }
    }

    fn list(&self, key: &str) -> Vec<&str> {
        self.get(key).map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()).unwrap_or_default()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None | Some("false") | Some("no") | Some("0") => Ok(false),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some(v) => bail!("{key}: expected true or false, got {v}"),
        }
    }

    /// `ledger.<method>` entries.
    fn ledgers(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().filter_map(|(k, v)| Some((k.strip_prefix("ledger.")?, v.as_str())))
    }
}

/// Where a DID method's ledger lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LedgerLocation {
    Tcp(String),
    File(PathBuf),
}

impl LedgerLocation {
    pub fn parse(s: &str, base: &Path) -> Result<Self> {
        if let Some(addr) = s.strip_prefix("tcp://") {
            Ok(LedgerLocation::Tcp(addr.to_string()))
        } else if let Some(p) = s.strip_prefix("file:") {
            let p = Path::new(p);
            Ok(LedgerLocation::File(if p.is_absolute() { p.to_path_buf() } else { base.join(p) }))
        } else {
            bail!("ledger location must start with tcp:// or file:, got {s}")
        }
    }
}

pub fn method_id(name: &str) -> Result<DidMethodId> {
    DidMethodId::from_name(name).ok_or_else(|| anyhow!("unknown DID method {name}"))
}

pub fn channel_mode(roots: &[PathBuf], insecure: bool) -> Result<ChannelMode> {
    if insecure {
        return Ok(ChannelMode::PlaintextInsecure);
    }
    if roots.is_empty() {
        bail!("remote ledgers need ledger_roots (or ledger_insecure_plaintext = true)");
    }
    Ok(ChannelMode::Authenticated { trust_anchors: read_certs(roots)? })
}

pub fn open_ledger(id: DidMethodId, loc: &LedgerLocation, mode: impl FnOnce() -> Result<ChannelMode>) -> Result<DidMethod> {
    let client: Arc<dyn LedgerClient> = match loc {
        LedgerLocation::File(p) => Arc::new(
            LedgerStore::open(p, id).with_context(|| format!("opening ledger {}", p.display()))?,
        ),
        LedgerLocation::Tcp(addr) => Arc::new(RemoteLedgerClient::resolve_addr(addr, mode()?)?),
    };
    Ok(DidMethod::new(id, client))
}

pub fn read_certs(paths: &[PathBuf]) -> Result<Vec<Vec<u8>>> {
    let mut out = Vec::new();
    for p in paths {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let certs = certs_from_pem(&text).with_context(|| format!("parsing {}", p.display()))?;
        if certs.is_empty() {
            bail!("{} holds no certificates", p.display());
        }
        out.extend(certs);
    }
    Ok(out)
}

impl Settings {
    pub fn resolver(&self) -> Result<Resolver> {
        let roots: Vec<PathBuf> = self.list("ledger_roots").into_iter().map(|v| self.resolve(v)).collect();
        let insecure = self.flag("ledger_insecure_plaintext")?;
        let mut r = Resolver::new();
        for (name, loc) in self.ledgers() {
            let loc = LedgerLocation::parse(loc, &self.base)?;
            r.add(open_ledger(method_id(name)?, &loc, || channel_mode(&roots, insecure))?);
        }
        Ok(r)
    }

    pub fn endpoint(&self, role: Role) -> Result<EndpointConfig> {
        let mut cfg = EndpointConfig::new(role);
        let suites = self.list("suite");
        if !suites.is_empty() {
            cfg.signature_algorithms = suites
                .iter()
                .map(|s| SignatureSuite::from_label(s).ok_or_else(|| anyhow!("unknown suite {s}")))
                .collect::<Result<_>>()?;
        }
        match (self.path("x509_chain"), self.path("x509_key")) {
            (Some(chain), Some(key)) => {
                cfg.x509 = Some(X509Identity { chain: read_certs(&[chain])?, keys: keyfile::read(&key)? })
            }
            (None, None) => {}
            _ => bail!("x509_chain and x509_key go together"),
        }
        cfg.x509_roots = read_certs(&self.list("x509_roots").into_iter().map(|v| self.resolve(v)).collect::<Vec<_>>())?;
        match (self.get("did"), self.path("did_key")) {
            (Some(did), Some(key)) => {
                let did: Did = did.parse()?;
                let credential = match self.path("vc") {
                    Some(p) => Some(vc_deserialize(&fs::read(&p).with_context(|| format!("reading {}", p.display()))?)?),
                    None => None,
                };
                cfg.ssi = Some(SsiIdentity { did, keys: keyfile::read(&key)?, credential });
            }
            (None, None) if self.get("vc").is_none() => {}
            _ => bail!("did and did_key go together, and vc needs both"),
        }
        cfg.resolver = self.resolver()?;
        let methods = self.list("methods");
        cfg.supported_methods = if methods.is_empty() {
            cfg.resolver.supported_methods()
        } else {
            methods.iter().map(|m| method_id(m)).collect::<Result<_>>()?
        };
        cfg.trust = Arc::new(TrustStore::load(
            self.path("trusted_issuers").as_deref(),
            self.path("trusted_dids").as_deref(),
        )?);
        if let Some(m) = self.get("mode") {
            cfg.preferred_mode = PreferredMode::from_name(m).ok_or_else(|| anyhow!("unknown mode {m}"))?;
        }
        if let Some(a) = self.get("client_auth") {
            cfg.client_auth = client_auth(a)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn client_auth(s: &str) -> Result<ClientAuthRequest> {
    ClientAuthRequest::from_name(s).ok_or_else(|| anyhow!("unknown client_auth {s}"))
}

#[cfg(test)]
mod tests {
    use ssi_tls::messages::AuthnMode;

    use super::*;

    #[test]
    fn parses_flat_files() {
        let s = Settings::parse("# c\nsuite = eddsa, ecdsa\nledger.iota = tcp://127.0.0.1:1\n\nmode=did # trailing\n", Path::new("/etc/x")).unwrap();
        assert_eq!(s.list("suite"), vec!["eddsa", "ecdsa"]);
        assert_eq!(s.get("mode"), Some("did"));
        assert_eq!(s.ledgers().collect::<Vec<_>>(), vec![("iota", "tcp://127.0.0.1:1")]);
        assert!(Settings::parse("novalue\n", Path::new(".")).is_err());
        assert_eq!(
            LedgerLocation::parse("file:l.log", Path::new("/etc/x")).unwrap(),
            LedgerLocation::File("/etc/x/l.log".into())
        );
        assert!(LedgerLocation::parse("l.log", Path::new(".")).is_err());
        assert_eq!(client_auth("did").unwrap(), ClientAuthRequest::Ssi(AuthnMode::Did));
        assert_eq!(client_auth("mirror").unwrap(), ClientAuthRequest::Mirror);
    }
}
