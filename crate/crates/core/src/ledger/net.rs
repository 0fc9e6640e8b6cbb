//! Ledger node service and remote client.
//!
//! Each request opens a fresh TCP connection. In authenticated mode the
//! connection runs an original handshake in which only the node presents a
//! certificate; requests and responses then travel as length-prefixed JSON
//! frames over the protected channel.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LedgerClient, LedgerError, LedgerRecord};
use crate::crypto::{os_rng, Role, SignatureSuite};
use crate::handshake::{run_client, run_server, EndpointConfig, PreferredMode, Session};
use crate::identity::canonical_json;
use crate::pki::X509Identity;

const MAX_FRAME: usize = 1 << 20;
const IO_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum Request {
    Get { id: String },
    Put { record: LedgerRecord },
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Response {
    ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    record: Option<LedgerRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

enum Channel {
    Plain(TcpStream),
    Tls(Box<Session<TcpStream>>, Vec<u8>),
}

fn transport(e: impl std::fmt::Display) -> LedgerError {
    LedgerError::Transport(e.to_string())
}

impl Channel {
    fn write_frame(&mut self, body: &[u8]) -> Result<(), LedgerError> {
        let mut frame = (body.len() as u32).to_be_bytes().to_vec();
        frame.extend_from_slice(body);
        match self {
            Channel::Plain(s) => s.write_all(&frame).map_err(transport),
            Channel::Tls(s, _) => s.send(&frame).map_err(transport),
        }
    }

    fn fill(&mut self, n: usize) -> Result<Option<Vec<u8>>, LedgerError> {
        match self {
            Channel::Plain(s) => {
                let mut buf = vec![0u8; n];
                match s.read_exact(&mut buf) {
                    Ok(()) => Ok(Some(buf)),
                    Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(None),
                    Err(e) => Err(transport(e)),
                }
            }
            Channel::Tls(s, pending) => {
                while pending.len() < n {
                    match s.recv().map_err(transport)? {
                        Some(data) => pending.extend_from_slice(&data),
                        None => return Ok(None),
                    }
                }
                Ok(Some(pending.drain(..n).collect()))
            }
        }
    }

    /// None on a clean close between frames.
    fn read_frame(&mut self) -> Result<Option<Vec<u8>>, LedgerError> {
        let Some(len) = self.fill(4)? else { return Ok(None) };
        let len = u32::from_be_bytes(len.try_into().expect("4 bytes")) as usize;
        if len > MAX_FRAME {
            return Err(LedgerError::Protocol(format!("frame of {len} bytes")));
        }
        self.fill(len)?
            .map(Some)
            .ok_or_else(|| LedgerError::Protocol("connection closed mid-frame".into()))
    }

    fn close(self) {
        if let Channel::Tls(mut s, _) = self {
            s.close();
        }
    }
}

fn connect_tcp(addr: SocketAddr) -> Result<TcpStream, LedgerError> {
    let s = TcpStream::connect_timeout(&addr, IO_TIMEOUT).map_err(transport)?;
    s.set_nodelay(true).map_err(transport)?;
    s.set_read_timeout(Some(IO_TIMEOUT)).map_err(transport)?;
    Ok(s)
}

/// How a resolver reaches the ledger node.
#[derive(Debug, Clone)]
pub enum ChannelMode {
    /// Original handshake; the node's chain must validate to one of these roots.
    Authenticated { trust_anchors: Vec<Vec<u8>> },
    /// Raw frames over TCP. Only for demonstrating the resolution attack.
    PlaintextInsecure,
}

impl ChannelMode {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelMode::Authenticated { .. } => "authenticated",
            ChannelMode::PlaintextInsecure => "insecure",
        }
    }
}

/// Ledger access over the network, one connection per request.
#[derive(Debug, Clone)]
pub struct RemoteLedgerClient {
    addr: SocketAddr,
    mode: ChannelMode,
}

impl RemoteLedgerClient {
    pub fn new(addr: SocketAddr, mode: ChannelMode) -> Self {
        RemoteLedgerClient { addr, mode }
    }

    pub fn resolve_addr(addr: &str, mode: ChannelMode) -> Result<Self, LedgerError> {
        let addr = addr
            .to_socket_addrs()
            .map_err(transport)?
            .next()
            .ok_or_else(|| LedgerError::Transport(format!("{addr}: no address")))?;
        Ok(Self::new(addr, mode))
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn mode(&self) -> &ChannelMode {
        &self.mode
    }

    fn connect(&self) -> Result<Channel, LedgerError> {
        let tcp = connect_tcp(self.addr)?;
        match &self.mode {
            ChannelMode::PlaintextInsecure => Ok(Channel::Plain(tcp)),
            ChannelMode::Authenticated { trust_anchors } => {
                let mut cfg = EndpointConfig::new(Role::Client);
                cfg.preferred_mode = PreferredMode::X509;
                cfg.x509_roots = trust_anchors.clone();
                cfg.signature_algorithms = SignatureSuite::ALL.to_vec();
                let session = run_client(&cfg, tcp, &mut os_rng())
                    .map_err(|e| LedgerError::Channel(e.to_string()))?;
                Ok(Channel::Tls(Box::new(session), Vec::new()))
            }
        }
    }

    fn call(&self, req: &Request) -> Result<Response, LedgerError> {
        let mut ch = self.connect()?;
        ch.write_frame(&canonical_json(req))?;
        let body = ch
            .read_frame()?
            .ok_or_else(|| LedgerError::Protocol("node closed without a response".into()))?;
        ch.close();
        let resp: Response =
            serde_json::from_slice(&body).map_err(|e| LedgerError::Protocol(e.to_string()))?;
        if resp.ok {
            Ok(resp)
        } else {
            Err(LedgerError::from_code(
                resp.code.as_deref().unwrap_or("protocol"),
                resp.detail.unwrap_or_default(),
            ))
        }
    }
}

impl LedgerClient for RemoteLedgerClient {
    fn get(&self, id: &str) -> Result<Option<LedgerRecord>, LedgerError> {
        Ok(self.call(&Request::Get { id: id.to_string() })?.record)
    }

    fn put(&self, record: &LedgerRecord) -> Result<(), LedgerError> {
        self.call(&Request::Put { record: record.clone() }).map(|_| ())
    }
}

/// How the node accepts connections.
#[derive(Debug, Clone)]
pub enum ServerChannel {
    Tls(X509Identity),
    PlaintextInsecure,
}

/// A running ledger node. Stops when dropped.
pub struct LedgerServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl LedgerServer {
    pub fn start(
        bind: &str,
        channel: ServerChannel,
        backend: Arc<dyn LedgerClient>,
    ) -> std::io::Result<Self> {
        let listener = TcpListener::bind(bind)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let channel = Arc::new(channel);
        let accept = thread::spawn(move || {
            for conn in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(tcp) = conn else { continue };
                let backend = backend.clone();
                let channel = channel.clone();
                thread::spawn(move || {
                    if let Err(e) = serve_connection(tcp, &channel, backend.as_ref()) {
                        tracing::warn!(error = %e, "ledger connection dropped");
                    }
                });
            }
        });
        Ok(LedgerServer { addr, stop, accept: Some(accept) })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the server is stopped by another thread or the process exits.
    pub fn wait(mut self) {
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }

    pub fn shutdown(&mut self) {
        if let Some(h) = self.accept.take() {
            self.stop.store(true, Ordering::SeqCst);
            let _ = TcpStream::connect(self.addr);
            let _ = h.join();
        }
    }
}

impl Drop for LedgerServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn serve_connection(
    tcp: TcpStream,
    channel: &ServerChannel,
    backend: &dyn LedgerClient,
) -> Result<(), LedgerError> {
    tcp.set_nodelay(true).map_err(transport)?;
    tcp.set_read_timeout(Some(IO_TIMEOUT)).map_err(transport)?;
    let mut ch = match channel {
        ServerChannel::PlaintextInsecure => Channel::Plain(tcp),
        ServerChannel::Tls(identity) => {
            let mut cfg = EndpointConfig::new(Role::Server);
            cfg.x509 = Some(identity.clone());
            let session = run_server(&cfg, tcp, &mut os_rng()).map_err(|e| LedgerError::Channel(e.to_string()))?;
            Channel::Tls(Box::new(session), Vec::new())
        }
    };
    while let Some(body) = ch.read_frame()? {
        let resp = match serde_json::from_slice::<Request>(&body) {
            Err(e) => failure(&LedgerError::Protocol(e.to_string())),
            Ok(Request::Get { id }) => match backend.get(&id) {
                Ok(record) => Response { ok: true, record, ..Default::default() },
                Err(e) => failure(&e),
            },
            Ok(Request::Put { record }) => match backend.put(&record) {
                Ok(()) => Response { ok: true, ..Default::default() },
                Err(e) => failure(&e),
            },
        };
        ch.write_frame(&canonical_json(&resp))?;
    }
    ch.close();
    Ok(())
}

fn failure(e: &LedgerError) -> Response {
    Response { ok: false, code: Some(e.code().to_string()), detail: Some(e.to_string()), ..Default::default() }
}
