use std::collections::BTreeMap;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_core::{CryptoRngCore, SeedableRng};

use super::model::{Cell, ModelInputs, Stat};
use crate::crypto::{Role, SignatureSuite};
use crate::handshake::{
    duplex, run_client, run_server, ClientAuthRequest, Flow, HandshakeError, PreferredMode,
};
use crate::identity::{DidMethod, DidMethodId, Resolver};
use crate::ledger::{ChannelMode, LedgerServer, LedgerStore, RemoteLedgerClient, ServerChannel};
use crate::messages::AuthnMode;
use crate::pki::issue_chain_with_keys;
use crate::provision::{pooled_key, Fixture, ProvisionError};

/// Client mode, server request and resulting flow for each cell.
pub fn cell_setup(cell: Cell) -> (PreferredMode, ClientAuthRequest, Flow) {
    use ClientAuthRequest as A;
    use PreferredMode as M;
    match cell {
        Cell::X509Uni => (M::X509, A::None, Flow::Original),
        Cell::X509Mut => (M::X509, A::Mirror, Flow::Original),
        Cell::VcUni => (M::Vc, A::None, Flow::SsiVc),
        Cell::VcMut => (M::Vc, A::Mirror, Flow::SsiVc),
        Cell::DidUni => (M::Did, A::None, Flow::SsiDid),
        Cell::DidMut => (M::Did, A::Mirror, Flow::SsiDid),
        Cell::HybridOV => (M::Vc, A::X509, Flow::HybridClientX509),
        Cell::HybridOD => (M::Did, A::X509, Flow::HybridClientX509),
        Cell::HybridVO => (M::VcButPeerX509, A::Ssi(AuthnMode::Vc), Flow::HybridServerX509),
        Cell::HybridDO => (M::VcButPeerX509, A::Ssi(AuthnMode::Did), Flow::HybridServerX509),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("provisioning: {0}")]
    Provision(#[from] ProvisionError),
    #[error("ledger node: {0}")]
    Ledger(String),
    #[error("{cell} / {suite}: run {run} failed: client {client}; server {server}")]
    Run { cell: &'static str, suite: &'static str, run: usize, client: String, server: String },
    #[error("{cell} / {suite}: expected flow {expected}, got {got}")]
    WrongFlow { cell: &'static str, suite: &'static str, expected: &'static str, got: &'static str },
}

/// One measured handshake. Phase timers are summed over both endpoints.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub cell: Cell,
    pub suite: SignatureSuite,
    pub flow: Flow,
    pub run: usize,
    /// Server side, ClientHello received to client Finished verified.
    pub latency_ms: f64,
    pub resolve_ms: f64,
    pub vc_verify_ms: f64,
    pub chain_verify_ms: f64,
    pub sign_ms: f64,
    pub client_bytes: usize,
    pub server_bytes: usize,
    /// Handshake message bytes the server sent.
    pub server_handshake_bytes: usize,
    /// Nominal public-key object bytes of the server's authentication.
    pub server_pk_object_bytes: usize,
    pub client_pk_object_bytes: usize,
}

impl RunRecord {
    pub fn phase_sum_ms(&self) -> f64 {
        self.resolve_ms + self.vc_verify_ms + self.chain_verify_ms + self.sign_ms
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Endpoints for one suite, with DIDs anchored on a ledger node reached over
/// an authenticated TCP channel.
pub struct Testbed {
    pub fixture: Fixture,
    node: LedgerServer,
}

/// The ledger node always presents an ECDSA chain, so resolution cost does
/// not vary with the suite under test.
const NODE_SUITE: SignatureSuite = SignatureSuite::EcdsaSecp256r1Sha256;

impl Testbed {
    pub fn start(suite: SignatureSuite, pool: usize, rng: &mut dyn CryptoRngCore) -> Result<Self, MeasureError> {
        let node_chain = issue_chain_with_keys(
            "ledger.example",
            &pooled_key(NODE_SUITE, 1000),
            &pooled_key(NODE_SUITE, 1001),
            pooled_key(NODE_SUITE, 1002),
            rng,
        )
        .map_err(ProvisionError::from)?;
        let store = Arc::new(LedgerStore::in_memory(DidMethodId::IOTA));
        let node = LedgerServer::start("127.0.0.1:0", ServerChannel::Tls(node_chain.identity), store)
            .map_err(|e| MeasureError::Ledger(e.to_string()))?;
        let remote = RemoteLedgerClient::new(
            node.local_addr(),
            ChannelMode::Authenticated { trust_anchors: vec![node_chain.root] },
        );
        let resolver = Resolver::new().with(DidMethod::new(DidMethodId::IOTA, Arc::new(remote)));
        let fixture = Fixture::with_resolver(suite, resolver, pool, rng)?;
        Ok(Testbed { fixture, node })
    }

    pub fn ledger_addr(&self) -> std::net::SocketAddr {
        self.node.local_addr()
    }

    /// One handshake for `cell` between randomly chosen pool members.
    pub fn run_once(&self, cell: Cell, run: usize, rng: &mut ChaCha20Rng) -> Result<RunRecord, MeasureError> {
        let f = &self.fixture;
        let (mode, auth, flow) = cell_setup(cell);
        let client_cfg = f.client_config_as(rng.gen_range(0..f.clients.len()), mode);
        let server_cfg = f.server_config_as(rng.gen_range(0..f.servers.len()), auth);
        let server_seed: u64 = rng.gen();
        let (a, b) = duplex();
        let server = thread::spawn(move || {
            let mut rng = ChaCha20Rng::seed_from_u64(server_seed);
            run_server(&server_cfg, b, &mut rng).map(|s| (s.bytes_sent(), s.outcome))
        });
        let client = run_client(&client_cfg, a, rng).map(|s| (s.bytes_sent(), s.outcome));
        let server = server.join().unwrap_or_else(|_| Err(HandshakeError::Config("server panicked".into())));
        let ((cb, c), (sb, s)) = match (client, server) {
            (Ok(c), Ok(s)) => (c, s),
            (c, s) => {
                let show = |r: Result<_, HandshakeError>| r.map(|_| "ok".to_string()).unwrap_or_else(|e| e.to_string());
                return Err(MeasureError::Run {
                    cell: cell.name(),
                    suite: f.suite.label(),
                    run,
                    client: show(c),
                    server: show(s),
                });
            }
        };
        if s.flow != flow || c.flow != flow {
            return Err(MeasureError::WrongFlow {
                cell: cell.name(),
                suite: f.suite.label(),
                expected: flow.name(),
                got: s.flow.name(),
            });
        }
        let mut timers = c.timers;
        timers += s.timers;
        let server_acc = s.accounting(Role::Server);
        Ok(RunRecord {
            cell,
            suite: f.suite,
            flow,
            run,
            latency_ms: ms(s.timers.total),
            resolve_ms: ms(timers.resolve),
            vc_verify_ms: ms(timers.vc_verify),
            chain_verify_ms: ms(timers.chain_verify),
            sign_ms: ms(timers.sign),
            client_bytes: cb,
            server_bytes: sb,
            server_handshake_bytes: server_acc.total_bytes,
            server_pk_object_bytes: server_acc.pk_object_bytes,
            client_pk_object_bytes: s.accounting(Role::Client).pk_object_bytes,
        })
    }
}

#[derive(Debug, Clone)]
pub struct MeasureConfig {
    pub cells: Vec<Cell>,
    pub suites: Vec<SignatureSuite>,
    pub runs: usize,
    /// Leading runs per cell that are discarded.
    pub warmup: usize,
    /// Parties per role to draw from at random.
    pub pool: usize,
    pub seed: u64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            cells: Cell::ALL.to_vec(),
            suites: SignatureSuite::ALL.to_vec(),
            runs: 200,
            warmup: 5,
            pool: 4,
            seed: 7,
        }
    }
}

/// Both readings of the VC verification input.
#[derive(Debug, Clone, Copy)]
pub struct SuiteInputs {
    /// T_V excludes resolution; this is what the estimates use.
    pub inputs: ModelInputs,
    /// VC verification with resolution folded in.
    pub t_v_with_resolution: Stat,
}

#[derive(Debug, Clone, Default)]
pub struct Measurement {
    pub records: Vec<RunRecord>,
    pub inputs: BTreeMap<SignatureSuite, SuiteInputs>,
}

impl Measurement {
    pub fn cell_records(&self, suite: SignatureSuite, cell: Cell) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.suite == suite && r.cell == cell)
    }

    pub fn latency(&self, suite: SignatureSuite, cell: Cell) -> Stat {
        let xs: Vec<f64> = self.cell_records(suite, cell).map(|r| r.latency_ms).collect();
        Stat::from_samples(&xs)
    }

    fn phase(&self, suite: SignatureSuite, cell: Cell, f: impl Fn(&RunRecord) -> f64) -> Stat {
        let xs: Vec<f64> = self.cell_records(suite, cell).map(f).collect();
        Stat::from_samples(&xs)
    }

    /// Model inputs for `suite`, if the X.509, VC and DID unilateral cells
    /// and the X.509 mutual cell were measured.
    pub fn derive_inputs(&self, suite: SignatureSuite) -> Option<SuiteInputs> {
        let need = [Cell::X509Uni, Cell::X509Mut, Cell::VcUni, Cell::DidUni];
        if need.iter().any(|c| self.cell_records(suite, *c).next().is_none()) {
            return None;
        }
        let inputs = ModelInputs {
            t_c: self.phase(suite, Cell::X509Uni, |r| r.chain_verify_ms),
            t_v: self.phase(suite, Cell::VcUni, |r| r.vc_verify_ms),
            t_d: self.phase(suite, Cell::DidUni, |r| r.resolve_ms),
            h_o_uni: self.latency(suite, Cell::X509Uni),
            h_o_mut: self.latency(suite, Cell::X509Mut),
        };
        let t_v_with_resolution = self.phase(suite, Cell::VcUni, |r| r.vc_verify_ms + r.resolve_ms);
        Some(SuiteInputs { inputs, t_v_with_resolution })
    }
}

/// Runs every (suite × cell) combination sequentially, `warmup + runs`
/// handshakes each. Within a suite the cells take turns run by run, so slow
/// drift in the host's timing affects all cells alike. `progress` is called
/// once per suite.
pub fn measure(
    cfg: &MeasureConfig,
    mut progress: impl FnMut(SignatureSuite, &Measurement),
) -> Result<Measurement, MeasureError> {
    let mut out = Measurement::default();
    for &suite in &cfg.suites {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ suite.scheme() as u64);
        let bed = Testbed::start(suite, cfg.pool, &mut rng)?;
        for i in 0..cfg.warmup {
            for &cell in &cfg.cells {
                bed.run_once(cell, i, &mut rng)?;
            }
        }
        for run in 0..cfg.runs {
            for &cell in &cfg.cells {
                out.records.push(bed.run_once(cell, run, &mut rng)?);
            }
        }
        if let Some(i) = out.derive_inputs(suite) {
            out.inputs.insert(suite, i);
        }
        progress(suite, &out);
    }
    Ok(out)
}
