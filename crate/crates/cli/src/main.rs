mod config;
mod exit;
mod keyfile;

use std::fs;
use std::io::Write as _;
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use chrono::{Duration, Utc};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use ssi_tls::crypto::{os_rng, KeyPair, Role, SignatureSuite};
use ssi_tls::handshake::{alert_name, run_client, run_server, Flow, HandshakeError, HandshakeOutcome, SsiIdentity};
use ssi_tls::identity::{
    issuer_key_to_pem, vc_deserialize, vc_issue, vc_serialize, vc_verify, CredentialRequest, Did, DidMethod,
    DidMethodId, Resolution, TrustStore,
};
use ssi_tls::ledger::{
    mitm_resolution_attack, AttackPosition, LedgerClient, LedgerDeployment, LedgerServer, LedgerStore, ServerChannel,
};
use ssi_tls::perfmodel::{markdown, measure, overlay_csv, runs_csv, validate, Cell, MeasureConfig, FIDELITY_TOLERANCE};
use ssi_tls::pki::{cert_to_pem, issue_chain, X509Identity};

use config::{channel_mode, method_id, open_ledger, read_certs, LedgerLocation, Settings};

#[derive(Parser)]
#[command(name = "ssitls", version, about = "TLS 1.3 with DID and verifiable-credential authentication")]
struct Cli {
    /// Log filter, e.g. `info` or `ssi_tls=debug`.
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accept handshakes and echo application data back.
    Server(ServerArgs),
    /// Connect, send one message and print the reply.
    Client(ClientArgs),
    #[command(subcommand)]
    Identity(IdentityCmd),
    #[command(subcommand)]
    Ledger(LedgerCmd),
    #[command(subcommand)]
    Pki(PkiCmd),
    /// Measure handshake latency and check it against the latency model.
    Bench(BenchArgs),
}

#[derive(Args)]
struct EndpointArgs {
    /// Flat key = value configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ServerArgs {
    #[command(flatten)]
    endpoint: EndpointArgs,
    #[arg(long, default_value = "127.0.0.1:4433")]
    listen: String,
    /// Exit after this many connections.
    #[arg(long)]
    max_connections: Option<usize>,
}

#[derive(Args)]
struct ClientArgs {
    #[command(flatten)]
    endpoint: EndpointArgs,
    #[arg(long, default_value = "127.0.0.1:4433")]
    connect: String,
    #[arg(long, default_value = "hello")]
    message: String,
    /// Fail with exit code 3 unless the handshake takes this flow.
    #[arg(long)]
    expect_flow: Option<String>,
    /// Print the negotiated flow, peer identity and byte counts.
    #[arg(long)]
    print_outcome: bool,
}

#[derive(Args)]
struct LedgerArgs {
    /// `<method>=file:<path>` or `<method>=tcp://<addr>`.
    #[arg(long, value_name = "METHOD=LOCATION")]
    ledger: String,
    /// CA certificate(s) for a remote ledger node.
    #[arg(long)]
    ledger_root: Vec<PathBuf>,
    /// Talk to a remote ledger without TLS. Resolution can then be forged by
    /// anyone on the path.
    #[arg(long)]
    insecure_plaintext: bool,
}

impl LedgerArgs {
    fn open(&self) -> Result<DidMethod> {
        let (name, loc) = self.ledger.split_once('=').ok_or_else(|| anyhow!("--ledger expects METHOD=LOCATION"))?;
        let loc = LedgerLocation::parse(loc, Path::new("."))?;
        open_ledger(method_id(name)?, &loc, || channel_mode(&self.ledger_root, self.insecure_plaintext))
    }
}

#[derive(Subcommand)]
enum IdentityCmd {
    /// Anchor a new DID; writes its controlling key.
    DidCreate {
        #[command(flatten)]
        ledger: LedgerArgs,
        #[arg(long, default_value = "eddsa")]
        suite: String,
        /// Use this key instead of generating one.
        #[arg(long, conflicts_with = "key_out")]
        key: Option<PathBuf>,
        #[arg(long, required_unless_present = "key")]
        key_out: Option<PathBuf>,
    },
    DidResolve {
        #[command(flatten)]
        ledger: LedgerArgs,
        did: String,
    },
    /// Rotate the DID's key.
    DidUpdate {
        #[command(flatten)]
        ledger: LedgerArgs,
        did: String,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        new_key_out: PathBuf,
        #[arg(long)]
        suite: Option<String>,
    },
    DidDeactivate {
        #[command(flatten)]
        ledger: LedgerArgs,
        did: String,
        #[arg(long)]
        key: PathBuf,
    },
    /// Issue a credential about `subject`, signed by the issuer key.
    VcIssue {
        #[arg(long)]
        issuer: String,
        #[arg(long)]
        issuer_key: PathBuf,
        #[arg(long)]
        subject: String,
        #[arg(long, default_value_t = 365)]
        days: i64,
        /// Extra credentialSubject claims as key=value.
        #[arg(long)]
        claim: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the issuer's public key file for relying parties.
        #[arg(long)]
        issuer_pem_out: Option<PathBuf>,
    },
    VcVerify {
        vc: PathBuf,
        /// Directory of issuer public key files.
        #[arg(long)]
        trusted_issuers: PathBuf,
    },
}

#[derive(Subcommand)]
enum LedgerCmd {
    /// Run a ledger node for one DID method.
    Serve {
        #[arg(long)]
        method: String,
        /// Append-only log file.
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7400")]
        bind: String,
        #[arg(long, required_unless_present = "insecure_plaintext")]
        cert_chain: Option<PathBuf>,
        #[arg(long, required_unless_present = "insecure_plaintext")]
        key: Option<PathBuf>,
        #[arg(long)]
        insecure_plaintext: bool,
    },
    /// Show what an on-path attacker achieves against resolution with and
    /// without an authenticated ledger channel.
    AttackDemo {
        #[arg(long, default_value = "eddsa")]
        suite: String,
        #[arg(long, default_value_t = 5)]
        trials: u32,
    },
}

#[derive(Subcommand)]
enum PkiCmd {
    /// Issue a root, intermediate and leaf certificate.
    Issue {
        #[arg(long, default_value = "eddsa")]
        suite: String,
        #[arg(long)]
        subject: String,
        /// Writes root.pem, chain.pem and leaf.key here.
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Cells to measure, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    flows: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    suites: Vec<String>,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 5)]
    warmup: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Directory for runs.csv, report.md and per-cell overlay CSVs.
    #[arg(long)]
    out: PathBuf,
}

fn suite(label: &str) -> Result<SignatureSuite> {
    SignatureSuite::from_label(label).ok_or_else(|| anyhow!("unknown suite {label}"))
}

fn describe(o: &HandshakeOutcome) -> String {
    format!("flow={} mutual={} peer={}", o.flow.name(), o.mutual, o.peer.describe())
}

fn print_outcome(o: &HandshakeOutcome) {
    let acc = o.accounting(o.role);
    println!("flow: {}", o.flow.name());
    println!("mutual: {}", o.mutual);
    println!("peer: {}", o.peer.describe());
    println!("handshake_bytes_sent: {}", acc.total_bytes);
    println!("pk_object_bytes_sent: {}", acc.pk_object_bytes);
    println!("handshake_ms: {:.3}", o.timers.total.as_secs_f64() * 1e3);
}

fn handshake_failure(e: &HandshakeError) -> u8 {
    let alert = e.alert_code().map(|c| format!(" alert={}({c})", alert_name(c))).unwrap_or_default();
    eprintln!("handshake failed: class={}{alert}: {e}", e.class());
    exit::for_error(e)
}

fn cmd_server(a: ServerArgs) -> Result<u8> {
    let cfg = Settings::load(a.endpoint.config.as_deref(), &a.endpoint.set)?.endpoint(Role::Server)?;
    let listener = TcpListener::bind(&a.listen).with_context(|| format!("binding {}", a.listen))?;
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;
    let mut last = exit::OK;
    for (n, conn) in listener.incoming().enumerate() {
        let tcp = conn?;
        let peer = tcp.peer_addr().map(|a| a.to_string()).unwrap_or_default();
        match run_server(&cfg, tcp, &mut os_rng()) {
            Ok(mut s) => {
                println!("{peer}: accepted {}", describe(&s.outcome));
                last = exit::OK;
                loop {
                    match s.recv() {
                        Ok(Some(data)) => {
                            if let Err(e) = s.send(&data) {
                                eprintln!("{peer}: {e}");
                                break;
                            }
                        }
                        Ok(None) => break,
                        Err(e) => {
                            eprintln!("{peer}: {e}");
                            break;
                        }
                    }
                }
                s.close();
            }
            Err(e) => {
                println!("{peer}: rejected class={}", e.class());
                last = handshake_failure(&e);
            }
        }
        std::io::stdout().flush()?;
        if a.max_connections.is_some_and(|m| n + 1 >= m) {
            break;
        }
    }
    Ok(last)
}

fn cmd_client(a: ClientArgs) -> Result<u8> {
    let cfg = Settings::load(a.endpoint.config.as_deref(), &a.endpoint.set)?.endpoint(Role::Client)?;
    let expected = match &a.expect_flow {
        Some(f) => Some(Flow::from_name(f).ok_or_else(|| anyhow!("unknown flow {f}"))?),
        None => None,
    };
    let tcp = TcpStream::connect(&a.connect).with_context(|| format!("connecting to {}", a.connect))?;
    let mut s = match run_client(&cfg, tcp, &mut os_rng()) {
        Ok(s) => s,
        Err(e) => return Ok(handshake_failure(&e)),
    };
    if a.print_outcome {
        print_outcome(&s.outcome);
    }
    let io = s.send(a.message.as_bytes()).and_then(|_| s.recv());
    match io {
        Ok(Some(reply)) => println!("reply: {}", String::from_utf8_lossy(&reply)),
        Ok(None) => println!("reply: <closed>"),
        Err(e) => return Ok(handshake_failure(&e)),
    }
    s.close();
    if let Some(want) = expected {
        if s.outcome.flow != want {
            eprintln!("expected flow {}, got {}", want.name(), s.outcome.flow.name());
            return Ok(exit::FLOW_MISMATCH);
        }
    }
    Ok(exit::OK)
}

fn parse_did(s: &str) -> Result<Did> {
    s.parse().map_err(|e| anyhow!("{s}: {e}"))
}

fn cmd_identity(c: IdentityCmd) -> Result<u8> {
    let mut rng = os_rng();
    match c {
        IdentityCmd::DidCreate { ledger, suite: s, key, key_out } => {
            let method = ledger.open()?;
            let keys = match &key {
                Some(p) => keyfile::read(p)?,
                None => KeyPair::generate(suite(&s)?, &mut rng),
            };
            let did = method.did_create_with_keys(&keys, &mut rng)?;
            if let Some(p) = key_out {
                keyfile::write(&p, &keys)?;
            }
            println!("{did}");
        }
        IdentityCmd::DidResolve { ledger, did } => match ledger.open()?.did_resolve(&parse_did(&did)?)? {
            Resolution::Document(doc) => println!("{}", String::from_utf8_lossy(&doc.to_canonical_json())),
            Resolution::Revoked => {
                println!("revoked");
                return Ok(exit::CLASSES.iter().find(|c| c.0 == "revoked_identity").map_or(1, |c| c.1));
            }
        },
        IdentityCmd::DidUpdate { ledger, did, key, new_key_out, suite: s } => {
            let current = keyfile::read(&key)?;
            let new_keys = KeyPair::generate(s.as_deref().map(suite).transpose()?.unwrap_or(current.suite()), &mut rng);
            ledger.open()?.did_update(&parse_did(&did)?, &current, &new_keys, &mut rng)?;
            keyfile::write(&new_key_out, &new_keys)?;
            println!("{did}");
        }
        IdentityCmd::DidDeactivate { ledger, did, key } => {
            ledger.open()?.did_deactivate(&parse_did(&did)?, &keyfile::read(&key)?, &mut rng)?;
            println!("deactivated {did}");
        }
        IdentityCmd::VcIssue { issuer, issuer_key, subject, days, claim, out, issuer_pem_out } => {
            let issuer = parse_did(&issuer)?;
            let keys = keyfile::read(&issuer_key)?;
            let now = Utc::now();
            let mut req = CredentialRequest::new(parse_did(&subject)?, now, now + Duration::days(days));
            for c in &claim {
                let (k, v) = c.split_once('=').ok_or_else(|| anyhow!("--claim expects key=value"))?;
                req = req.with_claim(k, v);
            }
            let vc = vc_issue(&keys, &issuer, req, &mut rng)?;
            fs::write(&out, vc_serialize(&vc)).with_context(|| format!("writing {}", out.display()))?;
            if let Some(p) = issuer_pem_out {
                fs::write(&p, issuer_key_to_pem(&issuer, keys.suite(), keys.public_key()))?;
            }
            println!("issued {} for {subject}", out.display());
        }
        IdentityCmd::VcVerify { vc, trusted_issuers } => {
            let vc = vc_deserialize(&fs::read(&vc).with_context(|| format!("reading {}", vc.display()))?)?;
            let trust = TrustStore::load(Some(&trusted_issuers), None)?;
            match vc_verify(&vc, &trust, Utc::now()) {
                Ok(subject) => println!("valid: subject {subject}, issuer {}", vc.issuer),
                Err(e) => {
                    println!("invalid: {} ({e})", e.code());
                    return Ok(exit::CLASSES.iter().find(|c| c.0 == "bad_identity").map_or(1, |c| c.1));
                }
            }
        }
    }
    Ok(exit::OK)
}

fn cmd_ledger(c: LedgerCmd) -> Result<u8> {
    match c {
        LedgerCmd::Serve { method, store, bind, cert_chain, key, insecure_plaintext } => {
            let id = method_id(&method)?;
            let backend: Arc<dyn LedgerClient> = Arc::new(LedgerStore::open(&store, id)?);
            let channel = match (insecure_plaintext, cert_chain, key) {
                (true, _, _) => ServerChannel::PlaintextInsecure,
                (false, Some(chain), Some(key)) => {
                    ServerChannel::Tls(X509Identity { chain: read_certs(&[chain])?, keys: keyfile::read(&key)? })
                }
                _ => bail!("--cert-chain and --key are required unless --insecure-plaintext"),
            };
            let server = LedgerServer::start(&bind, channel, backend)?;
            println!("ledger {method} listening on {}", server.local_addr());
            std::io::stdout().flush()?;
            server.wait();
        }
        LedgerCmd::AttackDemo { suite: s, trials } => return attack_demo(suite(&s)?, trials),
    }
    Ok(exit::OK)
}

fn attack_demo(suite: SignatureSuite, trials: u32) -> Result<u8> {
    let mut rng = ChaCha20Rng::from_rng(os_rng())?;
    let node_suite = SignatureSuite::EcdsaSecp256r1Sha256;
    let node = issue_chain(node_suite, "ledger.example", &mut rng)?;
    let impostor = issue_chain(node_suite, "ledger.example", &mut rng)?.identity;
    let ledger = LedgerDeployment {
        method: DidMethodId::IOTA,
        store: Arc::new(LedgerStore::in_memory(DidMethodId::IOTA)),
        node,
    };
    let method = DidMethod::new(ledger.method, ledger.store.clone());
    let (victim, _) = method.did_create(suite, &mut rng)?;
    let (did, keys) = method.did_create(suite, &mut rng)?;
    let relying = SsiIdentity { did, keys, credential: None };
    println!("victim {victim}");
    let mut ok = true;
    for (label, plaintext, position) in [
        ("no attacker, authenticated ledger channel", false, AttackPosition::Baseline),
        ("on-path attacker, plaintext ledger channel", true, AttackPosition::OnPath),
        ("on-path attacker, authenticated ledger channel", false, AttackPosition::OnPath),
    ] {
        let mut impersonated = 0;
        let mut last = String::new();
        for _ in 0..trials {
            let attacker = KeyPair::generate(suite, &mut rng);
            let o = mitm_resolution_attack(&attacker, &victim, &relying, &ledger, plaintext, position, &impostor, &mut rng)?;
            impersonated += o.impersonated as u32;
            last = match &o.relying {
                Ok(()) => "handshake accepted".into(),
                Err(e) => format!("aborted with {}", e.class()),
            };
        }
        println!("{label}: impersonated {impersonated}/{trials}; last trial {last}");
        ok &= (impersonated == trials) == plaintext;
    }
    Ok(if ok { exit::OK } else { exit::FAILURE })
}

fn cmd_pki(c: PkiCmd) -> Result<u8> {
    let PkiCmd::Issue { suite: s, subject, out_dir } = c;
    let chain = issue_chain(suite(&s)?, &subject, &mut os_rng())?;
    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("root.pem"), cert_to_pem(&chain.root))?;
    let pem: String = chain.identity.chain.iter().map(|c| cert_to_pem(c)).collect();
    fs::write(out_dir.join("chain.pem"), pem)?;
    keyfile::write(&out_dir.join("leaf.key"), &chain.identity.keys)?;
    println!("wrote root.pem, chain.pem and leaf.key to {}", out_dir.display());
    Ok(exit::OK)
}

fn cmd_bench(a: BenchArgs) -> Result<u8> {
    let mut cfg = MeasureConfig { runs: a.runs, warmup: a.warmup, seed: a.seed, ..Default::default() };
    if !a.flows.is_empty() {
        cfg.cells = a.flows.iter().map(|f| Cell::from_name(f).ok_or_else(|| anyhow!("unknown flow {f}"))).collect::<Result<_>>()?;
    }
    if !a.suites.is_empty() {
        cfg.suites = a.suites.iter().map(|s| suite(s)).collect::<Result<_>>()?;
    }
    let m = measure(&cfg, |s, _| eprintln!("measured {}", s.label()))?;
    let report = validate(&m, FIDELITY_TOLERANCE);
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("runs.csv"), runs_csv(&m.records))?;
    for &s in &cfg.suites {
        for &cell in &cfg.cells {
            if let Some(csv) = overlay_csv(&m, s, cell) {
                fs::write(a.out.join(format!("overlay-{}-{}.csv", s.label(), cell.name())), csv)?;
            }
        }
    }
    let md = markdown(&m, &report);
    fs::write(a.out.join("report.md"), &md)?;
    println!("{md}");
    Ok(if report.passed() { exit::OK } else { exit::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::new(&cli.log))
        .with_writer(std::io::stderr)
        .init();
    let result = match cli.cmd {
        Command::Server(a) => cmd_server(a),
        Command::Client(a) => cmd_client(a),
        Command::Identity(c) => cmd_identity(c),
        Command::Ledger(c) => cmd_ledger(c),
        Command::Pki(c) => cmd_pki(c),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::FAILURE)
        }
    }
}
