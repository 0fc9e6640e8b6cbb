//! One pass/fail line per acceptance criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use ssi_tls::crypto::{Role, SignatureSuite};
use ssi_tls::exec;
use ssi_tls::handshake::{alert_name, HandshakeError, HandshakeOutcome, PreferredMode, ClientAuthRequest};
use ssi_tls::identity::{DidMethod, DidMethodId};
use ssi_tls::ledger::{mitm_resolution_attack, AttackPosition, LedgerDeployment, LedgerStore};
use ssi_tls::messages::HandshakeMessage;
use ssi_tls::perfmodel::{measure, validate, Cell, MeasureConfig, Measurement, Report, FIDELITY_TOLERANCE};
use ssi_tls::pki::issue_chain_with_keys;
use ssi_tls::provision::{pooled_key, Fixture};
use ssi_tls::handshake::SsiIdentity;

/// Tests in this binary run one at a time so timing-sensitive criteria see
/// an idle machine.
fn serial() -> std::sync::MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn line(criterion: u8, pass: bool, what: &str) {
    println!("criterion {criterion}: {} {what}", if pass { "PASS" } else { "FAIL" });
}

const SUITES: [SignatureSuite; 3] = SignatureSuite::ALL;

fn check_pair(scenario: Scenario, (c, s): (Side, Side)) -> Result<(), String> {
    let (c, s) = match (c, s) {
        (Ok(c), Ok(s)) => (c, s),
        (c, s) => return Err(format!("client {:?} / server {:?}", c.err(), s.err())),
    };
    if c.flow != scenario.flow() || s.flow != scenario.flow() {
        return Err(format!("flow {:?}/{:?}, expected {:?}", c.flow, s.flow, scenario.flow()));
    }
    if c.mutual != scenario.mutual() || s.mutual != scenario.mutual() {
        return Err("mutual flag".into());
    }
    if c.session_keys != s.session_keys {
        return Err("session keys differ".into());
    }
    Ok(())
}

#[test]
fn criterion_1_conformance_matrix() {
    let _g = serial();
    let start = Instant::now();
    for s in SUITES {
        fixture(s);
    }
    // Fallback counts once per suite and must pass for both causes.
    let flows: Vec<(&str, Vec<Scenario>)> = vec![
        ("original-uni", vec![Scenario::OriginalUni]),
        ("original-mutual", vec![Scenario::OriginalMutual]),
        ("vc-uni", vec![Scenario::VcUni]),
        ("vc-mutual", vec![Scenario::VcMutual]),
        ("did-uni", vec![Scenario::DidUni]),
        ("did-mutual", vec![Scenario::DidMutual]),
        ("hybrid-client-x509", vec![Scenario::HybridClientX509]),
        ("hybrid-server-x509", vec![Scenario::HybridServerX509]),
        ("fallback", vec![Scenario::FallbackNoSsi, Scenario::FallbackMethod]),
    ];
    let cells: Vec<_> = SUITES
        .iter()
        .flat_map(|&suite| flows.iter().map(move |(name, sc)| (suite, *name, sc.clone())))
        .collect();
    let results = exec::map(cells, |(suite, name, scenarios)| {
        let f = fixture(suite);
        let r = scenarios.iter().enumerate().try_for_each(|(i, &sc)| {
            let (client, server) = sc.configs(f);
            check_pair(sc, connect(client, server, 1000 + i as u64))
        });
        (suite, name, r)
    });
    let elapsed = start.elapsed();
    let green = results.iter().filter(|r| r.2.is_ok()).count();
    for (suite, name, r) in &results {
        if let Err(e) = r {
            println!("  {name} / {}: {e}", suite.label());
        }
    }
    let pass = green == 27 && results.len() == 27 && elapsed < Duration::from_secs(120);
    line(1, pass, &format!("conformance matrix {green}/27 green in {:.1}s (limit 120s)", elapsed.as_secs_f64()));
    assert!(pass);
}

/// Reference public-key object bytes and total server bytes per cell.
const REFERENCE_BYTES: [(SignatureSuite, Cell, usize, usize); 9] = [
    (SignatureSuite::RsaPssRsae2048Sha256, Cell::X509Uni, 1312, 2063),
    (SignatureSuite::EcdsaSecp256r1Sha256, Cell::X509Uni, 276, 1082),
    (SignatureSuite::Ed25519, Cell::X509Uni, 256, 950),
    (SignatureSuite::RsaPssRsae2048Sha256, Cell::VcUni, 512, 1516),
    (SignatureSuite::EcdsaSecp256r1Sha256, Cell::VcUni, 140, 1094),
    (SignatureSuite::Ed25519, Cell::VcUni, 128, 1072),
    (SignatureSuite::RsaPssRsae2048Sha256, Cell::DidUni, 256, 623),
    (SignatureSuite::EcdsaSecp256r1Sha256, Cell::DidUni, 70, 437),
    (SignatureSuite::Ed25519, Cell::DidUni, 64, 431),
];

fn unilateral(suite: SignatureSuite, cell: Cell) -> HandshakeOutcome {
    let mode = match cell {
        Cell::X509Uni => PreferredMode::X509,
        Cell::VcUni => PreferredMode::Vc,
        _ => PreferredMode::Did,
    };
    let f = fixture(suite);
    let (c, _) = connect(f.client_config(mode), f.server_config(ClientAuthRequest::None), 7);
    c.expect("unilateral handshake")
}

#[test]
fn criterion_2_byte_accounting() {
    let _g = serial();
    let mut exact = true;
    let mut totals = std::collections::HashMap::new();
    for (suite, cell, want_pk, _) in REFERENCE_BYTES {
        let acc = unilateral(suite, cell).accounting(Role::Server);
        let ok = acc.pk_object_bytes == want_pk;
        exact &= ok;
        totals.insert((suite, cell), acc.total_bytes);
        println!(
            "  {:<5} {:<9} pk objects {:>4} (table {:>4}) {}  total {:>4}",
            suite.label(),
            cell.name(),
            acc.pk_object_bytes,
            want_pk,
            if ok { "ok" } else { "MISMATCH" },
            acc.total_bytes
        );
    }
    line(2, exact, "public-key object bytes equal the table for all 9 cells (tolerance 0)");

    for suite in [SignatureSuite::EcdsaSecp256r1Sha256, SignatureSuite::Ed25519] {
        let (x, v, d) = (totals[&(suite, Cell::X509Uni)], totals[&(suite, Cell::VcUni)], totals[&(suite, Cell::DidUni)]);
        line(2, d < v, &format!("{} total bytes DID {d} < VC {v}", suite.label()));
        // The reference totals put VC above X.509 for both EC suites
        // (1094 > 1082, 1072 > 950), so this line is reported, not enforced.
        line(2, v < x, &format!("{} total bytes VC {v} < X.509 {x} (reference: VC > X.509 here)", suite.label()));
        assert!(d < v && d < x);
    }
    assert!(exact);
}

#[test]
fn criterion_3_resolution_attack_dichotomy() {
    let _g = serial();
    let node_suite = SignatureSuite::EcdsaSecp256r1Sha256;
    let mut all = true;
    for (si, suite) in SUITES.into_iter().enumerate() {
        let mut rng = seeded(300 + si as u64);
        let node = issue_chain_with_keys(
            "ledger.example",
            &pooled_key(node_suite, 1000),
            &pooled_key(node_suite, 1001),
            pooled_key(node_suite, 1002),
            &mut rng,
        )
        .unwrap();
        let impostor = issue_chain_with_keys(
            "ledger.example",
            &pooled_key(node_suite, 1010),
            &pooled_key(node_suite, 1011),
            pooled_key(node_suite, 1012),
            &mut rng,
        )
        .unwrap()
        .identity;
        let ledger = LedgerDeployment {
            method: DidMethodId::IOTA,
            store: Arc::new(LedgerStore::in_memory(DidMethodId::IOTA)),
            node,
        };
        let method = DidMethod::new(ledger.method, ledger.store.clone());
        let victim = method.did_create_with_keys(&pooled_key(suite, 500), &mut rng).unwrap();
        let rkeys = pooled_key(suite, 501);
        let relying = SsiIdentity { did: method.did_create_with_keys(&rkeys, &mut rng).unwrap(), keys: rkeys, credential: None };
        let (mut insecure_ok, mut secure_ok, mut baseline_ok) = (0, 0, 0);
        for t in 0..20u32 {
            let attacker = pooled_key(suite, 510 + t % 4);
            let run = |plaintext, pos, rng: &mut ChaCha20Rng| {
                mitm_resolution_attack(&attacker, &victim, &relying, &ledger, plaintext, pos, &impostor, rng).unwrap()
            };
            let a = run(true, AttackPosition::OnPath, &mut rng);
            insecure_ok += a.impersonated as u32;
            let b = run(false, AttackPosition::OnPath, &mut rng);
            secure_ok += (!b.impersonated && matches!(b.relying, Err(HandshakeError::ResolutionFailure(_)))) as u32;
            let c = run(false, AttackPosition::Baseline, &mut rng);
            baseline_ok += (!c.impersonated && matches!(c.relying, Err(HandshakeError::BadSignature(_)))) as u32;
        }
        let pass = insecure_ok == 20 && secure_ok == 20 && baseline_ok == 20;
        all &= pass;
        line(
            3,
            pass,
            &format!(
                "{}: plaintext channel impersonated {insecure_ok}/20, authenticated channel aborted {secure_ok}/20, no interposition rejected {baseline_ok}/20",
                suite.label()
            ),
        );
    }
    assert!(all);
}

/// The message `role` sent of type `typ` in a clean run.
fn capture(outcome: &HandshakeOutcome, role: Role, typ: u8) -> Option<HandshakeMessage> {
    outcome.transcript.sent_by(role).map(|e| e.message.clone()).find(|m| m.typ() == typ)
}

struct Trial {
    scenario: Scenario,
    suite: SignatureSuite,
    sender: Role,
    seed: u64,
}

fn targets(m: Mutation) -> Vec<(Scenario, Role)> {
    let mut out = Vec::new();
    for sc in Scenario::ALL {
        let (client, server) = sc.kinds();
        if m.applies_to(server) {
            out.push((sc, Role::Server));
        }
        let client_sends = match (m, client) {
            (Mutation::FinishedMac, _) => true,
            (_, Some(k)) => m.applies_to(k),
            (_, None) => false,
        };
        if client_sends {
            out.push((sc, Role::Client));
        }
    }
    out
}

/// Runs one corrupted handshake; Ok(class) is what the verifier reported.
fn soundness_trial(m: Mutation, t: &Trial) -> Result<String, String> {
    let f = fixture(t.suite);
    let (mut client, mut server) = t.scenario.configs(f);
    let mut rng = seeded(t.seed);
    let captured = if m == Mutation::Splice {
        let (c, s) = connect(client.clone(), server.clone(), t.seed ^ 0xabc);
        let outcome = match t.sender {
            Role::Client => s.map_err(|e| e.to_string())?,
            Role::Server => c.map_err(|e| e.to_string())?,
        };
        let kind = match t.sender {
            Role::Client => t.scenario.kinds().0.unwrap(),
            Role::Server => t.scenario.kinds().1,
        };
        let typ = if kind == Kind::X509 { 15 } else { 29 };
        Some(capture(&outcome, t.sender, typ).ok_or("nothing to splice")?)
    } else {
        None
    };
    let hook = mutation_hook(m, &mut rng, captured);
    match t.sender {
        Role::Client => client.tamper = Some(hook),
        Role::Server => server.tamper = Some(hook),
    }
    let (c, s) = connect(client, server, t.seed);
    let verifier = match t.sender {
        Role::Client => s,
        Role::Server => c,
    };
    match verifier {
        Ok(_) => Err("false accept".into()),
        Err(e) => Ok(e.class().to_string()),
    }
}

#[test]
fn criterion_4_authentication_soundness() {
    let _g = serial();
    let mut all = true;
    for (mi, m) in Mutation::ALL.into_iter().enumerate() {
        let targets = targets(m);
        let mut rng = seeded(4000 + mi as u64);
        let trials: Vec<Trial> = (0..100)
            .map(|i| {
                let (scenario, sender) = targets[i % targets.len()];
                Trial { scenario, suite: SUITES[rng.gen_range(0..3)], sender, seed: rng.next_u64() }
            })
            .collect();
        let outcomes = exec::map(trials, |t| (soundness_trial(m, &t), t));
        let mut false_accepts = 0;
        let mut wrong = Vec::new();
        for (r, t) in &outcomes {
            match r {
                Err(e) if e == "false accept" => false_accepts += 1,
                Ok(class) if class == m.expected_class() => {}
                other => wrong.push(format!("{:?}/{}/{:?}: {other:?}", t.scenario, t.suite.label(), t.sender)),
            }
        }
        let pass = false_accepts == 0 && wrong.is_empty();
        all &= pass;
        for w in wrong.iter().take(5) {
            println!("  {w}");
        }
        line(
            4,
            pass,
            &format!(
                "{}: 100 trials over {} targets, {false_accepts} false accepts, {} with an alert other than {}",
                m.name(),
                targets.len(),
                wrong.len(),
                m.expected_class()
            ),
        );
    }
    assert!(all);
}

fn measurement() -> &'static (Measurement, Report) {
    static M: OnceLock<(Measurement, Report)> = OnceLock::new();
    M.get_or_init(|| {
        let cfg = MeasureConfig { runs: 200, ..Default::default() };
        let m = measure(&cfg, |suite, _| eprintln!("measured {}", suite.label())).expect("measurement");
        let r = validate(&m, FIDELITY_TOLERANCE);
        (m, r)
    })
}

#[test]
fn criterion_5_model_fidelity() {
    let _g = serial();
    let (m, report) = measurement();
    for (suite, si) in &m.inputs {
        println!(
            "  {} inputs: T_C {:.3} T_V {:.3} (with resolution {:.3}) T_D {:.3} H_O' {:.3} H_O'' {:.3} ms",
            suite.label(),
            si.inputs.t_c.mean,
            si.inputs.t_v.mean,
            si.t_v_with_resolution.mean,
            si.inputs.t_d.mean,
            si.inputs.h_o_uni.mean,
            si.inputs.h_o_mut.mean
        );
    }
    let min_runs = Cell::ALL
        .iter()
        .flat_map(|c| SUITES.iter().map(move |s| m.latency(*s, *c).n))
        .min()
        .unwrap_or(0);
    for c in &report.cells {
        line(
            5,
            c.pass,
            &format!(
                "{} {}: measured {:.3} ms, estimate {:.3} ms, error {:.1}% (limit 15%)",
                c.suite.label(),
                c.cell.name(),
                c.measured.mean,
                c.estimate,
                c.rel_err * 100.0
            ),
        );
    }
    for s in &report.symmetry {
        line(
            5,
            s.pass,
            &format!(
                "{} {:?} hybrid symmetry: |{:.3} - {:.3}| = {:.3} ms vs pooled std {:.3} ms",
                s.suite.label(),
                s.mode,
                s.client_x509.mean,
                s.server_x509.mean,
                (s.client_x509.mean - s.server_x509.mean).abs(),
                s.pooled_std
            ),
        );
    }
    line(5, min_runs >= 200, &format!("at least 200 runs per cell (min {min_runs})"));
    let pass = min_runs >= 200
        && report.cells.len() == 24
        && report.cells.iter().all(|c| c.pass)
        && report.symmetry.len() == 6
        && report.symmetry.iter().all(|s| s.pass);
    assert!(pass);
}

#[test]
fn criterion_6_latency_ordering() {
    let _g = serial();
    let (_, report) = measurement();
    for o in &report.ordering {
        line(6, o.pass, &format!("{}: {}", o.suite.label(), o.claim));
    }
    assert!(!report.ordering.is_empty() && report.ordering.iter().all(|o| o.pass));
}

#[test]
fn criterion_7_revocation() {
    let _g = serial();
    let mut all = true;
    for suite in SUITES {
        for (revoked, mode) in [
            (Role::Server, PreferredMode::Vc),
            (Role::Server, PreferredMode::Did),
            (Role::Client, PreferredMode::Vc),
            (Role::Client, PreferredMode::Did),
        ] {
            let mut rng = seeded(700);
            let f = Fixture::new(suite, &mut rng).unwrap();
            let auth = if revoked == Role::Client { ClientAuthRequest::Mirror } else { ClientAuthRequest::None };
            let before = connect(f.client_config(mode), f.server_config(auth), 1);
            let healthy = before.0.is_ok() && before.1.is_ok();

            let party = f.party(revoked, 0);
            let method = f.method_for(&party.ssi.did).unwrap();
            method.did_deactivate(&party.ssi.did, &party.ssi.keys, &mut rng).unwrap();
            let (c, s) = connect(f.client_config(mode), f.server_config(auth), 2);
            let (verifier, other) = match revoked {
                Role::Server => (c, s),
                Role::Client => (s, c),
            };
            let class = verifier.as_ref().err().map(|e| e.class());
            let peer_alert = other.as_ref().err().and_then(|e| e.alert_code());
            let pass = healthy && class == Some("revoked_identity") && peer_alert == Some(44);
            all &= pass;
            line(
                7,
                pass,
                &format!(
                    "{} {:?} DID of the {} deactivated: verifier {:?}, peer received {}",
                    suite.label(),
                    mode,
                    revoked.as_str(),
                    class,
                    peer_alert.map(alert_name).unwrap_or("nothing")
                ),
            );
        }
    }
    assert!(all);
}

/// Valid encoded messages from every flow and suite.
fn corpus() -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for suite in SUITES {
        let f = fixture(suite);
        for sc in Scenario::ALL {
            let (client, server) = sc.configs(f);
            let (c, _) = connect(client, server, 11);
            out.extend(c.unwrap().transcript.entries().iter().map(|e| e.bytes.clone()));
        }
    }
    out
}

fn mutate(rng: &mut ChaCha20Rng, input: &[u8]) -> Vec<u8> {
    let mut b = input.to_vec();
    for _ in 0..rng.gen_range(1..=4) {
        let len = b.len();
        match rng.gen_range(0..7) {
            0 if len > 0 => {
                let i = rng.gen_range(0..len);
                b[i] ^= 1 << rng.gen_range(0..8);
            }
            1 if len > 0 => {
                let i = rng.gen_range(0..len);
                b[i] = rng.gen();
            }
            2 if len > 0 => b.truncate(rng.gen_range(0..len)),
            3 => {
                let i = rng.gen_range(0..=len);
                let n = rng.gen_range(1..8);
                let fill: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
                b.splice(i..i, fill);
            }
            4 if len > 1 => {
                let i = rng.gen_range(0..len);
                let j = rng.gen_range(i..len.min(i + 16) + 1).min(len);
                b.drain(i..j);
            }
            // Length fields: nudge a 2-byte big-endian value.
            5 if len > 2 => {
                let i = rng.gen_range(0..len - 1);
                let v = u16::from_be_bytes([b[i], b[i + 1]]).wrapping_add(rng.gen_range(1..4)) ;
                b[i..i + 2].copy_from_slice(&v.to_be_bytes());
            }
            _ => b.push(rng.gen()),
        }
    }
    b
}

#[test]
fn criterion_8_codec_fuzz() {
    let _g = serial();
    const ITERATIONS: usize = 1_000_000;
    const CHUNK: usize = 10_000;
    let corpus = corpus();
    let chunks: Vec<usize> = (0..ITERATIONS / CHUNK).collect();
    let start = Instant::now();
    let results = exec::map(chunks, |k| {
        let mut rng = ChaCha20Rng::seed_from_u64(0xf022 + k as u64);
        let (mut crashes, mut mismatches, mut accepted) = (0usize, 0usize, 0usize);
        for _ in 0..CHUNK {
            let seed = &corpus[rng.gen_range(0..corpus.len())];
            let input = mutate(&mut rng, seed);
            match catch_unwind(AssertUnwindSafe(|| HandshakeMessage::decode(&input).map(|m| m.encode()))) {
                Err(_) => crashes += 1,
                Ok(Ok(re)) => {
                    accepted += 1;
                    if re != input {
                        mismatches += 1;
                    }
                }
                Ok(Err(_)) => {}
            }
        }
        (crashes, mismatches, accepted)
    });
    let (crashes, mismatches, accepted) =
        results.iter().fold((0, 0, 0), |a, r| (a.0 + r.0, a.1 + r.1, a.2 + r.2));
    let pass = crashes == 0 && mismatches == 0;
    line(
        8,
        pass,
        &format!(
            "{ITERATIONS} mutated decodes from a {}-message corpus in {:.1}s: {crashes} crashes, {mismatches} re-encode mismatches ({accepted} mutants decoded)",
            corpus.len(),
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}
