use std::fmt::Write as _;

use super::measure::{Measurement, RunRecord};
use super::model::{estimate, Cell, ModelInputs, SsiMode, Stat};
use crate::crypto::SignatureSuite;

/// Relative tolerance between a cell's measured mean and its estimate.
pub const FIDELITY_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone)]
pub struct CellCheck {
    pub suite: SignatureSuite,
    pub cell: Cell,
    pub measured: Stat,
    pub estimate: f64,
    pub rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SymmetryCheck {
    pub suite: SignatureSuite,
    pub mode: SsiMode,
    /// Client X.509, server SSI.
    pub client_x509: Stat,
    /// Client SSI, server X.509.
    pub server_x509: Stat,
    pub pooled_std: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct OrderingCheck {
    pub suite: SignatureSuite,
    pub claim: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub cells: Vec<CellCheck>,
    pub symmetry: Vec<SymmetryCheck>,
    pub ordering: Vec<OrderingCheck>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
            && self.symmetry.iter().all(|c| c.pass)
            && self.ordering.iter().all(|c| c.pass)
    }
}

/// Compares every measured SSI and hybrid cell with its estimate, and checks
/// hybrid symmetry and the latency orderings.
pub fn validate(m: &Measurement, tolerance: f64) -> Report {
    let mut report = Report::default();
    for (&suite, si) in &m.inputs {
        for cell in Cell::ALL.into_iter().filter(|c| !c.is_x509()) {
            let measured = m.latency(suite, cell);
            if measured.n == 0 {
                continue;
            }
            let est = estimate(&si.inputs, cell).estimate;
            let rel_err = (measured.mean - est).abs() / measured.mean;
            report.cells.push(CellCheck { suite, cell, measured, estimate: est, rel_err, pass: rel_err <= tolerance });
        }
        for (mode, a, b) in [(SsiMode::Vc, Cell::HybridOV, Cell::HybridVO), (SsiMode::Did, Cell::HybridOD, Cell::HybridDO)] {
            let (sa, sb) = (m.latency(suite, a), m.latency(suite, b));
            if sa.n == 0 || sb.n == 0 {
                continue;
            }
            let pooled_std = Stat::pooled_std(&sa, &sb);
            let pass = (sa.mean - sb.mean).abs() <= pooled_std;
            report.symmetry.push(SymmetryCheck { suite, mode, client_x509: sa, server_x509: sb, pooled_std, pass });
        }
    }
    for suite in SignatureSuite::ALL {
        let lat = |c| m.latency(suite, c);
        let mut less = |a: Cell, b: Cell, strict: bool| {
            let (sa, sb) = (lat(a), lat(b));
            if sa.n == 0 || sb.n == 0 {
                return;
            }
            let pass = if strict { sa.mean < sb.mean } else { sa.mean <= sb.mean };
            let op = if strict { "<" } else { "<=" };
            report.ordering.push(OrderingCheck { suite, claim: format!("{} {op} {}", a.name(), b.name()), pass });
        };
        for c in [Cell::VcUni, Cell::DidUni] {
            less(Cell::X509Uni, c, true);
        }
        for c in [Cell::VcMut, Cell::DidMut, Cell::HybridOV, Cell::HybridVO, Cell::HybridOD, Cell::HybridDO] {
            less(Cell::X509Mut, c, true);
        }
        if suite == SignatureSuite::Ed25519 {
            less(Cell::DidUni, Cell::VcUni, false);
            less(Cell::DidMut, Cell::VcMut, false);
        }
    }
    report
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "suite,cell,flow,run,latency_ms,resolve_ms,vc_verify_ms,chain_verify_ms,sign_ms,client_bytes,server_bytes,server_handshake_bytes,server_pk_object_bytes,client_pk_object_bytes\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{},{},{}",
            r.suite.label(),
            r.cell.name(),
            r.flow.name(),
            r.run,
            r.latency_ms,
            r.resolve_ms,
            r.vc_verify_ms,
            r.chain_verify_ms,
            r.sign_ms,
            r.client_bytes,
            r.server_bytes,
            r.server_handshake_bytes,
            r.server_pk_object_bytes,
            r.client_pk_object_bytes,
        );
    }
    out
}

/// Per-run difference from the matching original handshake, next to the
/// model's difference.
pub fn overlay_csv(m: &Measurement, suite: SignatureSuite, cell: Cell) -> Option<String> {
    let si = m.inputs.get(&suite)?;
    let base = if cell.is_mutual() { si.inputs.h_o_mut.mean } else { si.inputs.h_o_uni.mean };
    let model = estimate(&si.inputs, cell).estimate - base;
    let mut out = String::from("run_index,measured_delta_ms,model_delta_ms\n");
    for r in m.cell_records(suite, cell) {
        let _ = writeln!(out, "{},{:.4},{:.4}", r.run, r.latency_ms - base, model);
    }
    Some(out)
}

fn inputs_row(out: &mut String, suite: SignatureSuite, i: &ModelInputs, t_v_res: &Stat) {
    let _ = writeln!(
        out,
        "| {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} |",
        suite.label(),
        i.t_c.mean,
        i.t_v.mean,
        t_v_res.mean,
        i.t_d.mean,
        i.h_o_uni.mean,
        i.h_o_mut.mean
    );
}

/// Markdown tables: byte accounting, model inputs, latencies and the
/// validation verdicts.
pub fn markdown(m: &Measurement, report: &Report) -> String {
    let mut out = String::new();
    out.push_str("## Handshake size (server authentication, unilateral)\n\n");
    out.push_str("| Mode | Suite | Public key objects (B) | Server handshake bytes |\n|---|---|---|---|\n");
    for (label, cell) in [("X.509", Cell::X509Uni), ("VC", Cell::VcUni), ("DID", Cell::DidUni)] {
        for suite in SignatureSuite::ALL {
            if let Some(r) = m.cell_records(suite, cell).next() {
                let _ = writeln!(out, "| {label} | {} | {} | {} |", suite.label(), r.server_pk_object_bytes, r.server_handshake_bytes);
            }
        }
    }
    out.push_str("\n## Model inputs (ms)\n\n");
    out.push_str("| Suite | T_C | T_V | T_V incl. resolution | T_D | H_O uni | H_O mutual |\n|---|---|---|---|---|---|---|\n");
    for (suite, si) in &m.inputs {
        inputs_row(&mut out, *suite, &si.inputs, &si.t_v_with_resolution);
    }
    out.push_str("\nEstimates use T_V without resolution; T_D is added separately.\n");
    out.push_str("\n## Measured latency at the server (ms)\n\n| Cell |");
    for suite in SignatureSuite::ALL {
        let _ = write!(out, " {} |", suite.label());
    }
    out.push_str("\n|---|---|---|---|\n");
    for cell in Cell::ALL {
        let _ = write!(out, "| {} |", cell.name());
        for suite in SignatureSuite::ALL {
            let s = m.latency(suite, cell);
            if s.n == 0 {
                out.push_str(" - |");
            } else {
                let _ = write!(out, " {:.3} ± {:.3} |", s.mean, s.std);
            }
        }
        out.push('\n');
    }
    out.push_str("\n## Model vs measurement\n\n| Suite | Cell | Measured | Estimate | Error | |\n|---|---|---|---|---|---|\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "| {} | {} | {:.3} | {:.3} | {:.1}% | {} |",
            c.suite.label(),
            c.cell.name(),
            c.measured.mean,
            c.estimate,
            c.rel_err * 100.0,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    out.push_str("\n## Hybrid symmetry\n\n| Suite | Mode | Client X.509 | Server X.509 | Pooled std | |\n|---|---|---|---|---|---|\n");
    for s in &report.symmetry {
        let _ = writeln!(
            out,
            "| {} | {:?} | {:.3} | {:.3} | {:.3} | {} |",
            s.suite.label(),
            s.mode,
            s.client_x509.mean,
            s.server_x509.mean,
            s.pooled_std,
            if s.pass { "ok" } else { "FAIL" }
        );
    }
    out.push_str("\n## Orderings\n\n");
    for o in &report.ordering {
        let _ = writeln!(out, "- {} {}: {}", o.suite.label(), o.claim, if o.pass { "ok" } else { "FAIL" });
    }
    out
}
