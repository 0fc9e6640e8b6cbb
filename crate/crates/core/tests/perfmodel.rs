use proptest::prelude::*;
use ssi_tls::crypto::SignatureSuite;
use ssi_tls::perfmodel::{
    delta_d, delta_v, estimate, estimate_hybrid, estimate_mutual, markdown,
    measure, validate, Cell, MeasureConfig, ModelInputs, SsiMode, Stat, FIDELITY_TOLERANCE,
};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn delta_arithmetic() {
    let i = ModelInputs::from_means(9.0, 20.0, 25.0, 0.0, 0.0);
    assert!(close(delta_v(&i), 36.0));
    assert!(close(delta_d(&i), 16.0));
    let i = ModelInputs::from_means(4.0, 4.0, 0.0, 0.0, 0.0);
    assert!(close(delta_v(&i), 0.0));
}

#[test]
fn mutual_example() {
    // Δ_V = 36 with H_O″ = 50.
    let i = ModelInputs::from_means(9.0, 20.0, 25.0, 30.0, 50.0);
    assert!(close(estimate_mutual(&i, SsiMode::Vc), 122.0));
}

#[test]
fn zero_deltas_collapse_to_original() {
    let i = ModelInputs::from_means(5.0, 0.0, 5.0, 30.0, 50.0);
    for cell in Cell::ALL {
        let want = if cell.is_mutual() { 50.0 } else { 30.0 };
        assert!(close(estimate(&i, cell).estimate, want), "{cell:?}");
    }
}

fn inputs() -> impl Strategy<Value = ModelInputs> {
    (0.0..50.0f64, 0.0..50.0f64, 0.0..50.0f64, 0.0..100.0f64, 0.0..100.0f64)
        .prop_map(|(c, v, d, u, m)| ModelInputs::from_means(c, v, d, u, m))
}

proptest! {
    #[test]
    fn hybrid_is_the_midpoint(i in inputs()) {
        for mode in [SsiMode::Vc, SsiMode::Did] {
            let mid = i.h_o_mut.mean + (estimate_mutual(&i, mode) - i.h_o_mut.mean) / 2.0;
            prop_assert!((estimate_hybrid(&i, mode) - mid).abs() < 1e-9);
        }
        prop_assert_eq!(estimate(&i, Cell::HybridOV).estimate, estimate(&i, Cell::HybridVO).estimate);
        prop_assert_eq!(estimate(&i, Cell::HybridOD).estimate, estimate(&i, Cell::HybridDO).estimate);
    }

    #[test]
    fn mutual_gap_is_twice_t_v(i in inputs()) {
        let gap = estimate_mutual(&i, SsiMode::Vc) - estimate_mutual(&i, SsiMode::Did);
        prop_assert!((gap - 2.0 * i.t_v.mean).abs() < 1e-9);
    }

    #[test]
    fn raising_t_d_raises_ssi_estimates(i in inputs(), d in 0.0..20.0f64) {
        let mut j = i;
        j.t_d.mean += d;
        for cell in Cell::ALL {
            let (a, b) = (estimate(&i, cell).estimate, estimate(&j, cell).estimate);
            if cell.is_x509() {
                prop_assert!((a - b).abs() < 1e-9);
            } else {
                prop_assert!(b - a >= d - 1e-9);
            }
        }
    }

    #[test]
    fn estimates_are_linear(i in inputs(), j in inputs()) {
        let sum = ModelInputs::from_means(
            i.t_c.mean + j.t_c.mean,
            i.t_v.mean + j.t_v.mean,
            i.t_d.mean + j.t_d.mean,
            i.h_o_uni.mean + j.h_o_uni.mean,
            i.h_o_mut.mean + j.h_o_mut.mean,
        );
        for cell in Cell::ALL {
            let lhs = estimate(&sum, cell).estimate;
            let rhs = estimate(&i, cell).estimate + estimate(&j, cell).estimate;
            prop_assert!((lhs - rhs).abs() < 1e-6);
        }
    }
}

#[test]
fn stat_matches_textbook() {
    let s = Stat::from_samples(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
    assert!(close(s.mean, 5.0));
    assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
}

#[test]
fn smoke_measurement() {
    let cfg = MeasureConfig { suites: vec![SignatureSuite::Ed25519], runs: 30, pool: 2, ..Default::default() };
    let m = measure(&cfg, |_, _| {}).unwrap();
    assert_eq!(m.records.len(), 30 * Cell::ALL.len());
    for r in &m.records {
        assert!(r.phase_sum_ms() <= r.latency_ms, "{r:?}");
    }
    let report = validate(&m, FIDELITY_TOLERANCE);
    println!("{}", markdown(&m, &report));
    let pk = |cell| m.records.iter().find(|r| r.cell == cell).unwrap().server_pk_object_bytes;
    assert_eq!((pk(Cell::X509Uni), pk(Cell::VcUni), pk(Cell::DidUni)), (256, 128, 64));
}
