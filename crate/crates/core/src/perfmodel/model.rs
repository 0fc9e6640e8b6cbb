use std::fmt;

/// Sample mean and standard deviation, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn exact(mean: f64) -> Self {
        Stat { mean, std: 0.0, n: 1 }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Stat::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Stat { mean, std: var.sqrt(), n }
    }

    /// Pooled standard deviation of two samples.
    pub fn pooled_std(a: &Stat, b: &Stat) -> f64 {
        let dof = (a.n + b.n).saturating_sub(2);
        if dof == 0 {
            return 0.0;
        }
        let ss = (a.n.saturating_sub(1)) as f64 * a.std.powi(2) + (b.n.saturating_sub(1)) as f64 * b.std.powi(2);
        (ss / dof as f64).sqrt()
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ± {:.3} ms (n={})", self.mean, self.std, self.n)
    }
}

/// Averages that parameterize the latency model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelInputs {
    /// Certificate chain verification.
    pub t_c: Stat,
    /// VC verification, excluding DID resolution.
    pub t_v: Stat,
    /// DID resolution, including the ledger channel setup.
    pub t_d: Stat,
    /// Original handshake, server authentication only.
    pub h_o_uni: Stat,
    /// Original handshake, mutual authentication.
    pub h_o_mut: Stat,
}

impl ModelInputs {
    pub fn from_means(t_c: f64, t_v: f64, t_d: f64, h_o_uni: f64, h_o_mut: f64) -> Self {
        ModelInputs {
            t_c: Stat::exact(t_c),
            t_v: Stat::exact(t_v),
            t_d: Stat::exact(t_d),
            h_o_uni: Stat::exact(h_o_uni),
            h_o_mut: Stat::exact(h_o_mut),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SsiMode {
    Vc,
    Did,
}

/// A handshake configuration the model gives an estimate for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    X509Uni,
    X509Mut,
    VcUni,
    VcMut,
    DidUni,
    DidMut,
    /// Client X.509, server VC.
    HybridOV,
    /// Client VC, server X.509.
    HybridVO,
    /// Client X.509, server DID.
    HybridOD,
    /// Client DID, server X.509.
    HybridDO,
}

impl Cell {
    pub const ALL: [Cell; 10] = [
        Cell::X509Uni,
        Cell::X509Mut,
        Cell::VcUni,
        Cell::VcMut,
        Cell::DidUni,
        Cell::DidMut,
        Cell::HybridOV,
        Cell::HybridVO,
        Cell::HybridOD,
        Cell::HybridDO,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Cell::X509Uni => "x509-uni",
            Cell::X509Mut => "x509-mut",
            Cell::VcUni => "vc-uni",
            Cell::VcMut => "vc-mut",
            Cell::DidUni => "did-uni",
            Cell::DidMut => "did-mut",
            Cell::HybridOV => "hybrid-ov",
            Cell::HybridVO => "hybrid-vo",
            Cell::HybridOD => "hybrid-od",
            Cell::HybridDO => "hybrid-do",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn is_x509(self) -> bool {
        matches!(self, Cell::X509Uni | Cell::X509Mut)
    }

    pub fn is_mutual(self) -> bool {
        !matches!(self, Cell::X509Uni | Cell::VcUni | Cell::DidUni)
    }

    pub fn mode(self) -> Option<SsiMode> {
        match self {
            Cell::X509Uni | Cell::X509Mut => None,
            Cell::VcUni | Cell::VcMut | Cell::HybridOV | Cell::HybridVO => Some(SsiMode::Vc),
            Cell::DidUni | Cell::DidMut | Cell::HybridOD | Cell::HybridDO => Some(SsiMode::Did),
        }
    }
}

/// Δ_V = T_V + T_D − T_C
pub fn delta_v(i: &ModelInputs) -> f64 {
    i.t_v.mean + i.t_d.mean - i.t_c.mean
}

/// Δ_D = T_D − T_C
pub fn delta_d(i: &ModelInputs) -> f64 {
    i.t_d.mean - i.t_c.mean
}

fn delta(i: &ModelInputs, mode: SsiMode) -> f64 {
    match mode {
        SsiMode::Vc => delta_v(i),
        SsiMode::Did => delta_d(i),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyEstimate {
    pub cell: Cell,
    pub estimate: f64,
    pub delta_v: f64,
    pub delta_d: f64,
}

/// H_V′ = H_O′ − T_C + T_V + T_D and H_D′ = H_O′ − T_C + T_D.
pub fn estimate_unilateral(i: &ModelInputs, mode: SsiMode) -> f64 {
    let base = i.h_o_uni.mean - i.t_c.mean + i.t_d.mean;
    match mode {
        SsiMode::Vc => base + i.t_v.mean,
        SsiMode::Did => base,
    }
}

/// H″ = H_O″ + 2Δ for the matching mode.
pub fn estimate_mutual(i: &ModelInputs, mode: SsiMode) -> f64 {
    i.h_o_mut.mean + 2.0 * delta(i, mode)
}

/// One side X.509, the other SSI: H_O″ + Δ.
pub fn estimate_hybrid(i: &ModelInputs, mode: SsiMode) -> f64 {
    i.h_o_mut.mean + delta(i, mode)
}

pub fn estimate(i: &ModelInputs, cell: Cell) -> LatencyEstimate {
    let estimate = match cell {
        Cell::X509Uni => i.h_o_uni.mean,
        Cell::X509Mut => i.h_o_mut.mean,
        Cell::VcUni => estimate_unilateral(i, SsiMode::Vc),
        Cell::DidUni => estimate_unilateral(i, SsiMode::Did),
        Cell::VcMut => estimate_mutual(i, SsiMode::Vc),
        Cell::DidMut => estimate_mutual(i, SsiMode::Did),
        Cell::HybridOV | Cell::HybridVO => estimate_hybrid(i, SsiMode::Vc),
        Cell::HybridOD | Cell::HybridDO => estimate_hybrid(i, SsiMode::Did),
    };
    LatencyEstimate { cell, estimate, delta_v: delta_v(i), delta_d: delta_d(i) }
}
