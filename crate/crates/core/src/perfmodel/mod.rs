//! Analytical latency model, measurement harness and validation reports.

mod measure;
mod model;
mod validate;

pub use measure::{cell_setup, measure, MeasureConfig, MeasureError, Measurement, RunRecord, SuiteInputs, Testbed};
pub use model::{
    delta_d, delta_v, estimate, estimate_hybrid, estimate_mutual, estimate_unilateral, Cell,
    LatencyEstimate, ModelInputs, SsiMode, Stat,
};
pub use validate::{markdown, overlay_csv, runs_csv, validate, CellCheck, OrderingCheck, Report, SymmetryCheck, FIDELITY_TOLERANCE};
