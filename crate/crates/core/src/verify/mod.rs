//! Verification harness: tracking statistics, algebraic identity scans,
//! marginal mean decay, the rotation-group oracle and convergence studies.

mod convergence;
mod identity;
mod marginal;
mod rotation;
mod tracking;

pub use convergence::{fit_loglog_slope, convergence_study, ConvergenceRow, ConvergenceTable};
pub use identity::{identity_scan, identity_scan_with, IdentityScan, SphereGammaRule, DRIFT_TOL, IDENTITY_TOL};
pub use marginal::{expected_mean, marginal_study, mean_decay_check, oracle_agreement, MarginalStudy, MIN_MARGINAL_PATHS};
pub use rotation::{rotation_ensemble_ends, rotation_oracle, rotation_path, so3_exp};
pub use tracking::{distance_error_stats, TrackingStats};

use serde::Serialize;

/// One checked statistic. `pass` iff `value <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub ensemble_size: u64,
    pub dt: Option<f64>,
}

impl VerifyReport {
    pub fn new(metric: impl Into<String>, value: f64, tolerance: f64, ensemble_size: u64, dt: Option<f64>) -> Self {
        Self { metric: metric.into(), value, tolerance, pass: value <= tolerance, ensemble_size, dt }
    }
}

pub fn all_pass(reports: &[VerifyReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
