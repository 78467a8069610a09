use serde::Serialize;

use super::VerifyReport;
use crate::ensemble::{PathSummary, Trace};
use crate::error::{Error, Result};

/// Ensemble distance-tracking errors against the target profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingStats {
    pub paths: u64,
    /// Mean over paths of `sup_t |d_emp - rho|`.
    pub mean_sup_err: f64,
    pub max_sup_err: f64,
    /// Root mean square of `d_emp - rho` over all samples.
    pub rms_err: f64,
}

impl TrackingStats {
    pub fn from_summaries(summaries: &[PathSummary]) -> Result<Self> {
        if summaries.is_empty() {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        }
        let sups = summaries.iter().map(|s| s.sup_err);
        let sq: f64 = summaries.iter().map(|s| s.sum_sq_err).sum();
        let count: usize = summaries.iter().map(|s| s.samples).sum();
        Ok(Self::assemble(summaries.len(), sups, sq, count))
    }

    fn assemble(paths: usize, sups: impl Iterator<Item = f64>, sum_sq: f64, samples: usize) -> Self {
        let (mut total, mut max) = (0.0, 0.0f64);
        for s in sups {
            total += s;
            max = max.max(s);
        }
        Self {
            paths: paths as u64,
            mean_sup_err: total / paths as f64,
            max_sup_err: max,
            rms_err: (sum_sq / samples as f64).sqrt(),
        }
    }

    pub fn mean_report(&self, tolerance: f64, dt: f64) -> VerifyReport {
        VerifyReport::new("mean_sup_err", self.mean_sup_err, tolerance, self.paths, Some(dt))
    }

    pub fn max_report(&self, tolerance: f64, dt: f64) -> VerifyReport {
        VerifyReport::new("max_sup_err", self.max_sup_err, tolerance, self.paths, Some(dt))
    }
}

/// Tracking statistics of recorded paths, which must share one time grid.
pub fn distance_error_stats(traces: &[Trace]) -> Result<TrackingStats> {
    let first = traces.first().ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
    let mut sum_sq = 0.0;
    let mut count = 0;
    for tr in traces {
        if tr.t != first.t || tr.dist.len() != tr.t.len() || tr.target.len() != tr.t.len() {
            return Err(Error::InvalidArgument(format!("path {} is not on the common grid", tr.path_index)));
        }
        for (d, r) in tr.dist.iter().zip(&tr.target) {
            sum_sq += (d - r) * (d - r);
        }
        count += tr.t.len();
    }
    Ok(TrackingStats::assemble(traces.len(), traces.iter().map(Trace::sup_err), sum_sq, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn trace(i: u64, dist: Vec<f64>) -> Trace {
        let n = dist.len();
        Trace { path_index: i, t: (0..n).map(|k| k as f64 * 0.1).collect(), dist, target: vec![FRAC_PI_2; n] }
    }

    #[test]
    fn exact_tracking_has_zero_error() {
        let s = distance_error_stats(&[trace(0, vec![FRAC_PI_2; 4])]).unwrap();
        assert_eq!((s.mean_sup_err, s.max_sup_err, s.rms_err), (0.0, 0.0, 0.0));
    }

    #[test]
    fn sup_mean_and_rms() {
        let a = trace(0, vec![FRAC_PI_2, FRAC_PI_2 + 0.3]);
        let b = trace(1, vec![FRAC_PI_2 - 0.1, FRAC_PI_2]);
        let s = distance_error_stats(&[a, b]).unwrap();
        assert!((s.mean_sup_err - 0.2).abs() < 1e-15);
        assert!((s.max_sup_err - 0.3).abs() < 1e-15);
        assert!((s.rms_err - (0.1f64 / 4.0).sqrt()).abs() < 1e-15);
        assert!(!s.mean_report(0.1, 1e-3).pass);
        assert!(s.mean_report(0.25, 1e-3).pass);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = trace(0, vec![1.0, 1.0]);
        let b = trace(1, vec![1.0, 1.0, 1.0]);
        assert!(distance_error_stats(&[a, b]).is_err());
        assert!(distance_error_stats(&[]).is_err());
    }
}
