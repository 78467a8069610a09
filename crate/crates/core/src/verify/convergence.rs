use serde::Serialize;

use super::tracking::TrackingStats;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub mean_sup_err: f64,
    pub max_sup_err: f64,
    pub rms_err: f64,
    pub paths: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log(mean_sup_err)` against `log(dt)`.
    pub slope: f64,
    pub strictly_decreasing: bool,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs two or more matched points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// Runs `base` at every step size in `dt_list` (decreasing, at least three
/// entries spanning a decade). When a step size is an integer multiple of the
/// finest one, its noise is the sum of the finest draws, so all rows share
/// Brownian paths.
pub fn convergence_study(base: &Ensemble, dt_list: &[f64]) -> Result<ConvergenceTable> {
    if dt_list.len() < 3 {
        return Err(Error::InvalidArgument("convergence study needs at least three step sizes".into()));
    }
    if dt_list.windows(2).any(|w| !(w[1] < w[0])) || dt_list.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidArgument("step sizes must be positive and strictly decreasing".into()));
    }
    let finest = *dt_list.last().expect("checked non-empty");
    if dt_list[0] < 10.0 * finest * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument("step sizes must span at least one decade".into()));
    }
    let mut rows = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let ratio = dt / finest;
        let substeps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio { ratio.round() as u32 } else { 1 };
        let mut e = base.clone().with_substeps(substeps);
        e.cfg.dt = dt;
        let stats = TrackingStats::from_summaries(&e.summaries()?)?;
        rows.push(ConvergenceRow {
            dt,
            mean_sup_err: stats.mean_sup_err,
            max_sup_err: stats.max_sup_err,
            rms_err: stats.rms_err,
            paths: stats.paths,
        });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].mean_sup_err < w[0].mean_sup_err);
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.mean_sup_err).collect();
    let slope = if errs.iter().all(|e| *e > 0.0) { fit_loglog_slope(&dts, &errs)? } else { f64::NAN };
    Ok(ConvergenceTable { rows, slope, strictly_decreasing })
}
