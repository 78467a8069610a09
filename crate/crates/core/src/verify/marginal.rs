use nalgebra::DVector;
use serde::Serialize;

use super::VerifyReport;
use crate::ensemble::{map_paths, Ensemble};
use crate::error::{Error, Result};
use crate::model_space::{Point, SpaceKind, SpaceSpec};

pub const MIN_MARGINAL_PATHS: usize = 500;

/// `E[X(t)]` for Brownian motion started at `x0`: `e^{-nKt/2} x0` on spheres,
/// `x0` in Euclidean space. On half-spaces only the first coordinate is
/// meaningful: `x0_1 e^{-(n-2)|K|t/2}`.
pub fn expected_mean(spec: &SpaceSpec, x0: &Point, t: f64) -> DVector<f64> {
    let n = spec.dim() as f64;
    let s = t / (spec.scale() * spec.scale());
    match spec.kind() {
        SpaceKind::Euclidean => x0.0.clone(),
        SpaceKind::Sphere => &x0.0 * (-0.5 * n * s).exp(),
        SpaceKind::Hyperbolic => DVector::from_element(1, x0.0[0] * (-0.5 * (n - 2.0) * s).exp()),
    }
}

/// The coordinates compared by [`mean_decay_check`].
fn observed(spec: &SpaceSpec, p: &Point) -> DVector<f64> {
    match spec.kind() {
        SpaceKind::Hyperbolic => DVector::from_element(1, p.0[0]),
        _ => p.0.clone(),
    }
}

fn mean_and_se(spec: &SpaceSpec, ends: &[Point]) -> (DVector<f64>, DVector<f64>) {
    let m = ends.len() as f64;
    let first = observed(spec, &ends[0]);
    let mut sum = DVector::zeros(first.len());
    let mut sq = DVector::zeros(first.len());
    for p in ends {
        let v = observed(spec, p);
        sq += v.component_mul(&v);
        sum += v;
    }
    let mean = &sum / m;
    let var = (&sq / m - mean.component_mul(&mean)) * (m / (m - 1.0));
    let se = var.map(|v: f64| (v.max(0.0) / m).sqrt());
    (mean, se)
}

/// `|mean - E[X(t)]| <= 3 |SE| + |bias|`, where `bias` is a per-coordinate
/// discretization allowance.
pub fn mean_decay_check(
    spec: &SpaceSpec,
    x0: &Point,
    t: f64,
    ends: &[Point],
    bias: &DVector<f64>,
    label: &str,
) -> Result<VerifyReport> {
    if ends.len() < MIN_MARGINAL_PATHS {
        return Err(Error::InvalidArgument(format!(
            "mean decay needs at least {MIN_MARGINAL_PATHS} paths, got {}",
            ends.len()
        )));
    }
    let (mean, se) = mean_and_se(spec, ends);
    let dev = (mean - expected_mean(spec, x0, t)).norm();
    let tol = 3.0 * se.norm() + bias.norm();
    Ok(VerifyReport::new(format!("mean_decay_{label}"), dev, tol, ends.len() as u64, None))
}

/// Mean-decay reports for both marginals of an ensemble, with the bias
/// allowance taken as `|mean(dt) - mean(2 dt)|` on the same Brownian paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalStudy {
    pub t: f64,
    pub dt: f64,
    pub x: VerifyReport,
    pub y: VerifyReport,
    pub bias_x: f64,
    pub bias_y: f64,
    /// `(X(t), Y(t))` of the step-`dt` ensemble.
    #[serde(skip)]
    pub ends: Vec<(Point, Point)>,
}

impl MarginalStudy {
    pub fn pass(&self) -> bool {
        self.x.pass && self.y.pass
    }
}

pub fn marginal_study(ensemble: &Ensemble) -> Result<MarginalStudy> {
    ensemble.check()?;
    let fine = ends(ensemble)?;
    let mut coarse_ens = ensemble.clone().with_substeps(2 * ensemble.substeps);
    coarse_ens.cfg.dt *= 2.0;
    let coarse = ends(&coarse_ens)?;
    let spec = &ensemble.spec;
    let split = |v: &[(Point, Point)]| -> (Vec<Point>, Vec<Point>) { v.iter().cloned().unzip() };
    let (fx, fy) = split(&fine);
    let (cx, cy) = split(&coarse);
    let bias_x = (mean_and_se(spec, &fx).0 - mean_and_se(spec, &cx).0).abs();
    let bias_y = (mean_and_se(spec, &fy).0 - mean_and_se(spec, &cy).0).abs();
    let t = ensemble.horizon;
    // Y starts at y0, so its expected mean is taken from y0.
    Ok(MarginalStudy {
        t,
        dt: ensemble.cfg.dt,
        x: mean_decay_check(spec, &ensemble.x0, t, &fx, &bias_x, "x")?,
        y: mean_decay_check(spec, &ensemble.y0, t, &fy, &bias_y, "y")?,
        bias_x: bias_x.norm(),
        bias_y: bias_y.norm(),
        ends: fine,
    })
}

fn ends(e: &Ensemble) -> Result<Vec<(Point, Point)>> {
    map_paths(e.paths, |i| e.summary_of(i).map(|s| (s.x_end, s.y_end)))
}

/// Two-sample agreement of ensemble means:
/// `max_i |a_i - b_i| / sqrt(SE_a,i^2 + SE_b,i^2) <= 3`.
pub fn oracle_agreement(spec: &SpaceSpec, a: &[Point], b: &[Point], label: &str) -> Result<VerifyReport> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument("agreement needs two non-trivial ensembles".into()));
    }
    let (ma, sa) = mean_and_se(spec, a);
    let (mb, sb) = mean_and_se(spec, b);
    let mut worst = 0.0f64;
    for i in 0..ma.len() {
        let se = sa[i].hypot(sb[i]);
        let z = if se > 0.0 { (ma[i] - mb[i]).abs() / se } else { (ma[i] - mb[i]).abs() * f64::INFINITY };
        worst = worst.max(if z.is_nan() { 0.0 } else { z });
    }
    Ok(VerifyReport::new(format!("oracle_agreement_{label}"), worst, 3.0, a.len().min(b.len()) as u64, None))
}
