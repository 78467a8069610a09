use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::VerifyReport;
use crate::coupling::{
    build_a_phi, build_euclidean, build_hyperbolic, build_sphere, build_sphere_with_gamma,
    euclidean_cancellation_residual, euclidean_drift, hyperbolic_cancellation_residual, hyperbolic_drift,
    hyperbolic_eta, hyperbolic_gamma, hyperbolic_plane_params, sphere_cancellation_residual, sphere_drift,
    sphere_gamma_literal, CouplingMatrices,
};
use crate::error::Result;
use crate::model_space::{Point, SpaceKind, SpaceSpec};

/// Bound on algebraic residuals (identity, cancellation, plane block).
pub const IDENTITY_TOL: f64 = 1e-10;
/// Bound on `|realized drift - requested rate|`.
pub const DRIFT_TOL: f64 = 1e-8;

/// Complement rate used for spheres in a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereGammaRule {
    Corrected,
    /// The `1 - ...` variant, clamped to `[-1, 1]`; expected to fail the
    /// drift check.
    Literal,
}

/// Worst residuals over a scan of random admissible states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityScan {
    pub space: String,
    pub n: usize,
    pub samples: u64,
    /// `max |JJ' + KK' - I|`.
    pub identity: f64,
    /// `max(|J|_op - 1, 0)`.
    pub op_norm_excess: f64,
    pub cancellation: f64,
    /// Worst of the two-plane block identities; 0 outside hyperbolic space.
    pub plane_block: f64,
    pub drift: f64,
    /// In one dimension, whether every non-zero rate was refused.
    pub rigid_rejections_ok: bool,
}

impl IdentityScan {
    pub fn reports(&self) -> Vec<VerifyReport> {
        let n = self.samples;
        let mut out = vec![
            VerifyReport::new("identity_residual", self.identity, IDENTITY_TOL, n, None),
            VerifyReport::new("j_op_norm_excess", self.op_norm_excess, IDENTITY_TOL, n, None),
            VerifyReport::new("cancellation_residual", self.cancellation, IDENTITY_TOL, n, None),
            VerifyReport::new("plane_block_residual", self.plane_block, IDENTITY_TOL, n, None),
            VerifyReport::new("drift_mismatch", self.drift, DRIFT_TOL, n, None),
        ];
        if self.n == 1 {
            let v = if self.rigid_rejections_ok { 0.0 } else { 1.0 };
            out.push(VerifyReport::new("one_dim_rigidity", v, 0.0, n, None));
        }
        out
    }

    pub fn pass(&self) -> bool {
        self.reports().iter().all(|r| r.pass)
    }

    fn absorb(&mut self, c: &CouplingMatrices, cancellation: f64, drift_err: f64) {
        self.identity = self.identity.max(c.identity_residual());
        self.op_norm_excess = self.op_norm_excess.max(c.j_operator_norm() - 1.0);
        self.cancellation = self.cancellation.max(cancellation);
        self.drift = self.drift.max(drift_err);
    }
}

/// [`identity_scan_with`] using the corrected sphere rate.
pub fn identity_scan(spec: &SpaceSpec, samples: u64, seed: u64) -> Result<IdentityScan> {
    identity_scan_with(spec, samples, seed, SphereGammaRule::Corrected)
}

/// Samples random states of the unit model of `spec` with random in-band
/// rates (band endpoints included with positive probability), builds
/// `(J, K)` and records the worst residuals.
pub fn identity_scan_with(spec: &SpaceSpec, samples: u64, seed: u64, rule: SphereGammaRule) -> Result<IdentityScan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.dim();
    let mut scan = IdentityScan {
        space: spec.kind().name().to_string(),
        n,
        samples,
        identity: 0.0,
        op_norm_excess: 0.0,
        cancellation: 0.0,
        plane_block: 0.0,
        drift: 0.0,
        rigid_rejections_ok: true,
    };
    let k = (n - 1) as f64;
    for _ in 0..samples {
        match spec.kind() {
            SpaceKind::Euclidean => {
                let z = gaussian(&mut rng, n) * rng.random_range(0.05..3.0);
                let rho = z.norm();
                let rate = in_band(&mut rng, 0.0, 2.0 * k / rho);
                let c = build_euclidean(n, &z, rho, rate)?;
                scan.absorb(&c, euclidean_cancellation_residual(&c, &z), (euclidean_drift(&c) - rho * rate).abs());
                if n == 1 && build_euclidean(n, &z, rho, 0.1).is_ok() {
                    scan.rigid_rejections_ok = false;
                }
            }
            SpaceKind::Sphere => {
                let (x, y, eta) = loop {
                    let x = Point(gaussian(&mut rng, n + 1).normalize());
                    let y = Point(gaussian(&mut rng, n + 1).normalize());
                    let eta = x.0.dot(&y.0);
                    if eta.abs() < 0.999 {
                        break (x, y, eta);
                    }
                };
                let deta = in_band(&mut rng, -k * (eta + 1.0), -k * (eta - 1.0));
                let c = match rule {
                    SphereGammaRule::Corrected => build_sphere(&x, &y, eta, deta)?,
                    SphereGammaRule::Literal => {
                        let gamma = if n == 1 { 0.0 } else { sphere_gamma_literal(n, eta, deta).clamp(-1.0, 1.0) };
                        build_sphere_with_gamma(&x, &y, gamma)?
                    }
                };
                scan.absorb(
                    &c,
                    sphere_cancellation_residual(&c, &x, &y, eta),
                    (sphere_drift(&c, &x, &y) - deta).abs(),
                );
                if n == 1 && build_sphere(&x, &y, eta, 0.1).is_ok() {
                    scan.rigid_rejections_ok = false;
                }
            }
            SpaceKind::Hyperbolic => {
                let x = half_space_point(&mut rng, n);
                let mut y = half_space_point(&mut rng, n);
                if n > 1 && rng.random_bool(0.05) {
                    // vertical pair, Z~ = 0
                    for i in 1..n {
                        y.0[i] = x.0[i];
                    }
                }
                let eta = hyperbolic_eta(&x, &y);
                let deta = in_band(&mut rng, k * eta, k * eta + 2.0 * k);
                let c = build_hyperbolic(&x, &y, eta, deta)?;
                scan.absorb(&c, hyperbolic_cancellation_residual(&c, &x, &y), (hyperbolic_drift(&c, &x, &y) - deta).abs());
                if n > 1 {
                    scan.plane_block = scan.plane_block.max(plane_block_residual(&c, &x, &y, eta, deta)?);
                }
                if n == 1 && build_hyperbolic(&x, &y, eta, 0.1 + eta).is_ok() {
                    scan.rigid_rejections_ok = false;
                }
            }
        }
    }
    Ok(scan)
}

/// Two-plane identities: `m^2 + l^2 = p^2 + q^2`, `K'(m xi1 + l xi2) = 0`,
/// `det A = d`, `d = gamma`.
fn plane_block_residual(c: &CouplingMatrices, x: &Point, y: &Point, eta: f64, deta: f64) -> Result<f64> {
    let n = x.len();
    let mut zt = &x.0 - &y.0;
    zt[0] = 0.0;
    if zt.norm() == 0.0 {
        return Ok(0.0);
    }
    let params = hyperbolic_plane_params(x, y, eta)?;
    let (x1, y1) = (x.0[0], y.0[0]);
    let phi = -deta / (n - 1) as f64 + (x1 * x1 + y1 * y1) / (x1 * y1);
    let a = build_a_phi(&params, phi)?;
    let v = &params.xi1 * params.m + &params.xi2 * params.l;
    let null = (c.k.transpose() * &v).amax() / v.norm();
    let gamma = hyperbolic_gamma(n, eta, deta).clamp(-1.0, 1.0);
    Ok(params
        .norm_mismatch()
        .max(null)
        .max((a.block.determinant() - a.d).abs())
        .max((a.d - gamma).abs()))
}

fn gaussian(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn half_space_point(rng: &mut ChaCha8Rng, n: usize) -> Point {
    let mut p = gaussian(rng, n);
    p[0] = rng.random_range(-1.5f64..1.5).exp();
    Point(p)
}

/// Uniform on `[lo, hi]`, hitting each endpoint with probability 0.1.
fn in_band(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    if u < 0.1 {
        lo
    } else if u < 0.2 {
        hi
    } else {
        lo + (hi - lo) * rng.random::<f64>()
    }
}
