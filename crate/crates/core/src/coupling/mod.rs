//! Construction of the driving matrices `(J, K)`.
//!
//! The second motion is driven by `dW = J dB + K dC` with `C` independent of
//! `B` and `J J' + K K' = I`. Each constructor picks `(J, K)` from the current
//! pair of points and the requested rate of change of the distance functional
//! so that the martingale part of that functional vanishes and its drift equals
//! the request.

mod diagnostics;
mod euclidean;
mod frame;
mod hyperbolic;
mod sphere;

pub use diagnostics::{
    euclidean_cancellation_residual, euclidean_drift, hyperbolic_cancellation_residual, hyperbolic_drift,
    hyperbolic_eta, sphere_cancellation_residual, sphere_drift,
};
pub use euclidean::build_euclidean;
pub use frame::{frame_from_pair, orthonormal_completion, psd_sqrt_2x2};
pub use hyperbolic::{build_a_phi, build_hyperbolic, hyperbolic_gamma, hyperbolic_plane_params, APhiBlock, TwoPlaneParams};
pub use sphere::{build_sphere, build_sphere_with_gamma, sphere_gamma, sphere_gamma_literal};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Slack allowed when checking a requested rate against its band, relative to
/// the band's magnitude. Requests inside the slack are clamped onto the band.
pub const BAND_TOL: f64 = 1e-9;

/// `|Z|` (or `|eta| -> 1` on spheres) below which a state is degenerate.
pub const DEGENERATE_DIST: f64 = 1e-12;
pub const SPHERE_DEGENERATE_ETA: f64 = 1.0 - 1e-9;

/// The pair `(J, K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub j: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl CouplingMatrices {
    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    /// `max |J J' + K K' - I|`.
    pub fn identity_residual(&self) -> f64 {
        let n = self.dim();
        (&self.j * self.j.transpose() + &self.k * self.k.transpose() - DMatrix::identity(n, n)).amax()
    }

    /// Largest singular value of `J`.
    pub fn j_operator_norm(&self) -> f64 {
        self.j.clone().singular_values().max()
    }
}

/// Checks `rate` against `[lo, hi]` and clamps it onto the band when it is
/// outside only by rounding.
pub(crate) fn check_band(rate: f64, lo: f64, hi: f64) -> Result<f64> {
    let slack = BAND_TOL * lo.abs().max(hi.abs()).max(1.0);
    if !rate.is_finite() || rate < lo - slack || rate > hi + slack {
        return Err(Error::Inadmissible { rate, lo, hi });
    }
    Ok(rate.clamp(lo, hi))
}

/// Square root of `1 - g^2` for `g` already clamped to `[-1, 1]`.
pub(crate) fn complement(g: f64) -> f64 {
    ((1.0 - g) * (1.0 + g)).max(0.0).sqrt()
}
