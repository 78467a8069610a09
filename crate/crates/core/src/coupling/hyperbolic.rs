use nalgebra::{DMatrix, DVector, Matrix2};

use super::{check_band, complement, CouplingMatrices, BAND_TOL, DEGENERATE_DIST};
use crate::error::{Error, Result};
use crate::model_space::Point;

/// Scalars and plane of the two-dimensional contraction factorization: a contraction
/// `A` with `A(m xi1 + l xi2) = p xi1 + q xi2`, where `m^2 + l^2 = p^2 + q^2`,
/// and the weights `rr`, `ss` of the functional `rr xi1'A xi1 + ss xi2'A xi2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPlaneParams {
    pub m: f64,
    pub l: f64,
    pub p: f64,
    pub q: f64,
    pub rr: f64,
    pub ss: f64,
    pub xi1: DVector<f64>,
    pub xi2: DVector<f64>,
}

impl TwoPlaneParams {
    pub fn new(m: f64, l: f64, p: f64, q: f64, rr: f64, ss: f64, xi1: DVector<f64>, xi2: DVector<f64>) -> Result<Self> {
        let params = Self { m, l, p, q, rr, ss, xi1, xi2 };
        params.validate()?;
        Ok(params)
    }

    pub fn norm_sq(&self) -> f64 {
        self.m * self.m + self.l * self.l
    }

    /// `|m^2 + l^2 - p^2 - q^2| / (m^2 + l^2)`.
    pub fn norm_mismatch(&self) -> f64 {
        (self.norm_sq() - self.p * self.p - self.q * self.q).abs() / self.norm_sq()
    }

    /// Range `[lo, hi]` of `rr xi1'A xi1 + ss xi2'A xi2` over admissible `A`.
    pub fn phi_band(&self) -> (f64, f64) {
        let s = self.norm_sq();
        let center = (self.rr * self.m * self.p + self.ss * self.l * self.q) / s;
        let half = (self.rr * self.l * self.q + self.ss * self.m * self.p).abs() / s;
        (center - half, center + half)
    }

    fn validate(&self) -> Result<()> {
        if !(self.norm_sq() > 0.0) {
            return Err(Error::Degenerate("m^2 + l^2 = 0".into()));
        }
        if self.norm_mismatch() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "m^2 + l^2 = {} differs from p^2 + q^2 = {}",
                self.norm_sq(),
                self.p * self.p + self.q * self.q
            )));
        }
        let (a, b) = (self.xi1.norm(), self.xi2.norm());
        if (a - 1.0).abs() > 1e-12 || (b - 1.0).abs() > 1e-12 || self.xi1.dot(&self.xi2).abs() > 1e-12 {
            return Err(Error::InvalidArgument("xi1, xi2 are not orthonormal".into()));
        }
        Ok(())
    }
}

/// `A_phi` restricted to `span{xi1, xi2}`, in that basis (columns are the
/// images of `xi1` and `xi2`), together with its determinant `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct APhiBlock {
    pub block: Matrix2<f64>,
    pub d: f64,
}

pub fn build_a_phi(params: &TwoPlaneParams, phi: f64) -> Result<APhiBlock> {
    let TwoPlaneParams { m, l, p, q, rr, ss, .. } = *params;
    let s = params.norm_sq();
    let denom = rr * l * q + ss * m * p;
    if denom.abs() <= 1e-300 {
        return Err(Error::Degenerate("rr l q + ss m p = 0".into()));
    }
    let d = (phi * s - (rr * m * p + ss * l * q)) / denom;
    if !(d.abs() <= 1.0 + BAND_TOL) {
        let (lo, hi) = params.phi_band();
        return Err(Error::Inadmissible { rate: phi, lo, hi });
    }
    let d = d.clamp(-1.0, 1.0);
    let block = Matrix2::new(m * p + d * l * q, l * p - d * m * q, m * q - d * l * p, l * q + d * m * p) / s;
    Ok(APhiBlock { block, d })
}

/// `gamma = 1 + eta - eta' / (n - 1)`.
pub fn hyperbolic_gamma(n: usize, eta: f64, deta: f64) -> f64 {
    1.0 + eta - deta / (n - 1) as f64
}

/// Plane-block parameters for a half-space pair with `X~ != Y~`: `xi1 = e1`,
/// `xi2 = Z~/|Z~|`, `rr = 1 + eta`, `ss = 1`.
pub fn hyperbolic_plane_params(x: &Point, y: &Point, eta: f64) -> Result<TwoPlaneParams> {
    let n = x.len();
    let (x1, y1) = (x.0[0], y.0[0]);
    let mut zt = &x.0 - &y.0;
    zt[0] = 0.0;
    let zn = zt.norm();
    if !(zn > 0.0) {
        return Err(Error::Degenerate("X~ = Y~".into()));
    }
    let zn2 = zn * zn;
    let sq = x1 * x1 - y1 * y1;
    let mut e1 = DVector::zeros(n);
    e1[0] = 1.0;
    TwoPlaneParams::new(zn2 + sq, 2.0 * y1 * zn, -zn2 + sq, 2.0 * x1 * zn, 1.0 + eta, 1.0, e1, zt / zn)
}

/// Unit half-space `H^n`, `eta = cosh rho - 1 = |Z|^2 / (2 X_1 Y_1)` and its
/// requested rate `deta` in `[(n-1) eta, (n-1) eta + 2(n-1)]`.
///
/// If `X~ = Y~`, `J = diag(1, gamma, ..)`. Otherwise `J' = A_phi` on
/// `span{e1, Z~}` with `phi = -eta'/(n-1) + (X_1^2 + Y_1^2)/(X_1 Y_1)`, and
/// `gamma` on the complement; `K = (I - A'A)^{1/2}` on the plane and
/// `sqrt(1 - gamma^2)` on the complement. In one dimension `J = 1`, `K = 0`.
pub fn build_hyperbolic(x: &Point, y: &Point, eta: f64, deta: f64) -> Result<CouplingMatrices> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::InvalidArgument("hyperbolic points must share a positive dimension".into()));
    }
    let (x1, y1) = (x.0[0], y.0[0]);
    if !(x1 > 0.0 && y1 > 0.0) {
        return Err(Error::InvalidPoint(format!("first coordinates must be positive ({x1}, {y1})")));
    }
    let dist = (&x.0 - &y.0).norm();
    if !(dist > DEGENERATE_DIST) {
        return Err(Error::Degenerate(format!("|X - Y| = {dist}")));
    }
    let k = (n - 1) as f64;
    let deta = check_band(deta, k * eta, k * eta + 2.0 * k)?;
    if n == 1 {
        return Ok(CouplingMatrices { j: DMatrix::identity(1, 1), k: DMatrix::zeros(1, 1) });
    }
    let gamma = hyperbolic_gamma(n, eta, deta).clamp(-1.0, 1.0);
    let mut zt = &x.0 - &y.0;
    zt[0] = 0.0;
    if !(zt.norm() >= f64::MIN_POSITIVE) {
        let mut diag_j = DVector::from_element(n, gamma);
        let mut diag_k = DVector::from_element(n, complement(gamma));
        diag_j[0] = 1.0;
        diag_k[0] = 0.0;
        return Ok(CouplingMatrices { j: DMatrix::from_diagonal(&diag_j), k: DMatrix::from_diagonal(&diag_k) });
    }
    let params = hyperbolic_plane_params(x, y, eta)?;
    let phi = -deta / k + (x1 * x1 + y1 * y1) / (x1 * y1);
    let a = build_a_phi(&params, phi)?;
    // A'A fixes (m, l) and has determinant d^2, so I - A'A = (1 - d^2) u u' with
    // u the unit normal to (m, l); the generic root would lose half the digits
    // on this rank-one matrix.
    let norm = params.norm_sq().sqrt();
    let (u0, u1) = (-params.l / norm, params.m / norm);
    let root = Matrix2::new(u0 * u0, u0 * u1, u0 * u1, u1 * u1) * complement(a.d);

    let mut plane = DMatrix::zeros(n, 2);
    plane.set_column(0, &params.xi1);
    plane.set_column(1, &params.xi2);
    let off_plane = DMatrix::identity(n, n) - &plane * plane.transpose();
    let to_ambient = |b: &Matrix2<f64>| {
        let b = DMatrix::from_column_slice(2, 2, b.as_slice());
        &plane * b * plane.transpose()
    };
    Ok(CouplingMatrices {
        j: to_ambient(&a.block.transpose()) + &off_plane * gamma,
        k: to_ambient(&root) + off_plane * complement(gamma),
    })
}
