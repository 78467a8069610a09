//! Residuals of the cancellation identities and the drift each construction
//! realizes for its distance functional, evaluated from `(J, K)` and the state.

use nalgebra::DVector;

use super::{frame_from_pair, CouplingMatrices};
use crate::model_space::{Point, SpaceSpec};

/// `max(|J'Z - Z|, |K'Z|) / |Z|`.
pub fn euclidean_cancellation_residual(c: &CouplingMatrices, z: &DVector<f64>) -> f64 {
    let jt = c.j.transpose() * z - z;
    let kt = c.k.transpose() * z;
    jt.amax().max(kt.amax()) / z.norm()
}

/// `n - tr J`, the drift of `|Z|^2 / 2`; equals `rho rho'` when the
/// construction is right.
pub fn euclidean_drift(c: &CouplingMatrices) -> f64 {
    c.dim() as f64 - c.j.trace()
}

/// `max(|J'(X - eta Y) - (eta X - Y)|, |K'(X - eta Y)|)`.
pub fn sphere_cancellation_residual(c: &CouplingMatrices, x: &Point, y: &Point, eta: f64) -> f64 {
    let v = &x.0 - &y.0 * eta;
    let target = &x.0 * eta - &y.0;
    (c.j.transpose() * &v - target).amax().max((c.k.transpose() * &v).amax())
}

/// Drift of `eta = X'Y`: `-(n-1) eta + sum_j f_j' U J' V f_j` over an
/// orthonormal basis `f_j` of the complement of `span{X, Y}`, with
/// `U = I - XX'` and `V = I - YY'`.
pub fn sphere_drift(c: &CouplingMatrices, x: &Point, y: &Point) -> f64 {
    let dim = x.len();
    let n = dim - 1;
    let eta = x.0.dot(&y.0);
    let mut total = -((n as f64) - 1.0) * eta;
    if n == 1 {
        return total;
    }
    let spec = SpaceSpec::unit_sphere(n).expect("n >= 1");
    let frame = frame_from_pair(&spec, x, y).expect("X and Y span a plane");
    let jt = c.j.transpose();
    for j in 2..dim {
        let f = frame.column(j);
        let vf = f - &y.0 * y.0.dot(&f);
        let w = &jt * vf;
        let uw = &w - &x.0 * x.0.dot(&w);
        total += f.dot(&uw);
    }
    total
}

/// `|Z|^2 / (2 X_1 Y_1) = cosh(d) - 1` on the unit half-space.
pub fn hyperbolic_eta(x: &Point, y: &Point) -> f64 {
    (&x.0 - &y.0).norm_squared() / (2.0 * x.0[0] * y.0[0])
}

/// Residual of `J'v = w`, `K'v = 0` relative to `|v|`, where
/// `v = (|Z~|^2 + X_1^2 - Y_1^2) e1 + 2 Y_1 Z~` and
/// `w = (-|Z~|^2 + X_1^2 - Y_1^2) e1 + 2 X_1 Z~`.
pub fn hyperbolic_cancellation_residual(c: &CouplingMatrices, x: &Point, y: &Point) -> f64 {
    let (x1, y1) = (x.0[0], y.0[0]);
    let mut zt = &x.0 - &y.0;
    zt[0] = 0.0;
    let zn2 = zt.norm_squared();
    let mut v = &zt * (2.0 * y1);
    v[0] = zn2 + x1 * x1 - y1 * y1;
    let mut w = &zt * (2.0 * x1);
    w[0] = -zn2 + x1 * x1 - y1 * y1;
    let scale = v.norm().max(f64::MIN_POSITIVE);
    (c.j.transpose() * &v - w).amax().max((c.k.transpose() * &v).amax()) / scale
}

/// Drift of `eta`:
/// `(1 + eta)(n - 2 - e1'J e1) - sum_{i>=2} e_i'J e_i + (X_1^2 + Y_1^2)/(X_1 Y_1)`.
pub fn hyperbolic_drift(c: &CouplingMatrices, x: &Point, y: &Point) -> f64 {
    let n = x.len() as f64;
    let (x1, y1) = (x.0[0], y.0[0]);
    let eta = hyperbolic_eta(x, y);
    let j11 = c.j[(0, 0)];
    let tail_trace = c.j.trace() - j11;
    (1.0 + eta) * (n - 2.0 - j11) - tail_trace + (x1 * x1 + y1 * y1) / (x1 * y1)
}
