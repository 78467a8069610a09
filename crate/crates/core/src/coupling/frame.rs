use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::model_space::{Point, SpaceKind, SpaceSpec};

/// Relative threshold below which a Gram–Schmidt residual counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Orthonormalizes `leading` (in order) and completes it to a basis of
/// `R^dim` with standard basis vectors. Columns of the result are the basis.
pub fn orthonormal_completion(leading: &[DVector<f64>], dim: usize) -> Result<DMatrix<f64>> {
    if leading.len() > dim {
        return Err(Error::InvalidArgument(format!("{} vectors in dimension {dim}", leading.len())));
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for v in leading {
        if v.len() != dim {
            return Err(Error::InvalidArgument("vector length differs from dimension".into()));
        }
        let scale = v.norm();
        let w = project_out(v.clone(), &basis);
        let norm = w.norm();
        if !(scale > 0.0) || norm <= DEPENDENCE_TOL * scale {
            return Err(Error::Degenerate("spanning vectors are (nearly) dependent".into()));
        }
        basis.push(w / norm);
    }
    while basis.len() < dim {
        let (best, norm) = (0..dim)
            .map(|i| {
                let w = project_out(DVector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 }), &basis);
                let n = w.norm();
                (w, n)
            })
            .fold((DVector::zeros(dim), -1.0), |acc, cand| if cand.1 > acc.1 { cand } else { acc });
        basis.push(best / norm);
    }
    Ok(DMatrix::from_columns(&basis))
}

/// Modified Gram–Schmidt with one reorthogonalization pass.
fn project_out(mut w: DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
    }
    w
}

/// Orthonormal ambient frame whose leading columns span the plane the
/// coupling acts on: `span{X, Y}` on spheres, `span{e_1, X~ - Y~}` on
/// hyperbolic spaces (only `e_1` when `X~ = Y~`), and `X - Y` in flat space.
pub fn frame_from_pair(spec: &SpaceSpec, x: &Point, y: &Point) -> Result<DMatrix<f64>> {
    let dim = spec.ambient_dim();
    if x.len() != dim || y.len() != dim {
        return Err(Error::InvalidArgument("point length differs from ambient dimension".into()));
    }
    match spec.kind() {
        SpaceKind::Sphere => orthonormal_completion(&[x.0.clone(), y.0.clone()], dim),
        SpaceKind::Euclidean => orthonormal_completion(&[&x.0 - &y.0], dim),
        SpaceKind::Hyperbolic => {
            let e1 = DVector::from_fn(dim, |r, _| if r == 0 { 1.0 } else { 0.0 });
            let mut zt = &x.0 - &y.0;
            zt[0] = 0.0;
            if zt.norm() == 0.0 {
                orthonormal_completion(&[e1], dim)
            } else {
                orthonormal_completion(&[e1, zt], dim)
            }
        }
    }
}

/// Principal square root of a symmetric positive semidefinite 2×2 matrix.
/// Eigenvalues down to `-1e-12` (relative to the spectrum) are treated as 0.
pub fn psd_sqrt_2x2(m: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let scale = a.abs().max(d.abs()).max(b.abs()).max(1.0);
    if (b - c).abs() > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!("matrix is not symmetric ({b} vs {c})")));
    }
    let b = 0.5 * (b + c);
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = half_diff.hypot(b);
    let l1 = mean + disc;
    // small eigenvalue from the determinant to avoid cancellation in mean - disc
    let l2 = if l1 > 0.0 { (a * d - b * b) / l1 } else { mean - disc };
    if l2 < -1e-12 * scale {
        return Err(Error::Domain(format!("matrix has negative eigenvalue {l2}")));
    }
    let (r1, r2) = (l1.max(0.0).sqrt(), l2.max(0.0).sqrt());
    if disc == 0.0 {
        return Ok(Matrix2::identity() * r1);
    }
    let theta = 0.5 * b.atan2(half_diff);
    let (s, co) = theta.sin_cos();
    // v1 = (co, s) for l1, v2 = (-s, co) for l2
    let p00 = r1 * co * co + r2 * s * s;
    let p11 = r1 * s * s + r2 * co * co;
    let p01 = (r1 - r2) * co * s;
    Ok(Matrix2::new(p00, p01, p01, p11))
}
