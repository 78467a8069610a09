use nalgebra::{DMatrix, DVector};

use super::{check_band, complement, frame_from_pair, CouplingMatrices, SPHERE_DEGENERATE_ETA};
use crate::error::{Error, Result};
use crate::model_space::{Point, SpaceSpec};

/// Rate on the orthogonal complement of `span{X, Y}` that makes the drift
/// `-(n-1) eta + (n-1) gamma` of `eta = X'Y` equal to `deta`.
pub fn sphere_gamma(n: usize, eta: f64, deta: f64) -> f64 {
    eta + deta / (n - 1) as f64
}

/// The complement rate with a leading `1 -`. It does not reproduce the
/// requested drift and is kept only so tests can show that.
pub fn sphere_gamma_literal(n: usize, eta: f64, deta: f64) -> f64 {
    1.0 - (deta + (n - 1) as f64 * eta) / (n - 1) as f64
}

/// Unit sphere `S^n`, unit points `x, y` in `R^{n+1}`, `eta = cos rho` and its
/// requested rate `deta`, which must lie in
/// `[-(n-1)(eta+1), -(n-1)(eta-1)]`.
///
/// `J'` swaps `X -> -Y`, `Y -> -X` and scales the complement of
/// `span{X, Y}` by `gamma`; `K` vanishes on the plane and is
/// `sqrt(1 - gamma^2)` on the complement.
pub fn build_sphere(x: &Point, y: &Point, eta: f64, deta: f64) -> Result<CouplingMatrices> {
    let n = x.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::InvalidArgument("sphere points need at least two coordinates".into()));
    }
    if !(eta.abs() < SPHERE_DEGENERATE_ETA) {
        return Err(Error::Degenerate(format!("eta = {eta} is too close to +-1")));
    }
    let k = (n - 1) as f64;
    let deta = check_band(deta, -k * (eta + 1.0), -k * (eta - 1.0))?;
    let gamma = if n == 1 { 0.0 } else { sphere_gamma(n, eta, deta).clamp(-1.0, 1.0) };
    build_sphere_with_gamma(x, y, gamma)
}

/// The sphere construction for an explicit complement rate `gamma`.
pub fn build_sphere_with_gamma(x: &Point, y: &Point, gamma: f64) -> Result<CouplingMatrices> {
    let dim = x.len();
    if y.len() != dim || dim < 2 {
        return Err(Error::InvalidArgument("sphere points must share an ambient dimension >= 2".into()));
    }
    if !(-1.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} outside [-1, 1]")));
    }
    let spec = SpaceSpec::unit_sphere(dim - 1)?;
    let frame = frame_from_pair(&spec, x, y)?;
    let plane = frame.columns(0, 2);
    let on_plane = plane * plane.transpose();
    let off_plane = DMatrix::identity(dim, dim) - &on_plane;
    // Householder reflection in the bisector b = (X+Y)/|X+Y|, restricted to the plane.
    let b: DVector<f64> = (&x.0 + &y.0).normalize();
    let swap = on_plane - (&b * b.transpose()) * 2.0;
    Ok(CouplingMatrices { j: swap + &off_plane * gamma, k: off_plane * complement(gamma) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{sphere_cancellation_residual, sphere_drift};
    use nalgebra::Matrix2;

    fn e(i: usize) -> Point {
        Point::basis(3, i)
    }

    #[test]
    fn fixed_distance_on_orthogonal_pair() {
        let c = build_sphere(&e(0), &e(1), 0.0, 0.0).unwrap();
        let jt = c.j.transpose();
        assert!((&jt * &e(0).0 + &e(1).0).amax() < 1e-15);
        assert!((&jt * &e(1).0 + &e(0).0).amax() < 1e-15);
        assert!((&jt * &e(2).0).amax() < 1e-15);
        assert!((c.k.transpose() * &e(0).0).amax() < 1e-15);
        assert!((c.k.transpose() * &e(1).0).amax() < 1e-15);
        assert!((c.k.transpose() * &e(2).0 - &e(2).0).amax() < 1e-15);
        assert!(sphere_cancellation_residual(&c, &e(0), &e(1), 0.0) < 1e-15);
        assert!(c.identity_residual() < 1e-15);
    }

    #[test]
    fn left_band_edge_gives_gamma_minus_one() {
        assert_eq!(sphere_gamma(2, 0.0, -1.0), -1.0);
        let c = build_sphere(&e(0), &e(1), 0.0, -1.0).unwrap();
        assert!(c.k.amax() < 1e-15);
        assert!((c.j.transpose() * &e(2).0 + &e(2).0).amax() < 1e-15);
        assert!((sphere_drift(&c, &e(0), &e(1)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_only_admits_the_rotation_coupling() {
        let x = Point::from_slice(&[1.0, 0.0]);
        let y = Point::from_slice(&[0.6, 0.8]);
        assert!(matches!(build_sphere(&x, &y, 0.6, 0.1), Err(Error::Inadmissible { .. })));
        let c = build_sphere(&x, &y, 0.6, 0.0).unwrap();
        assert!((c.j.transpose() * &x.0 + &y.0).amax() < 1e-15);
        assert!((c.j.transpose() * &y.0 + &x.0).amax() < 1e-15);
        assert_eq!(c.k, DMatrix::zeros(2, 2));
        assert!(c.identity_residual() < 1e-15);
    }

    #[test]
    fn plane_block_is_a_reflection() {
        let h = 0.5f64.sqrt();
        let x = Point::from_slice(&[1.0, 0.0, 0.0, 0.0]);
        let y = Point::from_slice(&[h, 0.0, h, 0.0]);
        let c = build_sphere(&x, &y, h, 0.1).unwrap();
        let spec = SpaceSpec::unit_sphere(3).unwrap();
        let f = frame_from_pair(&spec, &x, &y).unwrap();
        let p = f.columns(0, 2);
        let block = p.transpose() * c.j.transpose() * p;
        let block = Matrix2::new(block[(0, 0)], block[(0, 1)], block[(1, 0)], block[(1, 1)]);
        assert!((block.transpose() * block - Matrix2::identity()).amax() < 1e-15);
        assert!((block - block.transpose()).amax() < 1e-15);
        assert!((block.determinant() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_and_out_of_band() {
        let x = e(0);
        assert!(matches!(build_sphere(&x, &x, 1.0, 0.0), Err(Error::Degenerate(_))));
        assert!(matches!(build_sphere(&e(0), &e(1), 0.0, 1.5), Err(Error::Inadmissible { .. })));
        assert!(matches!(build_sphere(&e(0), &e(1), 0.0, -1.5), Err(Error::Inadmissible { .. })));
    }
}
