use nalgebra::{DMatrix, DVector};

use super::{check_band, complement, CouplingMatrices, DEGENERATE_DIST};
use crate::error::{Error, Result};

/// Flat space. `J` fixes `Z = X - Y` and acts as `lambda I` on its orthogonal
/// complement, `lambda = 1 - rho rho' / (n - 1)`; `K = sqrt(1 - lambda^2)` on
/// the complement. Then `J'Z = Z`, `K'Z = 0` and `n - tr J = rho rho'`.
pub fn build_euclidean(n: usize, z: &DVector<f64>, rho: f64, drho: f64) -> Result<CouplingMatrices> {
    if z.len() != n {
        return Err(Error::InvalidArgument(format!("Z has {} coordinates, expected {n}", z.len())));
    }
    let norm = z.norm();
    if !(norm > DEGENERATE_DIST) {
        return Err(Error::Degenerate(format!("|X - Y| = {norm}")));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {rho}")));
    }
    let k = (n - 1) as f64;
    let drho = check_band(drho, 0.0, 2.0 * k / rho)?;
    if n == 1 {
        return Ok(CouplingMatrices { j: DMatrix::identity(1, 1), k: DMatrix::zeros(1, 1) });
    }
    let lambda = (1.0 - rho * drho / k).clamp(-1.0, 1.0);
    let xi = z / norm;
    let along = &xi * xi.transpose();
    let across = DMatrix::identity(n, n) - &along;
    Ok(CouplingMatrices { j: along + &across * lambda, k: across * complement(lambda) })
}
