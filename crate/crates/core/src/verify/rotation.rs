//! Fixed-distance coupling on the 2-sphere by a common random rotation:
//! `X = Z x`, `Y = Z y` with `Z` a Brownian motion on `SO(3)`.

use nalgebra::{DVector, Matrix3, Vector3};

use crate::engine::{time_grid, PathRecord, Sample};
use crate::ensemble::map_paths;
use crate::error::{Error, Result};
use crate::model_space::{distance_unchecked, Point, SpaceSpec};
use crate::noise::NoiseStream;

/// `exp(hat(w))` by the axis-angle formula, where `hat(w) v = w x v`.
pub fn so3_exp(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let hat = w.cross_matrix();
    let (a, b) = if theta2 < 1e-8 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        let theta = theta2.sqrt();
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Matrix3::identity() + hat * a + hat * hat * b
}

/// Restores orthonormal columns (Gram-Schmidt) to absorb roundoff.
fn reorthonormalize(z: &mut Matrix3<f64>) {
    let c0 = z.column(0).normalize();
    let c1 = (z.column(1) - c0 * c0.dot(&z.column(1))).normalize();
    let c2 = c0.cross(&c1);
    z.set_column(0, &c0);
    z.set_column(1, &c1);
    z.set_column(2, &c2);
}

/// Drives `Z <- Z exp(sum_i d_i L_i)`, `d_i ~ N(0, dt)`, and records
/// `(Z x, Z y)` on [`time_grid`]`(dt, horizon)` of the unit 2-sphere.
pub fn rotation_path(x: &Point, y: &Point, dt: f64, horizon: f64, stream: &mut NoiseStream) -> Result<PathRecord> {
    let spec = SpaceSpec::unit_sphere(2)?;
    crate::model_space::geodesic_distance(&spec, x, y)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let rho0 = distance_unchecked(&spec, x, y);
    let (xv, yv) = (Vector3::from_column_slice(x.0.as_slice()), Vector3::from_column_slice(y.0.as_slice()));
    let (seed, path_index) = (stream.seed(), stream.path_index());
    let times = time_grid(dt, horizon);
    let mut z = Matrix3::identity();
    let mut samples = Vec::with_capacity(times.len());
    let record = |t: f64, z: &Matrix3<f64>, samples: &mut Vec<Sample>| {
        let xp = Point(DVector::from_column_slice((z * xv).as_slice()));
        let yp = Point(DVector::from_column_slice((z * yv).as_slice()));
        let dist = distance_unchecked(&spec, &xp, &yp);
        samples.push(Sample { t, x: xp, y: yp, dist, target: rho0 });
    };
    record(0.0, &z, &mut samples);
    for w in times.windows(2) {
        let g = stream.gaussians(3, w[1] - w[0]);
        z *= so3_exp(&Vector3::new(g[0], g[1], g[2]));
        reorthonormalize(&mut z);
        record(w[1], &z, &mut samples);
    }
    Ok(PathRecord { spec, seed, path_index, samples })
}

/// [`rotation_path`] from the canonical pair `e1`, `(cos rho0, sin rho0, 0)`.
pub fn rotation_oracle(rho0: f64, dt: f64, horizon: f64, seed: u64, path_index: u64) -> Result<PathRecord> {
    if !(rho0 > 0.0 && rho0 < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!("rho0 must lie in (0, pi), got {rho0}")));
    }
    let x = Point::basis(3, 0);
    let y = Point::from_slice(&[rho0.cos(), rho0.sin(), 0.0]);
    rotation_path(&x, &y, dt, horizon, &mut NoiseStream::new(seed, path_index))
}

/// End points `(X(T), Y(T))` and the largest distance error of `paths`
/// rotation paths.
pub fn rotation_ensemble_ends(
    rho0: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    paths: u64,
) -> Result<(Vec<(Point, Point)>, f64)> {
    let runs = map_paths(paths, |i| {
        let rec = rotation_oracle(rho0, dt, horizon, seed, i)?;
        let sup = rec.samples.iter().map(|s| s.abs_err()).fold(0.0, f64::max);
        let last = rec.samples.last().expect("grid is non-empty");
        Ok(((last.x.clone(), last.y.clone()), sup))
    })?;
    let sup = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok((runs.into_iter().map(|r| r.0).collect(), sup))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_matches_rotation_about_axis() {
        let r = so3_exp(&Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        assert!((r * Vector3::x() - Vector3::y()).amax() < 1e-15);
        let w = Vector3::new(0.3, -0.2, 0.5);
        let r = so3_exp(&w);
        assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-15);
        assert!((r.determinant() - 1.0).abs() < 1e-15);
        assert!((r * w - w).amax() < 1e-15);
        let small = Vector3::new(1e-6, 2e-6, -1e-6);
        let series = Matrix3::identity() + small.cross_matrix() + small.cross_matrix() * small.cross_matrix() * 0.5;
        assert!((so3_exp(&small) - series).amax() < 1e-17);
    }

    #[test]
    fn distance_is_constant() {
        let rec = rotation_oracle(1.0, 1e-3, 1.0, 3, 0).unwrap();
        assert_eq!(rec.samples.len(), 1001);
        for s in &rec.samples {
            assert!(s.abs_err() <= 1e-12);
        }
    }

    #[test]
    fn coincident_points_stay_together() {
        let x = Point::basis(3, 2);
        let rec = rotation_path(&x, &x, 1e-2, 1.0, &mut NoiseStream::new(1, 0)).unwrap();
        assert!(rec.samples.iter().all(|s| s.dist == 0.0));
    }
}
