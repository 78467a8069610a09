//! The three constant-curvature model spaces in extrinsic coordinates.
//!
//! Spheres of curvature `K > 0` live in `R^{n+1}` as `{|x| = r}` with
//! `r = 1/sqrt(K)`. Hyperbolic spaces of curvature `K < 0` use the upper
//! half-space `{x_1 > 0}`; the scale only multiplies the metric, so points are
//! stored in unit half-space coordinates and distances are `r` times the unit
//! formula.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when validating points against their manifold.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Euclidean,
    Sphere,
    Hyperbolic,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Euclidean => "euclidean",
            SpaceKind::Sphere => "sphere",
            SpaceKind::Hyperbolic => "hyperbolic",
        }
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "flat" | "r" => Ok(SpaceKind::Euclidean),
            "sphere" | "s" => Ok(SpaceKind::Sphere),
            "hyperbolic" | "h" => Ok(SpaceKind::Hyperbolic),
            other => Err(Error::InvalidSpace(format!("unknown space kind '{other}'"))),
        }
    }
}

/// A model space `M^n_K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    kind: SpaceKind,
    n: usize,
    curvature: f64,
    scale: f64,
}

impl SpaceSpec {
    /// Builds the model space of dimension `n` and curvature `k`; the kind
    /// follows from the sign of `k`.
    pub fn from_curvature(n: usize, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidSpace(format!("curvature must be finite, got {k}")));
        }
        if k > 0.0 {
            Self::sphere(n, k)
        } else if k < 0.0 {
            Self::hyperbolic(n, k)
        } else {
            Self::euclidean(n)
        }
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { kind: SpaceKind::Euclidean, n, curvature: 0.0, scale: 1.0 })
    }

    pub fn sphere(n: usize, k: f64) -> Result<Self> {
        check_dim(n)?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidSpace(format!("sphere needs K > 0, got {k}")));
        }
        Ok(Self { kind: SpaceKind::Sphere, n, curvature: k, scale: 1.0 / k.sqrt() })
    }

    pub fn hyperbolic(n: usize, k: f64) -> Result<Self> {
        check_dim(n)?;
        if !(k < 0.0 && k.is_finite()) {
            return Err(Error::InvalidSpace(format!("hyperbolic space needs K < 0, got {k}")));
        }
        Ok(Self { kind: SpaceKind::Hyperbolic, n, curvature: k, scale: 1.0 / (-k).sqrt() })
    }

    pub fn unit_sphere(n: usize) -> Result<Self> {
        Self::sphere(n, 1.0)
    }

    pub fn unit_hyperbolic(n: usize) -> Result<Self> {
        Self::hyperbolic(n, -1.0)
    }

    /// Same kind and dimension with `|K| = 1`.
    pub fn unit(&self) -> Self {
        match self.kind {
            SpaceKind::Euclidean => *self,
            SpaceKind::Sphere => Self { curvature: 1.0, scale: 1.0, ..*self },
            SpaceKind::Hyperbolic => Self { curvature: -1.0, scale: 1.0, ..*self },
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `sqrt(|K|)`, or 0 for flat space.
    pub fn sqrt_abs_curvature(&self) -> f64 {
        self.curvature.abs().sqrt()
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Sphere => self.n + 1,
            _ => self.n,
        }
    }

    /// Largest distance a profile may take: the antipodal distance `pi r` on
    /// spheres, unbounded otherwise.
    pub fn diameter(&self) -> f64 {
        match self.kind {
            SpaceKind::Sphere => std::f64::consts::PI * self.scale,
            _ => f64::INFINITY,
        }
    }

    pub fn describe(&self) -> String {
        format!("{}(n={}, K={})", self.kind.name(), self.n, self.curvature)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSpace("dimension must be at least 1".into()));
    }
    Ok(())
}

/// A point in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub DVector<f64>);

impl Point {
    pub fn new(coords: DVector<f64>) -> Self {
        Point(coords)
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Point(DVector::from_column_slice(coords))
    }

    /// Standard basis vector `e_{index}` (zero-based) of length `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = 1.0;
        Point(v)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(DVector::from_vec(v))
    }
}

/// Outcome of [`validate_point`].
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PointReport {
    pub expected_len: usize,
    pub actual_len: usize,
    /// `| |x|/r - 1 |` on spheres.
    pub norm_defect: Option<f64>,
    /// First coordinate on hyperbolic spaces.
    pub first_coord: Option<f64>,
    pub finite: bool,
    pub violations: Vec<String>,
}

impl PointReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_point(spec: &SpaceSpec, x: &Point) -> PointReport {
    let mut report = PointReport {
        expected_len: spec.ambient_dim(),
        actual_len: x.len(),
        finite: x.0.iter().all(|c| c.is_finite()),
        ..Default::default()
    };
    if report.expected_len != report.actual_len {
        report.violations.push(format!(
            "dimension mismatch: expected {} coordinates, got {}",
            report.expected_len, report.actual_len
        ));
        return report;
    }
    if !report.finite {
        report.violations.push("non-finite coordinate".into());
        return report;
    }
    match spec.kind {
        SpaceKind::Euclidean => {}
        SpaceKind::Sphere => {
            let defect = (x.0.norm() / spec.scale - 1.0).abs();
            report.norm_defect = Some(defect);
            if defect > ON_MANIFOLD_TOL {
                report
                    .violations
                    .push(format!("norm {} is not the sphere radius {}", x.0.norm(), spec.scale));
            }
        }
        SpaceKind::Hyperbolic => {
            let x1 = x.0[0];
            report.first_coord = Some(x1);
            if x1 <= 0.0 {
                report.violations.push(format!("first coordinate {x1} is not positive"));
            }
        }
    }
    report
}

pub(crate) fn ensure_valid(spec: &SpaceSpec, x: &Point) -> Result<()> {
    let report = validate_point(spec, x);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidPoint(report.violations.join("; ")))
    }
}

/// `arccosh(1 + u)` evaluated without cancellation for small `u`.
pub fn acosh1p(u: f64) -> f64 {
    (u + (u * (u + 2.0)).sqrt()).ln_1p()
}

/// Geodesic distance between two valid points.
pub fn geodesic_distance(spec: &SpaceSpec, x: &Point, y: &Point) -> Result<f64> {
    ensure_valid(spec, x)?;
    ensure_valid(spec, y)?;
    Ok(distance_unchecked(spec, x, y))
}

/// Distance formula without validation; used in hot loops on states that are
/// kept on-manifold by construction.
pub fn distance_unchecked(spec: &SpaceSpec, x: &Point, y: &Point) -> f64 {
    let r = spec.scale;
    match spec.kind {
        SpaceKind::Euclidean => (&x.0 - &y.0).norm(),
        SpaceKind::Sphere => {
            let chord = (&x.0 - &y.0).norm() / r;
            2.0 * r * (0.5 * chord).min(1.0).asin()
        }
        SpaceKind::Hyperbolic => {
            let u = (&x.0 - &y.0).norm_squared() / (2.0 * x.0[0] * y.0[0]);
            r * acosh1p(u)
        }
    }
}

/// Sphere distance via `arccos(x'y)`; the cross-check branch for
/// [`geodesic_distance`].
pub fn sphere_distance_arccos(spec: &SpaceSpec, x: &Point, y: &Point) -> Result<f64> {
    if spec.kind != SpaceKind::Sphere {
        return Err(Error::InvalidSpace("arccos form only applies to spheres".into()));
    }
    ensure_valid(spec, x)?;
    ensure_valid(spec, y)?;
    let r = spec.scale;
    let cos = (x.0.dot(&y.0) / (r * r)).clamp(-1.0, 1.0);
    Ok(r * cos.acos())
}

/// Maps a point and a time of `M^n_K` to the unit-curvature model.
pub fn to_unit_model(spec: &SpaceSpec, x: &Point, t: f64) -> (Point, f64) {
    let r = spec.scale;
    let t_unit = t / (r * r);
    match spec.kind {
        SpaceKind::Sphere => (Point(&x.0 / r), t_unit),
        _ => (x.clone(), t_unit),
    }
}

/// Inverse of [`to_unit_model`].
pub fn from_unit_model(spec: &SpaceSpec, x: &Point, t: f64) -> (Point, f64) {
    let r = spec.scale;
    let t_k = t * r * r;
    match spec.kind {
        SpaceKind::Sphere => (Point(&x.0 * r), t_k),
        _ => (x.clone(), t_k),
    }
}
