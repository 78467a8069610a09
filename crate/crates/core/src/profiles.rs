//! Deterministic distance profiles `rho(t)` and the admissibility band.
//!
//! A profile is realizable by a co-adapted coupling on `M^n_K` exactly when,
//! for almost every `t`,
//!
//! ```text
//! lo(rho) <= rho'(t) <= hi(rho)
//! lo = -(n-1) c tan(c rho / 2),   hi = lo + 2 (n-1) c / sin(c rho)     (K = c^2 > 0)
//! lo = 0,                         hi = 2 (n-1) / rho                  (K = 0)
//! lo = (n-1) c tanh(c rho / 2),   hi = lo + 2 (n-1) c / sinh(c rho)   (K = -c^2 < 0)
//! ```
//!
//! The built-in extreme profiles saturate one end of the band and bound every
//! admissible profile from below and above.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model_space::{SpaceKind, SpaceSpec};

/// Profiles on spheres must stay below `pi r (1 - POLE_MARGIN)`.
pub const POLE_MARGIN: f64 = 1e-6;
/// Default number of grid points for admissibility checks.
pub const DEFAULT_GRID_POINTS: usize = 10_000;
/// Default tolerance for closed-form profiles.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Constant,
    SphereContracting,
    SphereRepulsive,
    HyperbolicLower,
    HyperbolicUpper,
    EuclideanMaxGrowth,
    Tabulated,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Constant => "constant",
            ProfileKind::SphereContracting => "sphere-contracting",
            ProfileKind::SphereRepulsive => "sphere-repulsive",
            ProfileKind::HyperbolicLower => "hyperbolic-lower",
            ProfileKind::HyperbolicUpper => "hyperbolic-upper",
            ProfileKind::EuclideanMaxGrowth => "euclidean-max-growth",
            ProfileKind::Tabulated => "tabulated",
        }
    }

    /// The space kind a built-in extreme profile belongs to.
    fn home(self) -> Option<SpaceKind> {
        match self {
            ProfileKind::SphereContracting | ProfileKind::SphereRepulsive => Some(SpaceKind::Sphere),
            ProfileKind::HyperbolicLower | ProfileKind::HyperbolicUpper => Some(SpaceKind::Hyperbolic),
            ProfileKind::EuclideanMaxGrowth => Some(SpaceKind::Euclidean),
            ProfileKind::Constant | ProfileKind::Tabulated => None,
        }
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "constant" | "fixed" => ProfileKind::Constant,
            "sphere-contracting" | "contracting" => ProfileKind::SphereContracting,
            "sphere-repulsive" | "repulsive" => ProfileKind::SphereRepulsive,
            "hyperbolic-lower" => ProfileKind::HyperbolicLower,
            "hyperbolic-upper" => ProfileKind::HyperbolicUpper,
            "euclidean-max-growth" | "euclidean-max" => ProfileKind::EuclideanMaxGrowth,
            "tabulated" | "table" => ProfileKind::Tabulated,
            other => return Err(Error::InvalidProfile(format!("unknown profile kind '{other}'"))),
        })
    }
}

/// A user-supplied `(t, rho)` table, interpolated by cubic Hermite splines
/// whose node slopes are centered finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    times: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidProfile("table columns differ in length".into()));
        }
        if times.len() < 2 {
            return Err(Error::InvalidProfile("table needs at least two rows".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidProfile(format!("table must start at t = 0, got {}", times[0])));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("table contains non-finite values".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile(format!(
                "table times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v <= 0.0) {
            return Err(Error::InvalidProfile(format!("table distances must be positive, got {v}")));
        }
        let m = times.len();
        let slopes = (0..m)
            .map(|i| {
                let (a, b) = match i {
                    0 => (0, 1),
                    _ if i == m - 1 => (m - 2, m - 1),
                    _ => (i - 1, i + 1),
                };
                (values[b] - values[a]) / (times[b] - times[a])
            })
            .collect();
        Ok(Self { times, values, slopes })
    }

    /// Reads a two-column CSV with header `t,rho`.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::InvalidProfile("empty table file".into()))?;
        let cols: Vec<_> = header.split(',').map(str::trim).collect();
        if cols != ["t", "rho"] {
            return Err(Error::InvalidProfile(format!("table header must be 't,rho', got '{header}'")));
        }
        let (mut times, mut values) = (Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<_> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::InvalidProfile(format!("row {}: expected 2 fields", lineno + 2)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidProfile(format!("row {}: bad number '{s}'", lineno + 2)))
            };
            times.push(parse(fields[0])?);
            values.push(parse(fields[1])?);
        }
        Self::new(times, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Node slopes (centered differences, one-sided at the ends).
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.end()).contains(&t) {
            return Err(Error::OutOfRange { t, end: self.end() });
        }
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k => (k - 1).min(self.times.len() - 2),
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let rho = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let drho = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        Ok((rho, drho))
    }

    /// Crude `|rho''|` near `t` from the spread of neighbouring node slopes.
    fn curvature_near(&self, t: f64) -> (f64, f64) {
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1);
        let i = k - 1;
        let h = self.times[i + 1] - self.times[i];
        ((self.slopes[i + 1] - self.slopes[i]).abs() / h, h)
    }
}

/// A deterministic target distance `rho(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    kind: ProfileKind,
    rho0: f64,
    /// `n - 1` of the space the closed form was derived for.
    n_minus_1: f64,
    /// `sqrt(|K|)` of that space.
    c: f64,
    table: Option<Table>,
}

impl DistanceProfile {
    pub fn constant(rho0: f64) -> Result<Self> {
        check_rho0(rho0)?;
        Ok(Self { kind: ProfileKind::Constant, rho0, n_minus_1: 0.0, c: 0.0, table: None })
    }

    /// A built-in closed-form profile for `spec`.
    pub fn builtin(kind: ProfileKind, spec: &SpaceSpec, rho0: f64) -> Result<Self> {
        check_rho0(rho0)?;
        if kind == ProfileKind::Tabulated {
            return Err(Error::InvalidProfile("tabulated profiles are built from a table".into()));
        }
        if let Some(home) = kind.home() {
            if home != spec.kind() {
                return Err(Error::InvalidProfile(format!(
                    "{} profile is defined on {} spaces, not {}",
                    kind.name(),
                    home.name(),
                    spec.kind().name()
                )));
            }
        }
        if spec.kind() == SpaceKind::Sphere && rho0 >= spec.diameter() * (1.0 - POLE_MARGIN) {
            return Err(Error::InvalidProfile(format!(
                "rho0 = {rho0} must be below the antipodal distance {}",
                spec.diameter()
            )));
        }
        Ok(Self {
            kind,
            rho0,
            n_minus_1: (spec.dim() - 1) as f64,
            c: spec.sqrt_abs_curvature(),
            table: None,
        })
    }

    pub fn tabulated(table: Table) -> Self {
        Self { kind: ProfileKind::Tabulated, rho0: table.values[0], n_minus_1: 0.0, c: 0.0, table: Some(table) }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn table(&self) -> Option<&Table> {
        self.table.as_ref()
    }

    /// Last time the profile is defined at.
    pub fn horizon(&self) -> f64 {
        self.table.as_ref().map_or(f64::INFINITY, Table::end)
    }

    /// `(rho(t), rho'(t))`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::OutOfRange { t, end: self.horizon() });
        }
        let (rho0, k, c) = (self.rho0, self.n_minus_1, self.c);
        let a = 0.5 * k * c * c * t;
        Ok(match self.kind {
            ProfileKind::Constant => (rho0, 0.0),
            ProfileKind::Tabulated => return self.table.as_ref().unwrap().eval(t),
            ProfileKind::EuclideanMaxGrowth => {
                let rho = (rho0 * rho0 + 4.0 * k * t).sqrt();
                (rho, 2.0 * k / rho)
            }
            ProfileKind::SphereContracting => {
                let s = (-a).exp() * (0.5 * c * rho0).sin();
                let rho = 2.0 / c * s.asin();
                (rho, -k * c * s / (1.0 - s * s).sqrt())
            }
            ProfileKind::SphereRepulsive => {
                let q = (-a).exp() * (0.5 * c * rho0).cos();
                let rho = 2.0 / c * q.acos();
                (rho, k * c * q / (1.0 - q * q).sqrt())
            }
            ProfileKind::HyperbolicLower => {
                let log_s = a + (0.5 * c * rho0).sinh().ln();
                if log_s > 300.0 {
                    (2.0 / c * (log_s + std::f64::consts::LN_2), k * c)
                } else {
                    let s = log_s.exp();
                    (2.0 / c * s.asinh(), k * c * s / (1.0 + s * s).sqrt())
                }
            }
            ProfileKind::HyperbolicUpper => {
                let log_q = a + (0.5 * c * rho0).cosh().ln();
                if log_q > 300.0 {
                    (2.0 / c * (log_q + std::f64::consts::LN_2), k * c)
                } else {
                    let q = log_q.exp();
                    (2.0 / c * q.acosh(), k * c * q / ((q - 1.0) * (q + 1.0)).sqrt())
                }
            }
        })
    }

    /// The profile expressed in the unit-curvature model of `spec`:
    /// `rho_unit(s) = rho(r^2 s) / r`.
    pub fn eval_unit(&self, spec: &SpaceSpec, s: f64) -> Result<(f64, f64)> {
        let r = spec.scale();
        let (rho, drho) = self.eval(r * r * s)?;
        Ok((rho / r, drho * r))
    }
}

fn check_rho0(rho0: f64) -> Result<()> {
    if !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(Error::InvalidProfile(format!("rho0 must be positive and finite, got {rho0}")));
    }
    Ok(())
}

/// The admissible interval `[lo, hi]` for `rho'` at distance `rho`.
pub fn admissible_bounds(spec: &SpaceSpec, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("distance must be positive and finite, got {rho}")));
    }
    let k = (spec.dim() - 1) as f64;
    let c = spec.sqrt_abs_curvature();
    Ok(match spec.kind() {
        SpaceKind::Euclidean => (0.0, 2.0 * k / rho),
        SpaceKind::Sphere => {
            if rho >= spec.diameter() {
                return Err(Error::Domain(format!(
                    "distance {rho} reaches the antipodal distance {}",
                    spec.diameter()
                )));
            }
            let lo = -k * c * (0.5 * c * rho).tan();
            (lo, lo + 2.0 * k * c / (c * rho).sin())
        }
        SpaceKind::Hyperbolic => {
            let lo = k * c * (0.5 * c * rho).tanh();
            (lo, lo + 2.0 * k * c / (c * rho).sinh())
        }
    })
}

/// Min and max reachable distance at time `t` from `rho0`.
pub fn envelope(spec: &SpaceSpec, rho0: f64, t: f64) -> Result<(f64, f64)> {
    let (lo_kind, hi_kind) = match spec.kind() {
        SpaceKind::Euclidean => (ProfileKind::Constant, ProfileKind::EuclideanMaxGrowth),
        SpaceKind::Sphere => (ProfileKind::SphereContracting, ProfileKind::SphereRepulsive),
        SpaceKind::Hyperbolic => (ProfileKind::HyperbolicLower, ProfileKind::HyperbolicUpper),
    };
    let lo = DistanceProfile::builtin(lo_kind, spec, rho0)?.eval(t)?.0;
    let hi = DistanceProfile::builtin(hi_kind, spec, rho0)?.eval(t)?.0;
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub first_violation_time: Option<f64>,
    pub first_violation: Option<String>,
    pub times: Vec<f64>,
    /// `rho' - lo` per grid point (negative = violation below the band).
    pub lo_margin: Vec<f64>,
    /// `hi - rho'` per grid point.
    pub hi_margin: Vec<f64>,
}

impl AdmissibilityReport {
    /// Which band edge the profile sits on at every grid point, if any.
    pub fn saturated_edge(&self, tol: f64) -> Option<&'static str> {
        if self.lo_margin.iter().all(|m| m.abs() <= tol) {
            Some("lower")
        } else if self.hi_margin.iter().all(|m| m.abs() <= tol) {
            Some("upper")
        } else {
            None
        }
    }
}

/// `points` uniformly spaced times covering `[0, horizon]`.
pub fn uniform_grid(horizon: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let last = (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { horizon } else { horizon * i as f64 / last }).collect()
}

/// Checks `lo(rho) - tol <= rho' <= hi(rho) + tol` on `grid`. Tabulated
/// profiles are additionally checked at their own table nodes inside the grid
/// range.
pub fn check_admissibility(
    spec: &SpaceSpec,
    profile: &DistanceProfile,
    grid: &[f64],
    tol: f64,
) -> Result<AdmissibilityReport> {
    check_with(spec, profile, grid, |_| tol)
}

/// [`check_admissibility`] on the default grid over `[0, horizon]`, with
/// [`DEFAULT_TOL`] for closed forms and a curvature-scaled tolerance for
/// tables.
pub fn check_admissibility_default(
    spec: &SpaceSpec,
    profile: &DistanceProfile,
    horizon: f64,
) -> Result<AdmissibilityReport> {
    let grid = uniform_grid(horizon, DEFAULT_GRID_POINTS);
    match profile.table() {
        None => check_with(spec, profile, &grid, |_| DEFAULT_TOL),
        Some(table) => check_with(spec, profile, &grid, |t| {
            let (curv, h) = table.curvature_near(t);
            DEFAULT_TOL.max(10.0 * h * curv)
        }),
    }
}

fn check_with(
    spec: &SpaceSpec,
    profile: &DistanceProfile,
    grid: &[f64],
    tol_at: impl Fn(f64) -> f64,
) -> Result<AdmissibilityReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("admissibility grid is empty".into()));
    }
    if grid[0] != 0.0 {
        return Err(Error::InvalidArgument("admissibility grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("admissibility grid must be increasing".into()));
    }
    let end = *grid.last().unwrap();
    let mut times: Vec<f64> = grid.to_vec();
    if let Some(table) = profile.table() {
        times.extend(table.times().iter().copied().filter(|&t| t <= end));
        times.sort_by(f64::total_cmp);
        times.dedup();
    }
    let upper = spec.diameter() * (1.0 - POLE_MARGIN);
    let mut report = AdmissibilityReport {
        admissible: true,
        first_violation_time: None,
        first_violation: None,
        lo_margin: Vec::with_capacity(times.len()),
        hi_margin: Vec::with_capacity(times.len()),
        times,
    };
    for &t in &report.times {
        let (rho, drho) = profile.eval(t)?;
        let violation = if !(rho > 0.0) || rho >= upper {
            report.lo_margin.push(f64::NEG_INFINITY);
            report.hi_margin.push(f64::NEG_INFINITY);
            Some(format!("rho = {rho} leaves the valid range (0, {upper})"))
        } else {
            let (lo, hi) = admissible_bounds(spec, rho)?;
            let tol = tol_at(t);
            report.lo_margin.push(drho - lo);
            report.hi_margin.push(hi - drho);
            if drho < lo - tol || drho > hi + tol {
                Some(format!("rho' = {drho} outside [{lo}, {hi}] at rho = {rho}"))
            } else {
                None
            }
        };
        if let (Some(msg), true) = (violation, report.admissible) {
            report.admissible = false;
            report.first_violation_time = Some(t);
            report.first_violation = Some(msg);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

    fn s2() -> SpaceSpec {
        SpaceSpec::unit_sphere(2).unwrap()
    }

    #[test]
    fn contracting_at_zero_sits_on_lower_edge() {
        let p = DistanceProfile::builtin(ProfileKind::SphereContracting, &s2(), FRAC_PI_2).unwrap();
        let (rho, drho) = p.eval(0.0).unwrap();
        assert!((rho - FRAC_PI_2).abs() < 1e-15);
        assert!((drho + 1.0).abs() < 1e-15);
    }

    #[test]
    fn contracting_at_two_ln2() {
        // e^{-t/2} = 1/2, so rho = 2 asin(sin(pi/4)/2) = 2 asin(sqrt(2)/4)
        let p = DistanceProfile::builtin(ProfileKind::SphereContracting, &s2(), FRAC_PI_2).unwrap();
        let (rho, drho) = p.eval(2.0 * LN_2).unwrap();
        let expected = 2.0 * (2f64.sqrt() / 4.0).asin();
        assert!((rho - expected).abs() < 1e-15);
        assert!((rho - 0.722_734_247_813_415_6).abs() < 1e-15);
        assert!((drho + (rho / 2.0).tan()).abs() < 1e-15);
    }

    #[test]
    fn constant_profile() {
        assert_eq!(DistanceProfile::constant(1.0).unwrap().eval(7.0).unwrap(), (1.0, 0.0));
        assert!(DistanceProfile::constant(0.0).is_err());
    }

    #[test]
    fn bounds_examples() {
        let (lo, hi) = admissible_bounds(&s2(), FRAC_PI_2).unwrap();
        assert!((lo + 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let (lo, hi) = admissible_bounds(&SpaceSpec::euclidean(3).unwrap(), 2.0).unwrap();
        assert_eq!((lo, hi), (0.0, 2.0));
        for spec in [
            SpaceSpec::euclidean(1).unwrap(),
            SpaceSpec::unit_sphere(1).unwrap(),
            SpaceSpec::unit_hyperbolic(1).unwrap(),
        ] {
            let (lo, hi) = admissible_bounds(&spec, 0.7).unwrap();
            assert_eq!(lo, 0.0);
            assert_eq!(hi, 0.0);
        }
        assert!(matches!(
            admissible_bounds(&s2(), std::f64::consts::PI),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hyperbolic_bounds_match_unit_formula() {
        let h = SpaceSpec::unit_hyperbolic(3).unwrap();
        let (lo, hi) = admissible_bounds(&h, 1.0).unwrap();
        assert!((lo - 2.0 * 0.5f64.tanh()).abs() < 1e-15);
        assert!((hi - lo - 4.0 / 1f64.sinh()).abs() < 1e-15);
    }

    #[test]
    fn admissibility_examples() {
        let grid = uniform_grid(2.0, 201);
        let r = check_admissibility(&s2(), &DistanceProfile::constant(FRAC_PI_2).unwrap(), &grid, 1e-10)
            .unwrap();
        assert!(r.admissible);

        let h2 = SpaceSpec::unit_hyperbolic(2).unwrap();
        let r = check_admissibility(&h2, &DistanceProfile::constant(1.0).unwrap(), &grid, 1e-10).unwrap();
        assert!(!r.admissible);
        assert_eq!(r.first_violation_time, Some(0.0));
        assert!((r.lo_margin[0] + 0.5f64.tanh()).abs() < 1e-15);

        let r2 = SpaceSpec::euclidean(2).unwrap();
        let table = Table::new(vec![0.0, 0.5, 1.0], vec![3.0, 2.5, 2.0]).unwrap();
        let r = check_admissibility(&r2, &DistanceProfile::tabulated(table), &uniform_grid(1.0, 11), 1e-8)
            .unwrap();
        assert!(!r.admissible);
        assert_eq!(r.first_violation_time, Some(0.0));
    }

    #[test]
    fn sphere_profile_crossing_pole_is_a_violation_not_an_error() {
        let table = Table::new(vec![0.0, 1.0], vec![3.0, 3.2]).unwrap();
        let r = check_admissibility(&s2(), &DistanceProfile::tabulated(table), &uniform_grid(1.0, 11), 1e-8)
            .unwrap();
        assert!(!r.admissible);
    }

    #[test]
    fn envelope_examples() {
        let (lo, hi) = envelope(&s2(), FRAC_PI_2, 0.8).unwrap();
        let s = (-0.4f64).exp() * FRAC_PI_4.sin();
        assert!((lo - 2.0 * s.asin()).abs() < 1e-15);
        assert!((hi - 2.0 * s.acos()).abs() < 1e-15);
        for spec in [SpaceSpec::euclidean(4).unwrap(), s2(), SpaceSpec::unit_hyperbolic(3).unwrap()] {
            let (lo, hi) = envelope(&spec, 1.2, 0.0).unwrap();
            assert!((lo - 1.2).abs() < 1e-14 && (hi - 1.2).abs() < 1e-14);
        }
        let (lo, hi) = envelope(&SpaceSpec::euclidean(3).unwrap(), 1.0, 2.0).unwrap();
        assert_eq!((lo, hi), (1.0, 17f64.sqrt()));
    }

    #[test]
    fn hyperbolic_envelope_is_linear_for_large_t() {
        let h3 = SpaceSpec::unit_hyperbolic(3).unwrap();
        let (lo, hi) = envelope(&h3, 1.0, 30.0).unwrap();
        assert!((1.9..=2.1).contains(&(lo / 30.0)));
        assert!((1.9..=2.1).contains(&(hi / 30.0)));
        // far beyond overflow of e^{(n-1)t/2}
        let (lo, hi) = envelope(&h3, 1.0, 1e4).unwrap();
        assert!(lo.is_finite() && hi.is_finite());
        assert!((lo / 1e4 - 2.0).abs() < 1e-3);
    }

    #[test]
    fn table_interpolation_hits_nodes_and_slopes() {
        let t = Table::new(vec![0.0, 1.0, 3.0], vec![1.0, 2.0, 2.5]).unwrap();
        assert_eq!(t.slopes(), &[1.0, 0.5, 0.25]);
        let p = DistanceProfile::tabulated(t);
        assert_eq!(p.eval(1.0).unwrap(), (2.0, 0.5));
        assert_eq!(p.eval(3.0).unwrap(), (2.5, 0.25));
        assert!(matches!(p.eval(3.5), Err(Error::OutOfRange { .. })));
        // a linear table is reproduced exactly
        let lin = DistanceProfile::tabulated(Table::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]).unwrap());
        let (rho, drho) = lin.eval(1.3).unwrap();
        assert!((rho - 2.3).abs() < 1e-14 && (drho - 1.0).abs() < 1e-14);
    }

    #[test]
    fn table_csv_parsing() {
        let t = Table::from_csv_str("t,rho\n0,1.0\n0.5,1.1\n1,1.3\n").unwrap();
        assert_eq!(t.times(), &[0.0, 0.5, 1.0]);
        assert!(Table::from_csv_str("time,rho\n0,1\n1,2\n").is_err());
        assert!(Table::from_csv_str("t,rho\n0,1\n0,2\n").is_err());
        assert!(Table::from_csv_str("t,rho\n0.1,1\n1,2\n").is_err());
        assert!(Table::from_csv_str("t,rho\n0,1\n1,-2\n").is_err());
        assert!(Table::from_csv_str("t,rho\n0,1\n1,x\n").is_err());
    }

    #[test]
    fn builtin_kind_must_match_space() {
        let h = SpaceSpec::unit_hyperbolic(2).unwrap();
        assert!(DistanceProfile::builtin(ProfileKind::SphereContracting, &h, 1.0).is_err());
        assert!(DistanceProfile::builtin(ProfileKind::Constant, &h, 1.0).is_ok());
        assert!(DistanceProfile::builtin(ProfileKind::Constant, &s2(), 3.2).is_err());
    }

    #[test]
    fn scaled_sphere_profiles_follow_curvature_rescaling() {
        // On the sphere of radius 2, rho_K(t) = 2 rho_unit(t / 4) with rho_unit(0) = rho0 / 2.
        let big = SpaceSpec::sphere(3, 0.25).unwrap();
        let p = DistanceProfile::builtin(ProfileKind::SphereContracting, &big, 2.0).unwrap();
        let q = DistanceProfile::builtin(ProfileKind::SphereContracting, &SpaceSpec::unit_sphere(3).unwrap(), 1.0)
            .unwrap();
        for t in [0.0, 0.3, 2.0, 5.0] {
            let (a, da) = p.eval(t).unwrap();
            let (b, db) = q.eval(t / 4.0).unwrap();
            assert!((a - 2.0 * b).abs() < 1e-14);
            assert!((da - db / 2.0).abs() < 1e-14);
            let (u, du) = p.eval_unit(&big, t / 4.0).unwrap();
            assert!((u - b).abs() < 1e-14 && (du - db).abs() < 1e-14);
        }
    }
}
