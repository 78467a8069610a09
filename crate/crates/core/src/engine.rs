//! Euler–Maruyama stepping of a coupled pair.
//!
//! All stepping happens in the unit-curvature model; points and times of
//! `M^n_K` are mapped in and out through [`to_unit_model`]. `X` is driven by
//! `dB`, `Y` by `dW = J dB + K dC` with `(J, K)` built at the left endpoint of
//! the step.
//!
//! The coupling is fed the target's position inside the admissibility band.
//! With `theta = (rho'(t) - lo(rho(t))) / (hi(rho(t)) - lo(rho(t)))` from the
//! profile, the rate requested at the current state distance `d` is
//! `lo(d) + theta (hi(d) - lo(d))`. When `d = rho(t)` this is exactly
//! `rho'(t)`; off the target it stays admissible, so discretization drift
//! never produces an out-of-band request, and extreme profiles keep
//! `gamma = +-1`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::coupling::{build_euclidean, build_hyperbolic, build_sphere, hyperbolic_eta, CouplingMatrices};
use crate::error::{Error, Result};
use crate::model_space::{
    distance_unchecked, ensure_valid, from_unit_model, to_unit_model, Point, SpaceKind, SpaceSpec,
};
use crate::noise::NoiseStream;
use crate::profiles::{admissible_bounds, check_admissibility_default, DistanceProfile};

/// Allowed mismatch between `d(x0, y0)` and `rho(0)`.
pub const INITIAL_DISTANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Plain Euler step, followed by renormalization on spheres.
    EulerProject,
    /// Exact geometric update of the hyperbolic first coordinate, Euler for
    /// the rest.
    EulerLogFirstCoord,
}

impl Scheme {
    pub fn default_for(kind: SpaceKind) -> Self {
        match kind {
            SpaceKind::Hyperbolic => Scheme::EulerLogFirstCoord,
            _ => Scheme::EulerProject,
        }
    }
}

/// How the requested rate is derived from the profile at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateRule {
    /// Keep the target's relative position in the band (module docs).
    BandFraction,
    /// Pass `rho'(t)` through unchanged; fails when the state has drifted to
    /// a distance where it is out of band, unless `clamp_derivative` is set.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    pub enforce_distance: bool,
    pub scheme: Scheme,
    pub rate_rule: RateRule,
    /// With [`RateRule::Literal`], clamp out-of-band requests onto the band
    /// instead of failing.
    pub clamp_derivative: bool,
}

impl StepConfig {
    pub fn new(kind: SpaceKind, dt: f64) -> Self {
        Self {
            dt,
            enforce_distance: false,
            scheme: Scheme::default_for(kind),
            rate_rule: RateRule::BandFraction,
            clamp_derivative: false,
        }
    }

    pub fn with_enforce_distance(mut self, on: bool) -> Self {
        self.enforce_distance = on;
        self
    }

    pub fn with_rate_rule(mut self, rule: RateRule) -> Self {
        self.rate_rule = rule;
        self
    }

    pub fn with_clamp_derivative(mut self, on: bool) -> Self {
        self.clamp_derivative = on;
        self
    }

    pub fn validate(&self, kind: SpaceKind) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if kind == SpaceKind::Sphere && self.scheme == Scheme::EulerLogFirstCoord {
            return Err(Error::InvalidArgument("the log first-coordinate scheme is hyperbolic only".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub t: f64,
    pub x: Point,
    pub y: Point,
}

impl CoupledState {
    pub fn new(spec: &SpaceSpec, x: Point, y: Point) -> Result<Self> {
        ensure_valid(spec, &x)?;
        ensure_valid(spec, &y)?;
        Ok(Self { t: 0.0, x, y })
    }
}

/// One sample of a path, in `M^n_K` units.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Point,
    pub y: Point,
    pub dist: f64,
    pub target: f64,
}

impl Sample {
    pub fn abs_err(&self) -> f64 {
        (self.dist - self.target).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub spec: SpaceSpec,
    pub seed: u64,
    pub path_index: u64,
    pub samples: Vec<Sample>,
}

/// Time grid `0, dt, 2dt, ..., T` with a shortened final step.
pub fn time_grid(dt: f64, horizon: f64) -> Vec<f64> {
    let steps = step_count(dt, horizon);
    (0..=steps).map(|k| if k == steps { horizon } else { k as f64 * dt }).collect()
}

fn step_count(dt: f64, horizon: f64) -> usize {
    if horizon <= 0.0 {
        return 0;
    }
    let ratio = horizon / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() <= 1e-9 * ratio.max(1.0) {
        steps as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Requested distance rate at state distance `dist`, given the profile value
/// `(rho, drho)` in the unit model.
fn requested_rate(spec: &SpaceSpec, cfg: &StepConfig, dist: f64, rho: f64, drho: f64) -> Result<f64> {
    match cfg.rate_rule {
        RateRule::Literal => {
            if cfg.clamp_derivative {
                let (lo, hi) = admissible_bounds(spec, dist)?;
                Ok(drho.clamp(lo, hi))
            } else {
                Ok(drho)
            }
        }
        RateRule::BandFraction => {
            let (lo_t, hi_t) = admissible_bounds(spec, rho)?;
            let (lo, hi) = admissible_bounds(spec, dist)?;
            let width = hi_t - lo_t;
            if width <= 0.0 {
                // n = 1: the band is a single point
                return Ok(lo);
            }
            let theta = ((drho - lo_t) / width).clamp(0.0, 1.0);
            Ok(lo + theta * (hi - lo))
        }
    }
}

/// `(J, K)` for a unit-model state. `dist` is the state's distance and `rate`
/// the requested distance rate there.
pub fn coupling_for_state(unit: &SpaceSpec, x: &Point, y: &Point, dist: f64, rate: f64) -> Result<CouplingMatrices> {
    match unit.kind() {
        SpaceKind::Euclidean => build_euclidean(unit.dim(), &(&x.0 - &y.0), dist, rate),
        SpaceKind::Sphere => build_sphere(x, y, dist.cos(), -dist.sin() * rate),
        SpaceKind::Hyperbolic => build_hyperbolic(x, y, hyperbolic_eta(x, y), dist.sinh() * rate),
    }
}

fn advance(unit: &SpaceSpec, scheme: Scheme, p: &Point, noise: &DVector<f64>, dt: f64) -> Result<Point> {
    let n = unit.dim() as f64;
    let x = &p.0;
    Ok(Point(match unit.kind() {
        SpaceKind::Euclidean => x + noise,
        SpaceKind::Sphere => {
            let tangential = noise - x * x.dot(noise);
            (x + tangential - x * (0.5 * n * dt)).normalize()
        }
        SpaceKind::Hyperbolic => {
            let x1 = x[0];
            let mut next = x + noise * x1;
            match scheme {
                Scheme::EulerLogFirstCoord => {
                    next[0] = x1 * (noise[0] - 0.5 * (n - 1.0) * dt).exp();
                }
                Scheme::EulerProject => {
                    next[0] -= 0.5 * (n - 2.0) * x1 * dt;
                    if !(next[0] > 0.0) {
                        return Err(Error::InvalidPoint(format!("first coordinate left the half-space: {}", next[0])));
                    }
                }
            }
            next
        }
    }))
}

/// Moves `y` along the geodesic through `x` and `y` to distance `rho` from `x`
/// (unit model).
pub fn place_at_distance(unit: &SpaceSpec, x: &Point, y: &Point, rho: f64) -> Result<Point> {
    match unit.kind() {
        SpaceKind::Euclidean => {
            let z = &y.0 - &x.0;
            let norm = z.norm();
            if !(norm > 0.0) {
                return Err(Error::Degenerate("cannot orient a geodesic through coincident points".into()));
            }
            Ok(Point(&x.0 + z * (rho / norm)))
        }
        SpaceKind::Sphere => {
            let u = &y.0 - &x.0 * x.0.dot(&y.0);
            let norm = u.norm();
            if !(norm > 0.0) {
                return Err(Error::Degenerate("geodesic through X and Y is not unique".into()));
            }
            Ok(Point((&x.0 * rho.cos() + u * (rho.sin() / norm)).normalize()))
        }
        SpaceKind::Hyperbolic => {
            let hx = to_hyperboloid(x);
            let hy = to_hyperboloid(y);
            let cosh_d = 1.0 + hyperbolic_eta(x, y);
            let sinh_d = ((cosh_d - 1.0) * (cosh_d + 1.0)).sqrt();
            if !(sinh_d > 0.0) {
                return Err(Error::Degenerate("cannot orient a geodesic through coincident points".into()));
            }
            let dir = (hy - &hx * cosh_d) / sinh_d;
            Ok(from_hyperboloid(&(hx * rho.cosh() + dir * rho.sinh())))
        }
    }
}

/// Half-space point to the hyperboloid `h0^2 - h1^2 - |h~|^2 = 1`.
fn to_hyperboloid(x: &Point) -> DVector<f64> {
    let n = x.len();
    let x1 = x.0[0];
    let a = x.0.norm_squared();
    let mut h = DVector::zeros(n + 1);
    h[0] = (a + 1.0) / (2.0 * x1);
    h[1] = (a - 1.0) / (2.0 * x1);
    for i in 1..n {
        h[i + 1] = x.0[i] / x1;
    }
    h
}

fn from_hyperboloid(h: &DVector<f64>) -> Point {
    let n = h.len() - 1;
    let x1 = 1.0 / (h[0] - h[1]);
    let mut x = DVector::zeros(n);
    x[0] = x1;
    for i in 1..n {
        x[i] = h[i + 1] * x1;
    }
    Point(x)
}

/// One step in the unit model from `(x, y)` at unit time `s`.
fn step_unit(
    spec: &SpaceSpec,
    unit: &SpaceSpec,
    x: &Point,
    y: &Point,
    s: f64,
    dt: f64,
    profile: &DistanceProfile,
    cfg: &StepConfig,
    stream: &mut NoiseStream,
) -> Result<(Point, Point)> {
    let (rho, drho) = profile.eval_unit(spec, s)?;
    let dist = distance_unchecked(unit, x, y);
    let rate = requested_rate(unit, cfg, dist, rho, drho)?;
    let c = coupling_for_state(unit, x, y, dist, rate)?;
    let (db, dc) = stream.driving_increments(unit.ambient_dim(), dt);
    let dw = &c.j * &db + &c.k * &dc;
    let x_next = advance(unit, cfg.scheme, x, &db, dt)?;
    let mut y_next = advance(unit, cfg.scheme, y, &dw, dt)?;
    if cfg.enforce_distance {
        let (rho_next, _) = profile.eval_unit(spec, s + dt)?;
        y_next = place_at_distance(unit, &x_next, &y_next, rho_next)?;
    }
    Ok((x_next, y_next))
}

/// Advances `state` by `cfg.dt` (in `M^n_K` time units).
pub fn step(
    spec: &SpaceSpec,
    state: &CoupledState,
    profile: &DistanceProfile,
    cfg: &StepConfig,
    stream: &mut NoiseStream,
) -> Result<CoupledState> {
    cfg.validate(spec.kind())?;
    let unit = spec.unit();
    let r2 = spec.scale() * spec.scale();
    let (x, s) = to_unit_model(spec, &state.x, state.t);
    let (y, _) = to_unit_model(spec, &state.y, state.t);
    let (xn, yn) = step_unit(spec, &unit, &x, &y, s, cfg.dt / r2, profile, cfg, stream)
        .map_err(|e| Error::Step { t: state.t, source: Box::new(e) })?;
    let t = state.t + cfg.dt;
    Ok(CoupledState { t, x: from_unit_model(spec, &xn, s).0, y: from_unit_model(spec, &yn, s).0 })
}

/// Borrowed view of a sample handed to path observers (`M^n_K` units).
pub struct SampleView<'a> {
    pub index: usize,
    pub t: f64,
    pub x: &'a Point,
    pub y: &'a Point,
    pub dist: f64,
    pub target: f64,
}

/// Runs one path on [`time_grid`]`(dt, horizon)`, calling `observe` on every
/// sample including `t = 0`. Performs no admissibility pre-check.
#[allow(clippy::too_many_arguments)]
pub fn run_path<F>(
    spec: &SpaceSpec,
    profile: &DistanceProfile,
    x0: &Point,
    y0: &Point,
    horizon: f64,
    cfg: &StepConfig,
    stream: &mut NoiseStream,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(SampleView<'_>),
{
    cfg.validate(spec.kind())?;
    let unit = spec.unit();
    let r = spec.scale();
    let r2 = r * r;
    let times = time_grid(cfg.dt, horizon);
    let (mut x, _) = to_unit_model(spec, x0, 0.0);
    let (mut y, _) = to_unit_model(spec, y0, 0.0);
    let emit = |index: usize, t: f64, x: &Point, y: &Point, observe: &mut F| -> Result<()> {
        let dist = r * distance_unchecked(&unit, x, y);
        let target = profile.eval(t)?.0;
        let (xk, _) = from_unit_model(spec, x, 0.0);
        let (yk, _) = from_unit_model(spec, y, 0.0);
        observe(SampleView { index, t, x: &xk, y: &yk, dist, target });
        Ok(())
    };
    emit(0, 0.0, &x, &y, &mut observe)?;
    for (k, w) in times.windows(2).enumerate() {
        let (t0, t1) = (w[0], w[1]);
        let (xn, yn) = step_unit(spec, &unit, &x, &y, t0 / r2, (t1 - t0) / r2, profile, cfg, stream)
            .map_err(|e| Error::Step { t: t0, source: Box::new(e) })?;
        x = xn;
        y = yn;
        emit(k + 1, t1, &x, &y, &mut observe)?;
    }
    Ok(())
}

/// Checks the starting pair against `rho(0)` and the profile against the
/// band on `[0, horizon]`.
pub fn check_path_inputs(
    spec: &SpaceSpec,
    profile: &DistanceProfile,
    x0: &Point,
    y0: &Point,
    horizon: f64,
) -> Result<()> {
    ensure_valid(spec, x0)?;
    ensure_valid(spec, y0)?;
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be finite and non-negative, got {horizon}")));
    }
    if horizon > profile.horizon() {
        return Err(Error::OutOfRange { t: horizon, end: profile.horizon() });
    }
    let d0 = distance_unchecked(spec, x0, y0);
    let rho0 = profile.eval(0.0)?.0;
    if (d0 - rho0).abs() > INITIAL_DISTANCE_TOL * rho0.max(1.0) {
        return Err(Error::InvalidArgument(format!("initial distance {d0} does not match rho(0) = {rho0}")));
    }
    if horizon > 0.0 {
        let report = check_admissibility_default(spec, profile, horizon)?;
        if !report.admissible {
            return Err(Error::InvalidProfile(format!(
                "profile is not admissible at t = {}: {}",
                report.first_violation_time.unwrap_or(0.0),
                report.first_violation.unwrap_or_default()
            )));
        }
    }
    Ok(())
}

/// Simulates and records one coupled path.
pub fn simulate_path(
    spec: &SpaceSpec,
    profile: &DistanceProfile,
    x0: &Point,
    y0: &Point,
    horizon: f64,
    cfg: &StepConfig,
    stream: &mut NoiseStream,
) -> Result<PathRecord> {
    check_path_inputs(spec, profile, x0, y0, horizon)?;
    let (seed, path_index) = (stream.seed(), stream.path_index());
    let mut samples = Vec::with_capacity(step_count(cfg.dt, horizon) + 1);
    run_path(spec, profile, x0, y0, horizon, cfg, stream, |s| {
        samples.push(Sample { t: s.t, x: s.x.clone(), y: s.y.clone(), dist: s.dist, target: s.target })
    })?;
    Ok(PathRecord { spec: *spec, seed, path_index, samples })
}

/// A starting pair at distance `rho0`: `x0` is a fixed base point and `y0`
/// lies along the first tangent direction.
pub fn canonical_start(spec: &SpaceSpec, rho0: f64) -> Result<(Point, Point)> {
    let dim = spec.ambient_dim();
    let r = spec.scale();
    match spec.kind() {
        SpaceKind::Euclidean => {
            let x = Point(DVector::zeros(dim));
            let mut y = DVector::zeros(dim);
            y[0] = rho0;
            Ok((x, Point(y)))
        }
        SpaceKind::Sphere => {
            if rho0 >= spec.diameter() {
                return Err(Error::InvalidArgument("rho0 reaches the antipodal distance".into()));
            }
            let a = rho0 / r;
            let x = Point::basis(dim, 0);
            let mut y = DVector::zeros(dim);
            y[0] = a.cos();
            y[1] = a.sin();
            Ok((Point(&x.0 * r), Point(y * r)))
        }
        SpaceKind::Hyperbolic => {
            // vertical geodesic: d((1,0..), (e^a,0..)) = a
            let x = Point::basis(dim, 0);
            let y = Point(&x.0 * (rho0 / r).exp());
            Ok((x, y))
        }
    }
}
