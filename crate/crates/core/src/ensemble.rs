//! Fan-out of independent paths over a worker pool.
//!
//! Every path owns its noise stream `(seed, path_index)`, and results come
//! back in path order, so the worker count never changes an outcome. Without
//! the `parallel` feature the same API runs sequentially.

use crate::engine::{check_path_inputs, run_path, StepConfig};
use crate::error::{Error, Result};
use crate::model_space::{Point, SpaceSpec};
use crate::noise::NoiseStream;
use crate::profiles::DistanceProfile;

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "DETCOUPLE_THREADS";

/// Parses [`THREADS_ENV`]; `None` when unset or empty.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` with `threads` workers (all logical cores when `None`).
#[cfg(feature = "parallel")]
pub fn with_threads<T: Send, F: FnOnce() -> T + Send>(threads: Option<usize>, f: F) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<T: Send, F: FnOnce() -> T + Send>(_threads: Option<usize>, f: F) -> Result<T> {
    Ok(f())
}

/// `f(0), f(1), ..., f(count - 1)` in order. On failure, the error of the
/// lowest failing index is returned.
pub fn map_paths<T, F>(count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    let results: Vec<Result<T>> = {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(&f).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<T>> = (0..count).map(&f).collect();
    results.into_iter().collect()
}

/// Sequential reference for [`map_paths`].
pub fn map_paths_sequential<T, F>(count: u64, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T>,
{
    (0..count).map(f).collect()
}

/// An ensemble of coupled paths sharing a start, profile and step size.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub spec: SpaceSpec,
    pub profile: DistanceProfile,
    pub x0: Point,
    pub y0: Point,
    pub horizon: f64,
    pub cfg: StepConfig,
    pub seed: u64,
    pub paths: u64,
    /// Fine draws per step; see [`NoiseStream::with_substeps`].
    pub substeps: u32,
}

/// Per-path tracking statistics and end states.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    pub path_index: u64,
    pub sup_err: f64,
    pub sum_sq_err: f64,
    pub samples: usize,
    pub x_end: Point,
    pub y_end: Point,
}

/// `t`, `dist` and `target` columns of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub path_index: u64,
    pub t: Vec<f64>,
    pub dist: Vec<f64>,
    pub target: Vec<f64>,
}

impl Trace {
    pub fn sup_err(&self) -> f64 {
        self.dist.iter().zip(&self.target).map(|(d, r)| (d - r).abs()).fold(0.0, f64::max)
    }
}

impl From<&crate::engine::PathRecord> for Trace {
    fn from(rec: &crate::engine::PathRecord) -> Self {
        Self {
            path_index: rec.path_index,
            t: rec.samples.iter().map(|s| s.t).collect(),
            dist: rec.samples.iter().map(|s| s.dist).collect(),
            target: rec.samples.iter().map(|s| s.target).collect(),
        }
    }
}

impl Ensemble {
    pub fn new(spec: SpaceSpec, profile: DistanceProfile, x0: Point, y0: Point, horizon: f64, cfg: StepConfig) -> Self {
        Self { spec, profile, x0, y0, horizon, cfg, seed: 0, paths: 1, substeps: 1 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_paths(mut self, paths: u64) -> Self {
        self.paths = paths;
        self
    }

    pub fn with_substeps(mut self, substeps: u32) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    pub fn stream(&self, path_index: u64) -> NoiseStream {
        NoiseStream::new(self.seed, path_index).with_substeps(self.substeps)
    }

    /// Validates the start, the profile and the step config once for all
    /// paths.
    pub fn check(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one path".into()));
        }
        self.cfg.validate(self.spec.kind())?;
        check_path_inputs(&self.spec, &self.profile, &self.x0, &self.y0, self.horizon)
    }

    pub fn summary_of(&self, path_index: u64) -> Result<PathSummary> {
        let mut out = PathSummary {
            path_index,
            sup_err: 0.0,
            sum_sq_err: 0.0,
            samples: 0,
            x_end: self.x0.clone(),
            y_end: self.y0.clone(),
        };
        let mut stream = self.stream(path_index);
        run_path(&self.spec, &self.profile, &self.x0, &self.y0, self.horizon, &self.cfg, &mut stream, |s| {
            let err = (s.dist - s.target).abs();
            out.sup_err = out.sup_err.max(err);
            out.sum_sq_err += err * err;
            out.samples += 1;
            out.x_end = s.x.clone();
            out.y_end = s.y.clone();
        })?;
        Ok(out)
    }

    pub fn trace_of(&self, path_index: u64) -> Result<Trace> {
        let mut tr = Trace { path_index, t: Vec::new(), dist: Vec::new(), target: Vec::new() };
        let mut stream = self.stream(path_index);
        run_path(&self.spec, &self.profile, &self.x0, &self.y0, self.horizon, &self.cfg, &mut stream, |s| {
            tr.t.push(s.t);
            tr.dist.push(s.dist);
            tr.target.push(s.target);
        })?;
        Ok(tr)
    }

    pub fn summaries(&self) -> Result<Vec<PathSummary>> {
        self.check()?;
        map_paths(self.paths, |i| self.summary_of(i))
    }

    pub fn summaries_sequential(&self) -> Result<Vec<PathSummary>> {
        self.check()?;
        map_paths_sequential(self.paths, |i| self.summary_of(i))
    }

    pub fn traces(&self) -> Result<Vec<Trace>> {
        self.check()?;
        map_paths(self.paths, |i| self.trace_of(i))
    }
}
