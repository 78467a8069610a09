//! Command-line front end: flag and config-file parsing, and the
//! `simulate` / `check` / `verify` / `converge` runners.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use detcouple::engine::{canonical_start, RateRule, StepConfig};
use detcouple::ensemble::{threads_from_env, with_threads, Ensemble};
use detcouple::io::{format_float, parse_key_values, write_convergence_csv, write_json, write_paths_csv, Summary};
use detcouple::profiles::{admissible_bounds, check_admissibility_default, uniform_grid, DistanceProfile, ProfileKind, Table};
use detcouple::verify::{
    all_pass, convergence_study, distance_error_stats, identity_scan, marginal_study, oracle_agreement,
    rotation_ensemble_ends, TrackingStats, VerifyReport, MIN_MARGINAL_PATHS,
};
use detcouple::{Point, SpaceKind, SpaceSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] detcouple::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "detcouple", version, about = "Couplings of Brownian motions with deterministic distance")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Check,
    Verify,
    Converge,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an ensemble and write paths.csv and summary.json
    Simulate(RunArgs),
    /// Check a profile against the admissibility band
    Check(RunArgs),
    /// Run the verification suites and write verify.json
    Verify(RunArgs),
    /// Tracking error against step size; writes convergence.csv
    Converge(RunArgs),
}

impl Command {
    pub fn split(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Simulate(a) => (CommandKind::Simulate, a),
            Command::Check(a) => (CommandKind::Check, a),
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::Converge(a) => (CommandKind::Converge, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// euclidean, sphere or hyperbolic
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Curvature; defaults to 0, 1 or -1 by space
    #[arg(long = "K", allow_hyphen_values = true)]
    pub curvature: Option<f64>,
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Initial distance in degrees of arc (spheres)
    #[arg(long = "rho0-deg")]
    pub rho0_deg: Option<f64>,
    /// CSV with header t,rho for the tabulated profile
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub paths: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "enforce-distance")]
    pub enforce_distance: bool,
    #[arg(long = "clamp-derivative")]
    pub clamp_derivative: bool,
    /// band-fraction or literal
    #[arg(long = "rate-rule")]
    pub rate_rule: Option<String>,
    /// Pass threshold for the mean sup tracking error
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated step sizes for converge
    #[arg(long = "dt-list")]
    pub dt_list: Option<String>,
    /// Random states per identity scan in verify
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "space",
    "dim",
    "K",
    "profile",
    "rho0",
    "rho0-deg",
    "table",
    "dt",
    "T",
    "paths",
    "seed",
    "enforce-distance",
    "clamp-derivative",
    "rate-rule",
    "tol",
    "dt-list",
    "samples",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub space: SpaceKind,
    pub dim: usize,
    pub curvature: f64,
    pub profile: ProfileKind,
    pub rho0: f64,
    pub table: Option<PathBuf>,
    pub dt: f64,
    pub horizon: f64,
    pub paths: u64,
    pub seed: u64,
    pub enforce_distance: bool,
    pub clamp_derivative: bool,
    pub rate_rule: RateRule,
    pub tol: f64,
    pub dt_list: Vec<f64>,
    pub samples: u64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn spec(&self) -> Result<SpaceSpec, CliError> {
        Ok(SpaceSpec::from_curvature(self.dim, self.curvature)?)
    }

    pub fn build_profile(&self, spec: &SpaceSpec) -> Result<DistanceProfile, CliError> {
        Ok(match self.profile {
            ProfileKind::Constant => DistanceProfile::constant(self.rho0)?,
            ProfileKind::Tabulated => {
                let path = self.table.as_ref().ok_or_else(|| usage("profile tabulated needs --table"))?;
                DistanceProfile::tabulated(Table::from_csv_path(path)?)
            }
            kind => DistanceProfile::builtin(kind, spec, self.rho0)?,
        })
    }

    fn step_config(&self) -> StepConfig {
        StepConfig::new(self.space, self.dt)
            .with_enforce_distance(self.enforce_distance)
            .with_rate_rule(self.rate_rule)
            .with_clamp_derivative(self.clamp_derivative)
    }

    pub fn ensemble(&self) -> Result<Ensemble, CliError> {
        let spec = self.spec()?;
        let profile = self.build_profile(&spec)?;
        let rho0 = profile.eval(0.0)?.0;
        let (x0, y0) = canonical_start(&spec, rho0)?;
        Ok(Ensemble::new(spec, profile, x0, y0, self.horizon, self.step_config())
            .with_seed(self.seed)
            .with_paths(self.paths))
    }
}

fn parse_num<T: std::str::FromStr>(field: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse::<T>().map_err(|_| usage(format!("{field}: cannot parse {v:?}")))
}

fn parse_bool(field: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(usage(format!("{field}: expected true or false, got {v:?}"))),
    }
}

fn parse_rate_rule(v: &str) -> Result<RateRule, CliError> {
    match v.trim() {
        "band-fraction" => Ok(RateRule::BandFraction),
        "literal" => Ok(RateRule::Literal),
        _ => Err(usage(format!("rate-rule: expected band-fraction or literal, got {v:?}"))),
    }
}

fn parse_dt_list(v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| parse_num::<f64>("dt-list", s)).collect()
}

/// Merges the config file (if any) under the flags and validates the result.
pub fn parse_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut a = args.clone();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        for (k, v) in parse_key_values(&text)? {
            match k.as_str() {
                "space" => a.space = a.space.or(Some(v)),
                "dim" => a.dim = a.dim.or(Some(parse_num("dim", &v)?)),
                "K" => a.curvature = a.curvature.or(Some(parse_num("K", &v)?)),
                "profile" => a.profile = a.profile.or(Some(v)),
                "rho0" => a.rho0 = a.rho0.or(Some(parse_num("rho0", &v)?)),
                "rho0-deg" => a.rho0_deg = a.rho0_deg.or(Some(parse_num("rho0-deg", &v)?)),
                "table" => a.table = a.table.or(Some(PathBuf::from(v))),
                "dt" => a.dt = a.dt.or(Some(parse_num("dt", &v)?)),
                "T" => a.horizon = a.horizon.or(Some(parse_num("T", &v)?)),
                "paths" => a.paths = a.paths.or(Some(parse_num("paths", &v)?)),
                "seed" => a.seed = a.seed.or(Some(parse_num("seed", &v)?)),
                "enforce-distance" => a.enforce_distance |= parse_bool("enforce-distance", &v)?,
                "clamp-derivative" => a.clamp_derivative |= parse_bool("clamp-derivative", &v)?,
                "rate-rule" => a.rate_rule = a.rate_rule.or(Some(v)),
                "tol" => a.tol = a.tol.or(Some(parse_num("tol", &v)?)),
                "dt-list" => a.dt_list = a.dt_list.or(Some(v)),
                "samples" => a.samples = a.samples.or(Some(parse_num("samples", &v)?)),
                "out" => a.out = a.out.or(Some(PathBuf::from(v))),
                other => {
                    debug_assert!(!KNOWN_KEYS.contains(&other));
                    return Err(usage(format!("unknown config key {other:?}")));
                }
            }
        }
    }
    validate(a)
}

fn validate(a: RunArgs) -> Result<RunConfig, CliError> {
    let space: SpaceKind =
        a.space.as_deref().ok_or_else(|| usage("space is required"))?.parse().map_err(|e| usage(format!("space: {e}")))?;
    let dim = a.dim.unwrap_or(2);
    if dim == 0 {
        return Err(usage("dim must be at least 1"));
    }
    let default_k = match space {
        SpaceKind::Euclidean => 0.0,
        SpaceKind::Sphere => 1.0,
        SpaceKind::Hyperbolic => -1.0,
    };
    let curvature = a.curvature.unwrap_or(default_k);
    let kind_of_k = match curvature {
        k if k > 0.0 => SpaceKind::Sphere,
        k if k < 0.0 => SpaceKind::Hyperbolic,
        _ => SpaceKind::Euclidean,
    };
    if !curvature.is_finite() || kind_of_k != space {
        return Err(usage(format!("K: curvature {curvature} does not describe a {} space", space.name())));
    }
    let profile: ProfileKind = a
        .profile
        .as_deref()
        .unwrap_or("constant")
        .parse()
        .map_err(|e| usage(format!("profile: {e}")))?;
    if profile == ProfileKind::Tabulated && a.table.is_none() {
        return Err(usage("table: profile tabulated needs a table file"));
    }
    if profile != ProfileKind::Tabulated && a.table.is_some() {
        return Err(usage("table: only used with profile tabulated"));
    }
    let rho0 = match (a.rho0, a.rho0_deg) {
        (Some(_), Some(_)) => return Err(usage("rho0: give either rho0 or rho0-deg, not both")),
        (Some(r), None) => r,
        (None, Some(deg)) => {
            if space != SpaceKind::Sphere {
                return Err(usage("rho0-deg: only meaningful on spheres"));
            }
            deg.to_radians() / curvature.sqrt()
        }
        (None, None) if profile == ProfileKind::Tabulated => f64::NAN,
        (None, None) => return Err(usage("rho0 is required")),
    };
    if profile != ProfileKind::Tabulated && !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(usage(format!("rho0 must be positive, got {rho0}")));
    }
    let dt = a.dt.unwrap_or(1e-4);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(usage(format!("dt must be positive, got {dt}")));
    }
    let horizon = a.horizon.unwrap_or(1.0);
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(usage(format!("T must be non-negative, got {horizon}")));
    }
    let paths = a.paths.unwrap_or(100);
    if paths == 0 {
        return Err(usage("paths must be at least 1"));
    }
    let tol = a.tol.unwrap_or(0.05);
    if !(tol >= 0.0) {
        return Err(usage(format!("tol must be non-negative, got {tol}")));
    }
    let dt_list = parse_dt_list(a.dt_list.as_deref().unwrap_or("1e-2,3e-3,1e-3,3e-4,1e-4"))?;
    let samples = a.samples.unwrap_or(10_000);
    if samples == 0 {
        return Err(usage("samples must be at least 1"));
    }
    Ok(RunConfig {
        space,
        dim,
        curvature,
        profile,
        rho0,
        table: a.table,
        dt,
        horizon,
        paths,
        seed: a.seed.unwrap_or(0),
        enforce_distance: a.enforce_distance,
        clamp_derivative: a.clamp_derivative,
        rate_rule: a.rate_rule.as_deref().map(parse_rate_rule).transpose()?.unwrap_or(RateRule::BandFraction),
        tol,
        dt_list,
        samples,
        out: a.out.unwrap_or_else(|| PathBuf::from("out")),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

/// Runs one subcommand; `Ok(true)` iff every check passed.
pub fn run(cmd: CommandKind, cfg: &RunConfig) -> Result<bool, CliError> {
    let threads = threads_from_env()?;
    with_threads(threads, || match cmd {
        CommandKind::Simulate => simulate(cfg),
        CommandKind::Check => check(cfg),
        CommandKind::Verify => verify(cfg),
        CommandKind::Converge => converge(cfg),
    })?
}

fn simulate(cfg: &RunConfig) -> Result<bool, CliError> {
    let ens = cfg.ensemble()?;
    let traces = ens.traces()?;
    let stats = distance_error_stats(&traces)?;
    let pass = stats.mean_sup_err <= cfg.tol;
    prepare_out(&cfg.out)?;
    write_paths_csv(create(&cfg.out.join("paths.csv"))?, &traces)?;
    let summary = Summary {
        space: cfg.space.name().to_string(),
        n: cfg.dim,
        curvature: cfg.curvature,
        profile: cfg.profile.name().to_string(),
        dt: cfg.dt,
        horizon: cfg.horizon,
        paths: cfg.paths,
        seed: cfg.seed,
        mean_sup_err: stats.mean_sup_err,
        max_sup_err: stats.max_sup_err,
        rms_err: stats.rms_err,
        pass,
    };
    write_json(create(&cfg.out.join("summary.json"))?, &summary)?;
    Ok(pass)
}

fn check(cfg: &RunConfig) -> Result<bool, CliError> {
    let spec = cfg.spec()?;
    let profile = cfg.build_profile(&spec)?;
    let report = check_admissibility_default(&spec, &profile, cfg.horizon)?;
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let out = json!({
        "space": cfg.space.name(),
        "n": cfg.dim,
        "K": cfg.curvature,
        "profile": cfg.profile.name(),
        "rho0": profile.eval(0.0)?.0,
        "T": cfg.horizon,
        "admissible": report.admissible,
        "first_violation_time": report.first_violation_time,
        "first_violation": report.first_violation,
        "active_edge": report.saturated_edge(1e-7),
        "min_lo_margin": min(&report.lo_margin),
        "min_hi_margin": min(&report.hi_margin),
    });
    prepare_out(&cfg.out)?;
    write_json(create(&cfg.out.join("admissibility.json"))?, &out)?;
    // plot-ready band on a coarse grid
    let mut w = create(&cfg.out.join("band.csv"))?;
    use std::io::Write;
    let io_err = |source| CliError::Io { path: cfg.out.join("band.csv"), source };
    writeln!(w, "t,rho,drho,lo,hi").map_err(io_err)?;
    for t in uniform_grid(cfg.horizon, 1001) {
        let (rho, drho) = profile.eval(t)?;
        let (lo, hi) = admissible_bounds(&spec, rho).unwrap_or((f64::NAN, f64::NAN));
        writeln!(
            w,
            "{},{},{},{},{}",
            format_float(t),
            format_float(rho),
            format_float(drho),
            format_float(lo),
            format_float(hi)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(report.admissible)
}

fn verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let ens = cfg.ensemble()?;
    let spec = ens.spec;
    let mut reports: Vec<VerifyReport> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();

    reports.extend(identity_scan(&spec.unit(), cfg.samples, cfg.seed)?.reports());

    let stats = TrackingStats::from_summaries(&ens.summaries()?)?;
    reports.push(stats.mean_report(cfg.tol, cfg.dt));

    let mut enforced = ens.clone();
    enforced.cfg.enforce_distance = true;
    let exact = TrackingStats::from_summaries(&enforced.summaries()?)?;
    reports.push(VerifyReport::new("enforced_max_sup_err", exact.max_sup_err, 1e-12, exact.paths, Some(cfg.dt)));

    let mut stroock_x: Option<Vec<Point>> = None;
    if cfg.paths as usize >= MIN_MARGINAL_PATHS && cfg.horizon > 0.0 {
        let m = marginal_study(&ens)?;
        stroock_x = Some(m.ends.iter().map(|e| e.0.clone()).collect());
        reports.push(m.x);
        reports.push(m.y);
    } else {
        skipped.push(format!("mean_decay: needs at least {MIN_MARGINAL_PATHS} paths and T > 0"));
    }

    let unit_sphere_2 = spec.kind() == SpaceKind::Sphere && spec.dim() == 2 && spec.curvature() == 1.0;
    if unit_sphere_2 && cfg.profile == ProfileKind::Constant && cfg.horizon > 0.0 {
        let (ends, sup) = rotation_ensemble_ends(cfg.rho0, cfg.dt, cfg.horizon, cfg.seed, cfg.paths)?;
        reports.push(VerifyReport::new("rotation_oracle_max_sup_err", sup, 1e-12, cfg.paths, Some(cfg.dt)));
        match &stroock_x {
            Some(sx) => {
                let rx: Vec<Point> = ends.into_iter().map(|e| e.0).collect();
                reports.push(oracle_agreement(&spec, &rx, sx, "x")?);
            }
            None => skipped.push("oracle_agreement: needs the mean-decay ensemble".into()),
        }
    } else {
        skipped.push("rotation_oracle: unit 2-sphere with a constant profile only".into());
    }

    let pass = all_pass(&reports);
    prepare_out(&cfg.out)?;
    let out = json!({
        "space": cfg.space.name(),
        "n": cfg.dim,
        "K": cfg.curvature,
        "profile": cfg.profile.name(),
        "dt": cfg.dt,
        "T": cfg.horizon,
        "paths": cfg.paths,
        "seed": cfg.seed,
        "reports": reports,
        "skipped": skipped,
        "pass": pass,
    });
    write_json(create(&cfg.out.join("verify.json"))?, &out)?;
    Ok(pass)
}

/// Slope window for the convergence check.
pub const SLOPE_RANGE: (f64, f64) = (0.4, 1.1);

fn converge(cfg: &RunConfig) -> Result<bool, CliError> {
    let ens = cfg.ensemble()?;
    let table = convergence_study(&ens, &cfg.dt_list)?;
    let pass = if cfg.enforce_distance {
        table.rows.iter().all(|r| r.max_sup_err <= 1e-12)
    } else {
        table.strictly_decreasing && (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&table.slope)
    };
    prepare_out(&cfg.out)?;
    write_convergence_csv(create(&cfg.out.join("convergence.csv"))?, &table)?;
    let out = json!({
        "space": cfg.space.name(),
        "n": cfg.dim,
        "K": cfg.curvature,
        "profile": cfg.profile.name(),
        "T": cfg.horizon,
        "paths": cfg.paths,
        "seed": cfg.seed,
        "slope": table.slope,
        "strictly_decreasing": table.strictly_decreasing,
        "rows": table.rows,
        "pass": pass,
    });
    write_json(create(&cfg.out.join("convergence.json"))?, &out)?;
    Ok(pass)
}
