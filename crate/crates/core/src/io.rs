//! File formats: paths CSV, summary JSON, convergence CSV and flat
//! `key=value` config text.
//!
//! Floats in CSV are written with 17 significant digits, which round-trips
//! every `f64` exactly.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ensemble::Trace;
use crate::error::{Error, Result};
use crate::verify::ConvergenceTable;

pub const PATHS_HEADER: &str = "t,path,dist,target,abs_err";
pub const CONVERGENCE_HEADER: &str = "dt,paths,mean_sup_err,max_sup_err,rms_err";

/// `x` in scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_paths_csv<W: Write>(mut w: W, traces: &[Trace]) -> Result<()> {
    if traces.is_empty() {
        return Err(Error::InvalidArgument("no paths to write".into()));
    }
    writeln!(w, "{PATHS_HEADER}")?;
    for tr in traces {
        for ((t, d), r) in tr.t.iter().zip(&tr.dist).zip(&tr.target) {
            writeln!(
                w,
                "{},{},{},{},{}",
                format_float(*t),
                tr.path_index,
                format_float(*d),
                format_float(*r),
                format_float((d - r).abs())
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parses [`write_paths_csv`] output back into traces, grouped by path in
/// order of first appearance.
pub fn read_paths_csv(text: &str) -> Result<Vec<Trace>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == PATHS_HEADER => {}
        other => return Err(Error::InvalidArgument(format!("expected header {PATHS_HEADER:?}, got {other:?}"))),
    }
    let mut traces: Vec<Trace> = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::InvalidArgument(format!("line {}: {what}", no + 2));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(bad("expected 5 columns"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("bad number {s:?}")));
        let path = cols[1].trim().parse::<u64>().map_err(|_| bad("bad path index"))?;
        let (t, d, r) = (num(cols[0])?, num(cols[2])?, num(cols[3])?);
        match traces.last_mut() {
            Some(tr) if tr.path_index == path => {
                tr.t.push(t);
                tr.dist.push(d);
                tr.target.push(r);
            }
            _ => traces.push(Trace { path_index: path, t: vec![t], dist: vec![d], target: vec![r] }),
        }
    }
    Ok(traces)
}

/// Run summary written next to the paths CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub space: String,
    pub n: usize,
    #[serde(rename = "K")]
    pub curvature: f64,
    pub profile: String,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub paths: u64,
    pub seed: u64,
    pub mean_sup_err: f64,
    pub max_sup_err: f64,
    pub rms_err: f64,
    pub pass: bool,
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_summary_json<W: Write>(w: W, summary: &Summary) -> Result<()> {
    write_json(w, summary)
}

pub fn write_convergence_csv<W: Write>(mut w: W, table: &ConvergenceTable) -> Result<()> {
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_float(r.dt),
            r.paths,
            format_float(r.mean_sup_err),
            format_float(r.max_sup_err),
            format_float(r.rms_err)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `key = value` lines. Blank lines and everything after `#` are
/// ignored; repeated keys are an error.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key=value", no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::InvalidArgument(format!("config line {}: empty key", no + 1)));
        }
        if !seen.insert(k.to_string()) {
            return Err(Error::InvalidArgument(format!("config key {k:?} given twice")));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}
