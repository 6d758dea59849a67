//! JSON run reports and CSV iteration traces.

use std::io::Write;
use std::path::Path;

use lrsetd_core::{IterationRecord, SolverConfig, Termination};
use serde::{Serialize, Serializer};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// A real that serializes non-finite values as the strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

/// Final metrics; `None` when not requested or not defined for the run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MetricValues {
    pub nmae: Option<Real>,
    pub psnr: Option<Real>,
    pub rse: Option<Real>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub rel_change: Real,
    pub lagrangian: Real,
    pub objective: Real,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl TraceRow {
    pub fn new(r: &IterationRecord, timings: bool) -> Self {
        Self {
            iteration: r.iteration,
            rel_change: Real(r.rel_change),
            lagrangian: Real(r.lagrangian),
            objective: Real(r.objective),
            seconds: timings.then_some(r.seconds),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletionSummary {
    pub dims: Vec<usize>,
    pub observed: usize,
    pub missing: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub metrics: MetricValues,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
    pub trace: Vec<TraceRow>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)).map_err(|e| CliError::io(path, e))
}

/// Columns `iteration,rel_change,lagrangian,objective,seconds`; `seconds` is empty without timings.
pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let io = |e| CliError::io(path, e);
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::format(path, e.to_string()))?;
    w.write_record(["iteration", "rel_change", "lagrangian", "objective", "seconds"])
        .map_err(|e| CliError::format(path, e.to_string()))?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            r.rel_change.0.to_string(),
            r.lagrangian.0.to_string(),
            r.objective.0.to_string(),
            r.seconds.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| CliError::format(path, e.to_string()))?;
    }
    w.flush().map_err(io)
}

/// Writes rows of `(tn, sparsity, snr)`.
pub fn write_hosvd_csv(out: &mut impl Write, rows: &[(f64, f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "tn,sparsity,snr")?;
    for (tn, sparsity, snr) in rows {
        writeln!(out, "{tn},{sparsity},{snr}")?;
    }
    Ok(())
}
