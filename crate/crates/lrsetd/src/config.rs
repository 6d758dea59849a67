//! Flat JSON experiment configuration.
//!
//! Every field is optional. Values are resolved with the precedence
//! command-line flags, then the config file, then the named preset, then the
//! solver defaults. Relative paths are taken relative to the working directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use lrsetd_core::{
    DenseTensor, Init, MissingSpec, ObservationMask, Preset, PsnrScope, SolverConfig,
    StopDenominator,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::traffic::Tensorization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Lrt,
    Ppm,
    Pgm,
    Csv,
}

impl InputFormat {
    /// Guesses the format from a file extension; a directory is read as a PGM stack.
    pub fn infer(path: &Path) -> Option<Self> {
        if path.is_dir() {
            return Some(Self::Pgm);
        }
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "lrt" => Some(Self::Lrt),
            "ppm" => Some(Self::Ppm),
            "pgm" => Some(Self::Pgm),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Nmae,
    Psnr,
    Rse,
}

/// A missing-data spec given inline or as the path of a JSON file holding one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecSource {
    Path(PathBuf),
    Inline(MissingSpec),
}

impl SpecSource {
    pub fn load(&self) -> Result<MissingSpec> {
        match self {
            Self::Inline(spec) => Ok(spec.clone()),
            Self::Path(p) => load_missing_spec(p),
        }
    }
}

pub fn load_missing_spec(path: &Path) -> Result<MissingSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<InputFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tensorize: Option<Tensorization>,

    /// Observation mask file (0/1 tensor).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing_spec: Option<SpecSource>,
    /// Shorthand for a uniform random spec with this observed fraction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_ratio: Option<f64>,
    /// Overrides the seed of the missing spec.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<[usize; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toeplitz_modes: Option<[bool; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_denominator: Option<StopDenominator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<Init>,

    /// Recovered tensor; the format follows the extension (`.lrt`, `.ppm`, `.pgm`, `.csv`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_csv: Option<PathBuf>,

    /// Metrics to report; all of them when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr_scope: Option<PsnrScope>,
    /// PSNR peak; the maximum of the ground truth when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak: Option<f64>,
    /// Include wall-clock seconds in the report and trace.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `flags` replace those of `self`.
    pub fn overlay(mut self, flags: ExperimentConfig) -> Self {
        overlay!(self, flags;
            input, format, tensorize, mask, missing_spec, sample_ratio, seed,
            preset, ranks, alpha, sigma, lambda, beta, omega, toeplitz_modes, tol, max_iter,
            stop_denominator, init, out, report, trace_csv, metrics, psnr_scope, peak, timings,
        );
        self
    }

    /// The configuration with output paths removed, as echoed in reports.
    pub fn echo(&self) -> Self {
        Self {
            out: None,
            report: None,
            trace_csv: None,
            ..self.clone()
        }
    }

    pub fn input_format(&self) -> Result<(PathBuf, InputFormat)> {
        let input = self
            .input
            .clone()
            .ok_or_else(|| CliError::Config("no input given".into()))?;
        let format = match self.format {
            Some(f) => f,
            None => InputFormat::infer(&input).ok_or_else(|| {
                CliError::Config(format!("cannot infer the format of {}; pass --format", input.display()))
            })?,
        };
        Ok((input, format))
    }

    /// Preset or defaults, then every solver field set here.
    pub fn solver_config(&self, dims: &[usize]) -> Result<SolverConfig> {
        let mut cfg = match &self.preset {
            Some(name) => SolverConfig::preset(Preset::from_str(name)?, dims),
            None => SolverConfig::new(dims),
        };
        if let Some(v) = self.ranks {
            cfg.ranks = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.omega {
            cfg.omega = v;
        }
        if let Some(v) = self.toeplitz_modes {
            cfg.toeplitz_modes = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.stop_denominator {
            cfg.stop_denominator = v;
        }
        if let Some(v) = self.init {
            cfg.init = v;
        }
        cfg.validate(dims)?;
        Ok(cfg)
    }

    /// The observation mask from exactly one of `mask`, `missing_spec` and `sample_ratio`.
    pub fn observation_mask(&self, dims: &[usize]) -> Result<ObservationMask> {
        let given = [self.mask.is_some(), self.missing_spec.is_some(), self.sample_ratio.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(CliError::Config(
                "give exactly one of mask, missing_spec and sample_ratio".into(),
            ));
        }
        if let Some(path) = &self.mask {
            if self.seed.is_some() {
                return Err(CliError::Config("seed has no effect with a mask file".into()));
            }
            let mask = crate::tensor_file::read_mask(path)?;
            if mask.dims() != dims {
                return Err(CliError::Config(format!(
                    "mask dims {:?} do not match data dims {:?}",
                    mask.dims(),
                    dims
                )));
            }
            return Ok(mask);
        }
        let spec = self.missing_spec()?.expect("checked above");
        spec.to_mask(dims).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The missing spec from `missing_spec` or `sample_ratio`, with `seed` applied.
    pub fn missing_spec(&self) -> Result<Option<MissingSpec>> {
        let mut spec = match (&self.missing_spec, self.sample_ratio) {
            (Some(src), _) => src.load()?,
            (None, Some(ratio)) => MissingSpec::random(ratio, 0),
            (None, None) => return Ok(None),
        };
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        Ok(Some(spec))
    }

    pub fn wants(&self, metric: Metric) -> bool {
        self.metrics.as_ref().is_none_or(|m| m.contains(&metric))
    }
}

/// Loads the input named by the config as a tensor.
pub fn load_input(cfg: &ExperimentConfig) -> Result<DenseTensor> {
    let (path, format) = cfg.input_format()?;
    let directive = cfg.tensorize.unwrap_or(Tensorization::None);
    if format != InputFormat::Csv && directive != Tensorization::None {
        return Err(CliError::Config("tensorize applies only to csv input".into()));
    }
    match format {
        InputFormat::Lrt => crate::tensor_file::read_tensor(&path),
        InputFormat::Ppm => crate::images::read_image(&path),
        InputFormat::Pgm if path.is_dir() => crate::images::read_pgm_stack(&path),
        InputFormat::Pgm => crate::images::read_image(&path),
        InputFormat::Csv => {
            let m = crate::traffic::read_traffic_csv(&path)?;
            crate::traffic::tensorize(&m, directive)
        }
    }
}

/// Writes a tensor in the format implied by the extension of `path`.
pub fn write_output(path: &Path, t: &DenseTensor, directive: Tensorization) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "ppm" | "pgm" => crate::images::write_image(path, t),
        "csv" => crate::traffic::write_traffic_csv(path, &crate::traffic::flatten(t, directive)?),
        _ => crate::tensor_file::write_tensor(path, t),
    }
}
