//! The subcommands, callable without a process boundary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lrsetd_core::{
    hosvd, nmae, project_assign, psnr, reconstruction_snr, rse, solve_with_clock, truncate_core, Clock,
    DenseTensor, MissingSpec, ObservationMask, PsnrScope,
};
use serde::Serialize;

use crate::config::{load_input, write_output, ExperimentConfig, InputFormat, Metric};
use crate::error::{CliError, Result};
use crate::report::{
    write_hosvd_csv, write_json, write_trace_csv, CompletionSummary, MetricValues, Real, TraceRow,
};
use crate::traffic::Tensorization;

struct StdClock(Instant);

impl Clock for StdClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

fn default_peak(format: InputFormat) -> Option<f64> {
    matches!(format, InputFormat::Ppm | InputFormat::Pgm).then_some(255.0)
}

/// Undefined metrics (for example NMAE with nothing missing) are reported as `None`.
fn metric(v: lrsetd_core::Result<f64>) -> Option<Real> {
    v.ok().map(Real)
}

/// Loads the data, masks it, solves, and writes the requested outputs.
///
/// The input is taken as ground truth: the solver sees only its entries on
/// the mask, and metrics compare the recovery against the full input.
pub fn run_complete(cfg: &ExperimentConfig) -> Result<CompletionSummary> {
    let (_, format) = cfg.input_format()?;
    let truth = load_input(cfg)?;
    let dims = truth.dims().to_vec();
    let solver = cfg.solver_config(&dims)?;
    let mask = cfg.observation_mask(&dims)?;
    let observed = project_assign(&DenseTensor::zeros(&dims)?, &mask, &truth)?;

    let timings = cfg.timings.unwrap_or(false);
    let clock = StdClock(Instant::now());
    let rep = solve_with_clock(&observed, &mask, &solver, Some(&truth), &clock)?;
    let seconds = clock.seconds();

    let scope = cfg.psnr_scope.unwrap_or(PsnrScope::Complement);
    let peak = cfg.peak.or(default_peak(format));
    let metrics = MetricValues {
        nmae: cfg
            .wants(Metric::Nmae)
            .then(|| metric(nmae(&truth, &rep.recovered, &mask)))
            .flatten(),
        psnr: cfg
            .wants(Metric::Psnr)
            .then(|| metric(psnr(&truth, &rep.recovered, &mask, peak, scope)))
            .flatten(),
        rse: cfg.wants(Metric::Rse).then(|| metric(rse(&truth, &rep.recovered))).flatten(),
    };
    let summary = CompletionSummary {
        dims,
        observed: mask.len(),
        missing: mask.complement_len(),
        iterations: rep.iterations,
        termination: rep.termination,
        metrics,
        seconds: timings.then_some(seconds),
        solver,
        experiment: cfg.echo(),
        trace: rep.trace.iter().map(|r| TraceRow::new(r, timings)).collect(),
    };

    if let Some(out) = &cfg.out {
        write_output(out, &rep.recovered, cfg.tensorize.unwrap_or(Tensorization::None))?;
    }
    if let Some(path) = &cfg.report {
        write_json(path, &summary)?;
    }
    if let Some(path) = &cfg.trace_csv {
        write_trace_csv(path, &summary.trace)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct HosvdDemoConfig {
    pub input: PathBuf,
    pub format: Option<InputFormat>,
    pub tensorize: Tensorization,
    /// Multilinear ranks; the full dimensions when absent.
    pub ranks: Option<Vec<usize>>,
    pub grid: Vec<f64>,
    /// Data are multiplied by this before the decomposition, so thresholds
    /// apply on that scale; `1/255` for images and `1` otherwise when absent.
    pub value_scale: Option<f64>,
    /// CSV of `(tn, sparsity, snr)`; standard output when absent.
    pub csv: Option<PathBuf>,
    /// Directory for one reconstruction per threshold.
    pub image_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HosvdRow {
    pub tn: f64,
    pub sparsity: f64,
    pub snr: f64,
}

pub fn run_hosvd_demo(cfg: &HosvdDemoConfig) -> Result<Vec<HosvdRow>> {
    let exp = ExperimentConfig {
        input: Some(cfg.input.clone()),
        format: cfg.format,
        tensorize: Some(cfg.tensorize),
        ..Default::default()
    };
    let (_, format) = exp.input_format()?;
    let image = matches!(format, InputFormat::Ppm | InputFormat::Pgm);
    let scale = cfg.value_scale.unwrap_or(if image { 1.0 / 255.0 } else { 1.0 });
    if !(scale.is_finite() && scale > 0.0) {
        return Err(CliError::Config(format!("value scale must be positive, got {scale}")));
    }
    if cfg.grid.is_empty() || cfg.grid.iter().any(|tn| !(*tn >= 0.0)) {
        return Err(CliError::Config("the threshold grid must be nonempty and nonnegative".into()));
    }
    let data = load_input(&exp)?.scale(scale);
    let ranks = cfg.ranks.clone().unwrap_or_else(|| data.dims().to_vec());
    let model = hosvd(&data, &ranks).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(dir) = &cfg.image_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut rows = Vec::with_capacity(cfg.grid.len());
    for &tn in &cfg.grid {
        let (truncated, sparsity) = truncate_core(&model, tn)?;
        let approx = truncated.reconstruct()?;
        let snr = reconstruction_snr(&data, &approx)?;
        if let Some(dir) = &cfg.image_dir {
            let ext = match (image, data.dims()) {
                (true, [_, _, 3]) => "ppm",
                (true, [_, _, 1]) => "pgm",
                _ => "lrt",
            };
            let path = dir.join(format!("tn_{tn}.{ext}"));
            write_output(&path, &approx.scale(1.0 / scale), cfg.tensorize)?;
        }
        rows.push(HosvdRow { tn, sparsity, snr });
    }
    let table: Vec<_> = rows.iter().map(|r| (r.tn, r.sparsity, r.snr)).collect();
    match &cfg.csv {
        Some(path) => {
            let mut buf = Vec::new();
            write_hosvd_csv(&mut buf, &table).expect("write to memory");
            std::fs::write(path, buf).map_err(|e| CliError::io(path, e))?;
        }
        None => {
            let stdout = std::io::stdout();
            write_hosvd_csv(&mut stdout.lock(), &table).map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct MaskSummary {
    pub dims: Vec<usize>,
    pub observed: usize,
    pub missing: usize,
    pub spec: MissingSpec,
}

/// Builds the mask of `spec` for `dims` and writes it to `out`.
pub fn run_mask_gen(dims: &[usize], spec: &MissingSpec, out: &Path) -> Result<MaskSummary> {
    let mask = spec.to_mask(dims).map_err(|e| CliError::Config(e.to_string()))?;
    crate::tensor_file::write_mask(out, &mask)?;
    Ok(MaskSummary {
        dims: dims.to_vec(),
        observed: mask.len(),
        missing: mask.complement_len(),
        spec: spec.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct MetricsConfig {
    pub truth: PathBuf,
    pub recovered: PathBuf,
    pub mask: PathBuf,
    pub peak: Option<f64>,
    pub scope: PsnrScope,
}

fn read_any(path: &Path) -> Result<DenseTensor> {
    load_input(&ExperimentConfig {
        input: Some(path.to_path_buf()),
        ..Default::default()
    })
}

pub fn run_metrics(cfg: &MetricsConfig) -> Result<MetricValues> {
    let truth = read_any(&cfg.truth)?;
    let recovered = read_any(&cfg.recovered)?;
    let mask: ObservationMask = crate::tensor_file::read_mask(&cfg.mask)?;
    if truth.dims() != recovered.dims() || truth.dims() != mask.dims() {
        return Err(CliError::Config(format!(
            "dims differ: truth {:?}, recovered {:?}, mask {:?}",
            truth.dims(),
            recovered.dims(),
            mask.dims()
        )));
    }
    let peak = cfg.peak.or_else(|| InputFormat::infer(&cfg.truth).and_then(default_peak));
    Ok(MetricValues {
        nmae: metric(nmae(&truth, &recovered, &mask)),
        psnr: metric(psnr(&truth, &recovered, &mask, peak, cfg.scope)),
        rse: metric(rse(&truth, &recovered)),
    })
}

