use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrsetd::commands::{self, HosvdDemoConfig, MetricsConfig};
use lrsetd::config::{load_input, ExperimentConfig, InputFormat, SpecSource};
use lrsetd::error::{CliError, Result};
use lrsetd::report::to_json;
use lrsetd::scenarios::scenario;
use lrsetd::traffic::Tensorization;
use lrsetd_core::{Init, MissingSpec, PsnrScope, StopDenominator};

/// Low-rank and sparse enhanced Tucker tensor completion.
#[derive(Parser)]
#[command(name = "lrsetd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complete a masked tensor and report recovery metrics.
    Complete(Box<CompleteArgs>),
    /// Truncate the HOSVD core over a threshold grid and report sparsity and SNR.
    HosvdDemo(HosvdArgs),
    /// Write an observation mask.
    MaskGen(MaskGenArgs),
    /// Compare two tensors on the unobserved entries of a mask.
    Metrics(MetricsArgs),
}

fn triple<T: std::str::FromStr>(s: &str) -> std::result::Result<[T; 3], String>
where
    T::Err: std::fmt::Display,
{
    let v = list::<T>(s)?;
    v.try_into().map_err(|v: Vec<T>| format!("expected 3 comma-separated values, got {}", v.len()))
}

fn list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

fn ranks3(s: &str) -> std::result::Result<[usize; 3], String> {
    triple(s)
}
fn reals3(s: &str) -> std::result::Result<[f64; 3], String> {
    triple(s)
}
fn bools3(s: &str) -> std::result::Result<[bool; 3], String> {
    triple(s)
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Stop {
    Oracle,
    Blind,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Scope {
    Complement,
    Full,
}

impl From<Scope> for PsnrScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Complement => PsnrScope::Complement,
            Scope::Full => PsnrScope::Full,
        }
    }
}

/// One of the ways to describe which entries are observed.
#[derive(Args)]
struct SpecArgs {
    /// JSON file with a missing spec.
    #[arg(long)]
    missing_spec: Option<PathBuf>,
    /// Bundled structured-missing scenario for 288-interval, 7-day traffic tensors.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=15))]
    scenario: Option<u8>,
    /// Uniform random sampling with this observed fraction.
    #[arg(long)]
    sample_ratio: Option<f64>,
    /// Seed for the sampled part of the mask.
    #[arg(long)]
    seed: Option<u64>,
}

impl SpecArgs {
    fn source(&self) -> Result<Option<SpecSource>> {
        match (&self.missing_spec, self.scenario) {
            (Some(_), Some(_)) => Err(CliError::Config("give --missing-spec or --scenario, not both".into())),
            (Some(p), None) => Ok(Some(SpecSource::Path(p.clone()))),
            (None, Some(id)) => Ok(Some(SpecSource::Inline(scenario(id.into())?))),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Args)]
struct CompleteArgs {
    /// Flat JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// `none`, `otd:PAIRS,INTERVALS_PER_DAY,DAYS` or `oot:SOURCES,DESTINATIONS,INTERVALS`.
    #[arg(long)]
    tensorize: Option<Tensorization>,
    /// Observation mask file (0/1 tensor).
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecArgs,
    /// traffic-random, traffic-wholeday or image.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_parser = ranks3)]
    ranks: Option<[usize; 3]>,
    #[arg(long, value_parser = reals3)]
    alpha: Option<[f64; 3]>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_parser = reals3)]
    omega: Option<[f64; 3]>,
    /// Per-mode choice of the first-difference regularizer, e.g. `false,true,true`.
    #[arg(long, value_parser = bools3)]
    toeplitz_modes: Option<[bool; 3]>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Denominator of the relative-change stopping rule.
    #[arg(long, value_enum)]
    stop: Option<Stop>,
    /// Initialize the factors randomly from this seed instead of by HOSVD.
    #[arg(long)]
    init_seed: Option<u64>,
    /// Recovered tensor (.lrt, .ppm, .pgm or .csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report; printed to standard output when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    trace_csv: Option<PathBuf>,
    #[arg(long, value_enum)]
    psnr_scope: Option<Scope>,
    #[arg(long)]
    peak: Option<f64>,
    /// Record wall-clock seconds (reports are then no longer reproducible).
    #[arg(long)]
    timings: bool,
}

impl CompleteArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            input: self.input,
            format: self.format,
            tensorize: self.tensorize,
            mask: self.mask,
            missing_spec: self.spec.source()?,
            sample_ratio: self.spec.sample_ratio,
            seed: self.spec.seed,
            preset: self.preset,
            ranks: self.ranks,
            alpha: self.alpha,
            sigma: self.sigma,
            lambda: self.lambda,
            beta: self.beta,
            omega: self.omega,
            toeplitz_modes: self.toeplitz_modes,
            tol: self.tol,
            max_iter: self.max_iter,
            stop_denominator: self.stop.map(|s| match s {
                Stop::Oracle => StopDenominator::Oracle,
                Stop::Blind => StopDenominator::Blind,
            }),
            init: self.init_seed.map(|seed| Init::Random { seed }),
            out: self.out,
            report: self.report,
            trace_csv: self.trace_csv,
            metrics: None,
            psnr_scope: self.psnr_scope.map(Into::into),
            peak: self.peak,
            timings: self.timings.then_some(true),
        };
        Ok(base.overlay(flags))
    }
}

#[derive(Args)]
struct HosvdArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    #[arg(long, default_value = "none")]
    tensorize: Tensorization,
    /// Comma-separated multilinear ranks; full ranks when absent.
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    /// Comma-separated truncation thresholds.
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.05,0.1")]
    grid: Vec<f64>,
    /// Factor applied to the data before decomposition; 1/255 for images, 1 otherwise.
    #[arg(long)]
    value_scale: Option<f64>,
    /// CSV output; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for the reconstruction at each threshold.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct MaskGenArgs {
    /// Comma-separated tensor dimensions.
    #[arg(long, value_delimiter = ',', conflicts_with = "like")]
    dims: Option<Vec<usize>>,
    /// Take the dimensions from this data file.
    #[arg(long)]
    like: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    #[arg(long)]
    tensorize: Option<Tensorization>,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    recovered: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    peak: Option<f64>,
    #[arg(long, value_enum, default_value = "complement")]
    psnr_scope: Scope,
    /// JSON output; standard output when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// `LRSETD_THREADS` must be a positive integer when set. The solver runs on one thread.
fn check_threads() -> Result<()> {
    match std::env::var("LRSETD_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(()),
            _ => Err(CliError::Config(format!("LRSETD_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(()),
    }
}

fn emit(path: Option<&PathBuf>, json: String) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, json).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    check_threads()?;
    match cli.command {
        Command::Complete(args) => {
            let cfg = (*args).into_config()?;
            let summary = commands::run_complete(&cfg)?;
            if cfg.report.is_none() {
                print!("{}", to_json(&summary));
            }
            Ok(())
        }
        Command::HosvdDemo(a) => {
            commands::run_hosvd_demo(&HosvdDemoConfig {
                input: a.input,
                format: a.format,
                tensorize: a.tensorize,
                ranks: a.ranks,
                grid: a.grid,
                value_scale: a.value_scale,
                csv: a.csv,
                image_dir: a.out_dir,
            })?;
            Ok(())
        }
        Command::MaskGen(a) => {
            let dims = match (a.dims, &a.like) {
                (Some(d), None) => d,
                (None, Some(p)) => load_input(&ExperimentConfig {
                    input: Some(p.clone()),
                    format: a.format,
                    tensorize: a.tensorize,
                    ..Default::default()
                })?
                .dims()
                .to_vec(),
                _ => return Err(CliError::Config("give exactly one of --dims and --like".into())),
            };
            let source = a.spec.source()?;
            let mut spec: MissingSpec = match (source, a.spec.sample_ratio) {
                (Some(src), None) => src.load()?,
                (None, Some(r)) => MissingSpec::random(r, 0),
                _ => {
                    return Err(CliError::Config(
                        "give exactly one of --missing-spec, --scenario and --sample-ratio".into(),
                    ))
                }
            };
            if let Some(seed) = a.spec.seed {
                spec.seed = seed;
            }
            let summary = commands::run_mask_gen(&dims, &spec, &a.out)?;
            print!("{}", to_json(&summary));
            Ok(())
        }
        Command::Metrics(a) => {
            let values = commands::run_metrics(&MetricsConfig {
                truth: a.truth,
                recovered: a.recovered,
                mask: a.mask,
                peak: a.peak,
                scope: a.psnr_scope.into(),
            })?;
            emit(a.report.as_ref(), to_json(&values))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
