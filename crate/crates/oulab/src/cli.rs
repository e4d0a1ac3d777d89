//! Argument parsing, config-file merging and subcommand dispatch.
//!
//! Every setting resolves as: command-line flag, then `--config` file, then
//! the built-in default.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use oulab_core::{
    observations, ou_trajectory, Estimator, EstimatorKind, GaussianDriver, KnownContext, OuParams,
    SamplerKind, TimePoint, TrajectoryGrid,
};
use serde::{Deserialize, Serialize};

use crate::error::AppError;
use crate::experiments::{
    fourier_sampler, run_consistency, run_covariance_check, run_equidistribution_check,
    run_moment_check, CovarianceConfigRecord, DriverChoice, EquidistConfigRecord, EquidistTarget,
    ExperimentConfig, ExperimentError, MomentConfigRecord, ParamsRecord, SamplerRecord,
};
use crate::fixture::{
    emit, provenance_lines, write_csv, FixtureSample, ObservationRow, TrajectoryRow,
};
use crate::report::{config_hash, Envelope};
use crate::tables;

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_MU: f64 = -3.0;
pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_X0: f64 = 3.0;
pub const DEFAULT_T: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRUNCATION: usize = 800;

#[derive(Debug, Parser)]
#[command(
    name = "oulab",
    version,
    about = "Ornstein-Uhlenbeck simulation and estimation"
)]
pub struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate observations at one time, or paths on a time grid.
    Simulate(SimulateArgs),
    /// Estimate parameters from an observation file.
    Estimate(EstimateArgs),
    /// Evaluate the estimators on the bundled sample at n = 5, 10, ..., 100.
    ReproduceTables(TablesArgs),
    /// Monte Carlo consistency or covariance experiment.
    Experiment(ExperimentArgs),
    /// Compare sample moments of simulated observations with the closed form.
    Moments(MomentsArgs),
    /// Bin counts of the driver's uniform or Gaussian stream.
    Equidist(EquidistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    Exact,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    X0,
    Mu,
    Theta,
    Sigma2,
}

impl From<EstimatorChoice> for EstimatorKind {
    fn from(c: EstimatorChoice) -> Self {
        match c {
            EstimatorChoice::X0 => EstimatorKind::X0,
            EstimatorChoice::Mu => EstimatorKind::Mu,
            EstimatorChoice::Theta => EstimatorKind::Theta,
            EstimatorChoice::Sigma2 => EstimatorKind::SigmaSq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckChoice {
    Consistency,
    Covariance,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Observation time.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DriverArgs {
    /// ChaCha8 seed.
    #[arg(long, conflicts_with = "weyl_stream")]
    pub seed: Option<u64>,
    /// Use the Weyl sequence of the k-th prime instead of the PRNG.
    #[arg(long)]
    pub weyl_stream: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SamplerArgs {
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerChoice>,
    /// Number of sine terms in the Fourier sampler [default: 800].
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub driver: DriverArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Number of observations [default: 100].
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated time grid; switches to path output.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["horizon", "steps"])]
    pub grid: Option<Vec<f64>>,
    /// Uniform grid end point; switches to path output.
    #[arg(long, requires = "steps")]
    pub horizon: Option<f64>,
    #[arg(long, requires = "horizon")]
    pub steps: Option<usize>,
    /// Number of paths on the grid [default: 2].
    #[arg(long)]
    pub paths: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Observation CSV with header `k,z`.
    pub input: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Estimator to run; all four when omitted.
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorChoice>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    /// Observation CSV to use instead of the bundled sample.
    #[arg(long, value_name = "PATH", conflicts_with = "printed")]
    pub input: Option<PathBuf>,
    /// Use the bundled sample exactly as printed, including the k = 27 misprint.
    #[arg(long)]
    pub printed: bool,
    /// Machine-readable output; a text table when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub check: Option<CheckChoice>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub driver: DriverArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Restrict the consistency check to one estimator.
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorChoice>,
    /// Comma-separated sample sizes [default: 100,1000,10000].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// [default: 200]
    #[arg(long)]
    pub replications: Option<usize>,
    /// Worker threads; 0 uses all cores [default: 0].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Earlier time of the covariance check [default: t/2].
    #[arg(long)]
    pub s: Option<f64>,
    /// Number of paths of the covariance check [default: 100000].
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub driver: DriverArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// [default: 100000]
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EquidistArgs {
    #[command(flatten)]
    pub driver: DriverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// [default: 10000]
    #[arg(long)]
    pub n: Option<usize>,
    /// [default: 10]
    #[arg(long)]
    pub bins: Option<usize>,
    /// [default: uniform]
    #[arg(long, value_enum)]
    pub target: Option<EquidistTarget>,
}

/// Contents of a `--config` file. All keys are optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub x0: Option<f64>,
    pub t: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub weyl_stream: Option<u32>,
    pub truncation: Option<usize>,
    pub sampler: Option<SamplerChoice>,
    pub estimator: Option<EstimatorChoice>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub paths: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub replications: Option<usize>,
    pub threads: Option<usize>,
    pub check: Option<CheckChoice>,
    pub s: Option<f64>,
    pub bins: Option<usize>,
    pub target: Option<EquidistTarget>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        toml::from_str(&text).map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))
    }
}

impl ModelArgs {
    fn params(&self, f: &FileConfig) -> Result<OuParams, AppError> {
        OuParams::new(
            self.theta.or(f.theta).unwrap_or(DEFAULT_THETA),
            self.mu.or(f.mu).unwrap_or(DEFAULT_MU),
            self.sigma.or(f.sigma).unwrap_or(DEFAULT_SIGMA),
            self.x0.or(f.x0).unwrap_or(DEFAULT_X0),
        )
        .map_err(AppError::usage)
    }

    fn time(&self, f: &FileConfig) -> Result<f64, AppError> {
        let t = self.t.or(f.t).unwrap_or(DEFAULT_T);
        TimePoint::new(t).map_err(AppError::usage)?;
        if t == 0.0 {
            return Err(AppError::Usage("observation time must be positive".into()));
        }
        Ok(t)
    }
}

impl DriverArgs {
    fn resolve(&self, f: &FileConfig) -> Result<DriverChoice, AppError> {
        match (self.seed, self.weyl_stream) {
            (Some(seed), _) => Ok(DriverChoice::Prng { seed }),
            (None, Some(stream)) => Ok(DriverChoice::Weyl { stream }),
            (None, None) => match (f.seed, f.weyl_stream) {
                (Some(_), Some(_)) => Err(AppError::Usage(
                    "config sets both seed and weyl_stream".into(),
                )),
                (_, Some(stream)) => Ok(DriverChoice::Weyl { stream }),
                (seed, None) => Ok(DriverChoice::Prng {
                    seed: seed.unwrap_or(DEFAULT_SEED),
                }),
            },
        }
    }
}

impl SamplerArgs {
    fn resolve(&self, f: &FileConfig) -> Result<SamplerKind, AppError> {
        match self.sampler.or(f.sampler).unwrap_or(SamplerChoice::Exact) {
            SamplerChoice::Exact => Ok(SamplerKind::Exact),
            SamplerChoice::Fourier => {
                let n = self
                    .truncation
                    .or(f.truncation)
                    .unwrap_or(DEFAULT_TRUNCATION);
                fourier_sampler(n).map_err(AppError::usage)
            }
        }
    }
}

impl OutputArgs {
    fn format(&self, f: &FileConfig, default: Format) -> Format {
        self.format.or(f.format).unwrap_or(default)
    }

    fn out(&self, f: &FileConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| f.out.clone())
    }
}

impl From<ExperimentError> for AppError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(m) => AppError::Usage(m),
            ExperimentError::Model(e) => AppError::Usage(e.to_string()),
        }
    }
}

fn model_err(e: oulab_core::Error) -> AppError {
    AppError::Usage(e.to_string())
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), AppError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Simulate(a) => simulate(&a, &file),
        Command::Estimate(a) => estimate(&a, &file),
        Command::ReproduceTables(a) => reproduce_tables(&a, &file),
        Command::Experiment(a) => experiment(&a, &file),
        Command::Moments(a) => moments(&a, &file),
        Command::Equidist(a) => equidist(&a, &file),
    }
}

#[derive(Debug, Serialize)]
struct SimulateRecord {
    command: &'static str,
    params: ParamsRecord,
    driver: DriverChoice,
    #[serde(flatten)]
    layout: SimulateLayout,
}

#[derive(Debug, Serialize)]
#[serde(tag = "layout", rename_all = "lowercase")]
enum SimulateLayout {
    Observations {
        t: f64,
        n: usize,
        sampler: SamplerRecord,
    },
    Paths {
        grid: Vec<f64>,
        paths: usize,
    },
}

fn simulate(a: &SimulateArgs, f: &FileConfig) -> Result<(), AppError> {
    let params = a.model.params(f)?;
    let driver = a.driver.resolve(f)?;
    let format = a.output.format(f, Format::Csv);
    let out = a.output.out(f);
    let grid = match (&a.grid, a.horizon, a.steps) {
        (Some(g), _, _) => Some(TrajectoryGrid::new(g.clone()).map_err(model_err)?),
        (None, Some(h), Some(s)) => Some(TrajectoryGrid::uniform(h, s).map_err(model_err)?),
        _ => None,
    };
    let bytes = match grid {
        None => {
            let t = a.model.time(f)?;
            let n = a.n.or(f.n).unwrap_or(100);
            let sampler = a.sampler.resolve(f)?;
            let record = SimulateRecord {
                command: "simulate",
                params: (&params).into(),
                driver,
                layout: SimulateLayout::Observations {
                    t,
                    n,
                    sampler: sampler.into(),
                },
            };
            let z = observations(
                &params,
                TimePoint::new(t).map_err(model_err)?,
                driver.base(),
                n,
                sampler,
            )
            .map_err(model_err)?;
            let rows: Vec<ObservationRow> = z
                .into_iter()
                .enumerate()
                .map(|(i, z)| ObservationRow { k: i as u64 + 1, z })
                .collect();
            render(format, "simulate", &record, &rows, &driver)?
        }
        Some(grid) => {
            let paths = a.paths.or(f.paths).unwrap_or(2);
            let record = SimulateRecord {
                command: "simulate",
                params: (&params).into(),
                driver,
                layout: SimulateLayout::Paths {
                    grid: grid.times().to_vec(),
                    paths,
                },
            };
            let mut rows = Vec::with_capacity(paths * grid.times().len());
            for p in 0..paths {
                let mut d = GaussianDriver::new(driver.replication(p)).map_err(model_err)?;
                for (t, x) in ou_trajectory(&params, &grid, &mut d).map_err(model_err)? {
                    rows.push(TrajectoryRow {
                        path_id: p as u64,
                        t,
                        x,
                    });
                }
            }
            render(format, "simulate", &record, &rows, &driver)?
        }
    };
    emit(out.as_deref(), &bytes)
}

/// CSV with a provenance preamble, or the JSON envelope.
fn render<C: Serialize, R: Serialize>(
    format: Format,
    command: &str,
    record: &C,
    rows: &[R],
    driver: &DriverChoice,
) -> Result<Vec<u8>, AppError> {
    match format {
        Format::Csv => write_csv(
            &provenance_lines(&config_hash(record), &driver.label()),
            rows,
        ),
        Format::Json => Envelope::new(command, record, rows).to_json(),
    }
}

#[derive(Debug, Serialize)]
struct EstimateRecord {
    command: &'static str,
    input: String,
    t: f64,
    known: ParamsRecord,
    estimators: Vec<&'static str>,
}

/// Outcome of one estimator on one input file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub estimator: &'static str,
    pub n: usize,
    pub estimate: Option<f64>,
    pub error: Option<String>,
    /// Infimum of the running estimates from each index onwards.
    pub suffix_min: Vec<Option<f64>>,
    pub suffix_max: Vec<Option<f64>>,
    /// Running estimate after each observation; `None` where undefined.
    pub trace: Vec<Option<f64>>,
}

#[derive(Debug, Serialize)]
struct EstimateCsvRow<'a> {
    estimator: &'a str,
    n: usize,
    estimate: Option<f64>,
    suffix_min: Option<f64>,
    suffix_max: Option<f64>,
    error: Option<&'a str>,
}

fn estimate(a: &EstimateArgs, f: &FileConfig) -> Result<(), AppError> {
    let params = a.model.params(f)?;
    let t = a.model.time(f)?;
    let format = a.output.format(f, Format::Json);
    let out = a.output.out(f);
    let kinds: Vec<EstimatorKind> = match a.estimator.or(f.estimator) {
        Some(c) => vec![c.into()],
        None => EstimatorKind::ALL.to_vec(),
    };
    let fixture = FixtureSample::read(&a.input)?;
    let values = fixture.values();
    let ctx = KnownContext::from_params(&params);
    let record = EstimateRecord {
        command: "estimate",
        input: fixture.source.clone(),
        t,
        known: (&params).into(),
        estimators: kinds.iter().map(|k| k.name()).collect(),
    };

    let mut results = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let trace = Estimator::new(kind, t, &ctx)
            .and_then(|e| e.trace(&values))
            .map_err(model_err)?;
        let (estimate, error) = match trace.last() {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        results.push(EstimateResult {
            estimator: kind.name(),
            n: values.len(),
            estimate,
            error,
            suffix_min: trace.suffix_min().to_vec(),
            suffix_max: trace.suffix_max().to_vec(),
            trace: trace
                .points()
                .iter()
                .map(|p| p.as_ref().ok().copied())
                .collect(),
        });
    }

    let bytes = match format {
        Format::Json => Envelope::new("estimate", &record, &results).to_json()?,
        Format::Csv => {
            let rows: Vec<EstimateCsvRow> = results
                .iter()
                .map(|r| EstimateCsvRow {
                    estimator: r.estimator,
                    n: r.n,
                    estimate: r.estimate,
                    suffix_min: r.suffix_min.last().copied().flatten(),
                    suffix_max: r.suffix_max.last().copied().flatten(),
                    error: r.error.as_deref(),
                })
                .collect();
            write_csv(&provenance_lines(&config_hash(&record), "none"), &rows)?
        }
    };
    emit(out.as_deref(), &bytes)?;
    let failed: Vec<String> = results
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.estimator)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AppError::Estimation(failed.join("; ")))
    }
}

#[derive(Debug, Serialize)]
struct TablesRecord {
    command: &'static str,
    source: String,
    t: f64,
    params: ParamsRecord,
}

fn reproduce_tables(a: &TablesArgs, f: &FileConfig) -> Result<(), AppError> {
    let fixture = match (&a.input, a.printed) {
        (Some(p), _) => FixtureSample::read(p)?,
        (None, true) => FixtureSample::bundled_printed(),
        (None, false) => FixtureSample::bundled(),
    };
    let t = tables::reproduce(&fixture)?;
    let record = TablesRecord {
        command: "reproduce-tables",
        source: fixture.source.clone(),
        t: tables::T,
        params: (&tables::reference_params()).into(),
    };
    let out = a.out.clone().or_else(|| f.out.clone());
    let bytes = match a.format.or(f.format) {
        None => format!(
            "{}{}",
            provenance_lines(&config_hash(&record), "none"),
            t.to_text()
        )
        .into_bytes(),
        Some(Format::Csv) => write_csv(&provenance_lines(&config_hash(&record), "none"), &t.rows)?,
        Some(Format::Json) => Envelope::new("reproduce-tables", &record, &t.rows).to_json()?,
    };
    emit(out.as_deref(), &bytes)
}

fn experiment(a: &ExperimentArgs, f: &FileConfig) -> Result<(), AppError> {
    let params = a.model.params(f)?;
    let t = a.model.time(f)?;
    let driver = a.driver.resolve(f)?;
    let format = a.output.format(f, Format::Json);
    let out = a.output.out(f);
    let bytes = match a.check.or(f.check).unwrap_or(CheckChoice::Consistency) {
        CheckChoice::Consistency => {
            let cfg = ExperimentConfig {
                params,
                t,
                sample_sizes: a
                    .sizes
                    .clone()
                    .or_else(|| f.sizes.clone())
                    .unwrap_or_else(|| vec![100, 1_000, 10_000]),
                replications: a.replications.or(f.replications).unwrap_or(200),
                driver,
                sampler: a.sampler.resolve(f)?,
                estimators: match a.estimator.or(f.estimator) {
                    Some(c) => vec![c.into()],
                    None => EstimatorKind::ALL.to_vec(),
                },
            };
            let report = run_consistency(&cfg, a.threads.or(f.threads).unwrap_or(0))?;
            render(format, "experiment", &cfg.record(), &report.rows, &driver)?
        }
        CheckChoice::Covariance => {
            let s = a.s.or(f.s).unwrap_or(t / 2.0);
            let n = a.n.or(f.n).unwrap_or(100_000);
            let report = run_covariance_check(&params, s, t, n, driver)?;
            let record = CovarianceConfigRecord {
                experiment: "covariance",
                params: (&params).into(),
                s,
                t,
                n_paths: n,
                driver,
            };
            render(format, "experiment", &record, &[report], &driver)?
        }
    };
    emit(out.as_deref(), &bytes)
}

fn moments(a: &MomentsArgs, f: &FileConfig) -> Result<(), AppError> {
    let params = a.model.params(f)?;
    let t = a.model.time(f)?;
    let driver = a.driver.resolve(f)?;
    let sampler = a.sampler.resolve(f)?;
    let n = a.n.or(f.n).unwrap_or(100_000);
    let report = run_moment_check(&params, t, n, driver, sampler)?;
    let record = MomentConfigRecord {
        experiment: "moments",
        params: (&params).into(),
        t,
        n,
        driver,
        sampler: sampler.into(),
    };
    let bytes = render(
        a.output.format(f, Format::Json),
        "moments",
        &record,
        &[report],
        &driver,
    )?;
    emit(a.output.out(f).as_deref(), &bytes)
}

fn equidist(a: &EquidistArgs, f: &FileConfig) -> Result<(), AppError> {
    let driver = a.driver.resolve(f)?;
    let n = a.n.or(f.n).unwrap_or(10_000);
    let bins = a.bins.or(f.bins).unwrap_or(10);
    let target = a.target.or(f.target).unwrap_or(EquidistTarget::Uniform);
    let report = run_equidistribution_check(driver, n, bins, target)?;
    let record = EquidistConfigRecord {
        experiment: "equidist",
        driver,
        n,
        bins,
        target,
    };
    let bytes = match a.output.format(f, Format::Json) {
        Format::Json => {
            Envelope::new("equidist", &record, std::slice::from_ref(&report)).to_json()?
        }
        Format::Csv => write_csv(
            &provenance_lines(&report.config_hash, &driver.label()),
            &report.bins,
        )?,
    };
    emit(a.output.out(f).as_deref(), &bytes)
}
