//! Command-line front end for the `ellou` binary.
//!
//! Exit codes: 0 success, 2 usage error, 3 data or validation error, 4 non-convergence.
//! Frequencies on the command line carry a unit suffix: `cpy` (cycles per time unit, i.e. per
//! year for polar motion) or `rad` (radians per time unit).

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataio::{
    bundled_polar_motion, ingest_eop, series_from_csv, series_to_csv, to_csv, to_json, write_atomic,
    AngleUnit, ColumnMap, EopFormat, DEFAULT_SPACING_TOLERANCE,
};
use crate::error::Error;
use crate::fourier::{
    boxcar_bandpass, dft_with, smooth_periodogram, Band, DftOptions, PhaseReference, SpectralData,
};
use crate::params::{EllipticalParams, GeometricParams};
use crate::sampling::{simulate, ComplexSeries, Scheme, SimConfig, DEFAULT_SUBSTEPS};
use crate::spectral::{aliased_psd, psd, spectral_matrix_grid, FrequencyGrid, DEFAULT_ALIAS_TERMS};
use crate::uncertainty::{
    bootstrap, kernel_density, param_vector, percent_deviation, run_monte_carlo, BootstrapConfig,
    BootstrapSummary, McConfig, McReport, SpectralEstimator, PARAM_NAMES,
};
use crate::whittle::{
    estimate_eccentricity_np, estimate_orientation, fit, FitResult, FitSpec, Likelihood, Model,
};

/// Environment variable holding the worker thread count for replicate-level parallelism.
pub const THREADS_ENV: &str = "ELLOU_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    NotConverged(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(Error::Io(e))
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "ellou",
    version,
    about = "Simulate, analyse and fit elliptical Ornstein-Uhlenbeck processes",
    after_help = "Exit codes: 0 success, 2 usage error, 3 data/validation error, 4 non-convergence.\n\
                  Frequencies take a unit suffix: cpy (cycles per time unit) or rad (radians per time unit).\n\
                  Worker threads: set ELLOU_THREADS."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path; writes CSV `t,x,y`.
    Simulate(SimulateArgs),
    /// Model spectra on the Fourier grid; writes CSV `omega,s_pos,s_neg,r_re,r_im`.
    Spectrum(SpectrumArgs),
    /// Periodogram of a series; writes CSV `omega,I`.
    Periodogram(PeriodogramArgs),
    /// Whittle fit of a series; writes a JSON fit result.
    Fit(FitArgs),
    /// Fit plus frequency-domain bootstrap; writes JSON and optionally the draws as CSV.
    Bootstrap(BootstrapArgs),
    /// Monte Carlo bias/RMSE study; writes JSON and optionally raw estimates as CSV.
    Mc(McArgs),
    /// Boxcar band-pass filter; writes CSV `t,x,y`.
    Filter(FilterArgs),
    /// Convert pole-coordinate text into CSV `t,x,y` (mas, years).
    Ingest(IngestArgs),
    /// Rerun a bundled experiment and write its data files.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Euler,
    Exact,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Euler => Scheme::EulerMaruyama,
            SchemeArg::Exact => Scheme::ExactTransition,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Elliptical,
    Circular,
    FixedBeta,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LikelihoodArg {
    Full,
    Marginal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    Periodogram,
    Epanechnikov,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitArg {
    Arcsec,
    Mas,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Preset {
    /// alpha1 = 0.02, beta1 = 1, alpha2 = -0.5, beta2 = -0.3, sigma2 = 2.
    Eccentric,
    /// alpha1 = 0.002, beta1 = 0.5, alpha2 = 0.3, beta2 = 0.3, sigma2 = 0.15.
    Slow,
}

impl Preset {
    pub fn params(self) -> EllipticalParams {
        match self {
            Preset::Eccentric => EllipticalParams::new(0.02, 1.0, -0.5, -0.3, 2.0),
            Preset::Slow => EllipticalParams::new(0.002, 0.5, 0.3, 0.3, 0.15),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Target {
    /// Monte Carlo bias and RMSE of four Whittle variants.
    McBias,
    /// Monte Carlo versus bootstrap standard errors.
    McStandardErrors,
    /// Annual-oscillation estimates with bootstrap intervals.
    AnnualIntervals,
    /// Model and simulated spectra for both preset parameter sets.
    ExampleSpectra,
    /// Kernel densities of Monte Carlo percentage errors.
    McDensities,
    /// Circular fit to the Chandler band plus the two-sided elliptical diagnostic.
    Chandler,
    /// Elliptical fit to the annual band with beta fixed.
    Annual,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Scale {
    /// Full replicate counts.
    Full,
    /// Reduced replicate counts for a workstation.
    Desk,
}

#[derive(Debug, Args)]
pub struct ParamSource {
    /// JSON parameter file: elliptical (alpha1, beta1, alpha2, beta2, sigma2[, r_re, r_im]) or
    /// geometric (alpha, beta, rho, psi, a2) [path]
    #[arg(long, conflicts_with = "preset")]
    pub params: Option<PathBuf>,
    /// Built-in parameter set [name]
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; standard output when omitted [path]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ParamSource,
    /// Number of output samples [count]
    #[arg(long)]
    pub n: usize,
    /// Output sampling interval [time units]
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Euler steps per output interval [count]
    #[arg(long, default_value_t = DEFAULT_SUBSTEPS)]
    pub substeps: usize,
    /// Time simulated and discarded before the first sample; default 50/alpha1 [time units]
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Random seed [integer]
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent stream index under the same seed [integer]
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
    /// Time-stepping scheme [name]
    #[arg(long, value_enum, default_value_t = SchemeArg::Euler)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: ParamSource,
    /// Series length defining the Fourier grid [count]
    #[arg(long)]
    pub n: usize,
    /// Sampling interval [time units]
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Aliasing terms on each side; 0 disables folding [count]
    #[arg(long, default_value_t = DEFAULT_ALIAS_TERMS)]
    pub k_max: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV with header `t,x,y` and regular `t` [path]
    #[arg(long)]
    pub input: PathBuf,
    /// Allowed deviation of each time gap from the first one [time units]
    #[arg(long, default_value_t = DEFAULT_SPACING_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct PeriodogramArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Subtract the sample mean before transforming [flag]
    #[arg(long)]
    pub mean_subtract: bool,
    /// Epanechnikov smoothing bandwidth; unsmoothed when omitted [frequency with unit]
    #[arg(long, allow_hyphen_values = true)]
    pub smooth: Option<String>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct FitOptions {
    /// Model family [name]
    #[arg(long, value_enum, default_value_t = ModelArg::Elliptical)]
    pub model: ModelArg,
    /// Likelihood [name]
    #[arg(long, value_enum, default_value_t = LikelihoodArg::Marginal)]
    pub likelihood: LikelihoodArg,
    /// Fixed oscillation frequency for `--model fixed-beta`, e.g. -1cpy [frequency with unit]
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Comma-separated bands LO:HI<unit>; prefix `pm` for +-[LO, HI]; all frequencies when
    /// omitted [frequency with unit]
    #[arg(long, allow_hyphen_values = true)]
    pub bands: Option<String>,
    /// Aliasing terms on each side [count]
    #[arg(long, default_value_t = DEFAULT_ALIAS_TERMS)]
    pub k_max: usize,
    /// Keep the sample mean (by default it is removed and omega = 0 is skipped) [flag]
    #[arg(long)]
    pub keep_mean: bool,
    /// Random restarts of the simplex search [count]
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Seed for restart perturbations [integer]
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitOptions,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BootOptions {
    /// Bootstrap replicates [count]
    #[arg(long, default_value_t = 100)]
    pub n_boot: usize,
    /// Spectral estimate multiplied by exponential draws [name]
    #[arg(long, value_enum, default_value_t = EstimatorArg::Periodogram)]
    pub estimator: EstimatorArg,
    /// Epanechnikov bandwidth [frequency with unit]
    #[arg(long, default_value = "0.07rad")]
    pub bandwidth: String,
    /// Two-sided confidence level [fraction]
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    /// Bootstrap seed [integer]
    #[arg(long, default_value_t = 1)]
    pub boot_seed: u64,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitOptions,
    #[command(flatten)]
    pub boot: BootOptions,
    /// CSV of replicate estimates `rep,alpha1,beta1,alpha2,beta2,sigma2` [path]
    #[arg(long)]
    pub draws_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum MethodArg {
    Full,
    Marginal,
    FullNarrow,
    MarginalNarrow,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub source: ParamSource,
    /// Replicated series [count]
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Series length [count]
    #[arg(long, default_value_t = 1759)]
    pub n: usize,
    /// Sampling interval [time units]
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Estimation methods, comma-separated [names]
    #[arg(long, value_enum, value_delimiter = ',', default_value = "marginal")]
    pub methods: Vec<MethodArg>,
    /// Symmetric band LO:HI<unit> for the narrowband methods [frequency with unit]
    #[arg(long, default_value = "0.725:0.897rad")]
    pub narrow_band: String,
    /// Generator [name]
    #[arg(long, value_enum, default_value_t = SchemeArg::Exact)]
    pub scheme: SchemeArg,
    /// Euler steps per output interval [count]
    #[arg(long, default_value_t = DEFAULT_SUBSTEPS)]
    pub substeps: usize,
    /// Master seed [integer]
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap replicates per series for the first method; 0 disables [count]
    #[arg(long, default_value_t = 0)]
    pub n_boot: usize,
    /// Bootstrap spectral estimates, comma-separated [names]
    #[arg(long, value_enum, value_delimiter = ',', default_value = "periodogram,epanechnikov")]
    pub estimators: Vec<EstimatorArg>,
    /// Epanechnikov bandwidth [frequency with unit]
    #[arg(long, default_value = "0.07rad")]
    pub bandwidth: String,
    /// CSV of estimates of the first method `rep,alpha1,beta1,alpha2,beta2,sigma2` [path]
    #[arg(long)]
    pub estimates_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated pass bands LO:HI<unit>, prefix `pm` for +-[LO, HI] [frequency with unit]
    #[arg(long, allow_hyphen_values = true)]
    pub bands: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw pole-coordinate text (whitespace or comma separated, `#` comments) [path]
    #[arg(long)]
    pub input: PathBuf,
    /// Column roles, from epoch, mjd, x, y and _ (ignored) [names]
    #[arg(long, default_value = "epoch,x,y")]
    pub columns: String,
    /// Angular unit of x and y in the input [name]
    #[arg(long, value_enum, default_value_t = UnitArg::Arcsec)]
    pub unit: UnitArg,
    /// Allowed deviation of each epoch gap from the first one [years]
    #[arg(long, default_value_t = DEFAULT_SPACING_TOLERANCE)]
    pub tolerance: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Experiment to rerun [name]
    #[arg(value_enum)]
    pub target: Target,
    /// Replicate counts [name]
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    /// Directory receiving the output files [path]
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Master seed [integer]
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
}

/// Parses a frequency such as `-0.84cpy` or `0.07rad` into radians per time unit.
pub fn parse_frequency(text: &str) -> CliResult<f64> {
    let t = text.trim();
    let (num, factor) = if let Some(v) = t.strip_suffix("cpy") {
        (v, 2.0 * PI)
    } else if let Some(v) = t.strip_suffix("rad") {
        (v, 1.0)
    } else {
        return Err(CliError::Usage(format!(
            "frequency `{t}` needs a unit suffix (cpy or rad)"
        )));
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse frequency `{t}`")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("frequency `{t}` is not finite")));
    }
    Ok(v * factor)
}

/// Parses `LO:HI<unit>[,...]` with optional `pm` prefix into bands in radians.
pub fn parse_bands(text: &str) -> CliResult<Vec<Band>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (symmetric, body) = match item.strip_prefix("pm").or_else(|| item.strip_prefix('±')) {
            Some(rest) => (true, rest),
            None => (false, item),
        };
        let unit = if body.ends_with("cpy") {
            "cpy"
        } else if body.ends_with("rad") {
            "rad"
        } else {
            return Err(CliError::Usage(format!(
                "band `{item}` needs a unit suffix (cpy or rad)"
            )));
        };
        let range = &body[..body.len() - unit.len()];
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("band `{item}` must look like LO:HI{unit}")))?;
        let lo = parse_frequency(&format!("{lo}{unit}"))?;
        let hi = parse_frequency(&format!("{hi}{unit}"))?;
        let bands = if symmetric {
            Band::symmetric(lo, hi)
        } else {
            Band::new(lo, hi).map(|b| vec![b])
        }
        .map_err(|e| CliError::Usage(e.to_string()))?;
        out.extend(bands);
    }
    if out.is_empty() {
        return Err(CliError::Usage("no bands given".into()));
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct ParamFile {
    alpha1: Option<f64>,
    beta1: Option<f64>,
    alpha2: Option<f64>,
    beta2: Option<f64>,
    sigma2: Option<f64>,
    r_re: Option<f64>,
    r_im: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    rho: Option<f64>,
    psi: Option<f64>,
    a2: Option<f64>,
}

/// Reads elliptical or geometric parameters from JSON text.
pub fn parse_params(text: &str) -> CliResult<EllipticalParams> {
    let f: ParamFile = serde_json::from_str(text).map_err(|e| CliError::Data(e.into()))?;
    let missing = |what: &str| CliError::Data(Error::input(format!("parameter file lacks `{what}`")));
    if f.alpha1.is_some() {
        let mut p = EllipticalParams::new(
            f.alpha1.unwrap(),
            f.beta1.ok_or_else(|| missing("beta1"))?,
            f.alpha2.ok_or_else(|| missing("alpha2"))?,
            f.beta2.ok_or_else(|| missing("beta2"))?,
            f.sigma2.ok_or_else(|| missing("sigma2"))?,
        );
        if let (Some(re), Some(im)) = (f.r_re, f.r_im) {
            p.r = num_complex::Complex64::new(re, im);
        }
        p.validate()?;
        Ok(p)
    } else {
        let g = GeometricParams::new(
            f.alpha.ok_or_else(|| missing("alpha1 or alpha"))?,
            f.beta.ok_or_else(|| missing("beta"))?,
            f.rho.ok_or_else(|| missing("rho"))?,
            f.psi.ok_or_else(|| missing("psi"))?,
            f.a2.ok_or_else(|| missing("a2"))?,
        );
        g.validate()?;
        Ok(g.to_elliptical()?)
    }
}

fn load_params(src: &ParamSource) -> CliResult<EllipticalParams> {
    match (&src.params, src.preset) {
        (Some(path), _) => parse_params(&read_text(path)?),
        (None, Some(p)) => Ok(p.params()),
        (None, None) => Err(CliError::Usage("give --params or --preset".into())),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| {
        CliError::Data(Error::input(format!("cannot read {}: {e}", path.display())))
    })
}

fn emit(out: &OutArg, text: &str) -> CliResult {
    match &out.out {
        Some(path) => Ok(write_atomic(path, text.as_bytes())?),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // A closed downstream pipe (e.g. `| head`) is not an error.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> CliResult {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    write_atomic(&path, text.as_bytes())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn load_series(input: &InputArgs) -> CliResult<ComplexSeries> {
    Ok(series_from_csv(&read_text(&input.input)?, input.tolerance)?)
}

fn fit_spec(opts: &FitOptions) -> CliResult<FitSpec> {
    let model = match (opts.model, &opts.beta) {
        (ModelArg::FixedBeta, Some(b)) => Model::EllipticalFixedBeta {
            beta: parse_frequency(b)?,
        },
        (ModelArg::FixedBeta, None) => {
            return Err(CliError::Usage("--model fixed-beta needs --beta".into()))
        }
        (_, Some(_)) => return Err(CliError::Usage("--beta only applies to --model fixed-beta".into())),
        (ModelArg::Elliptical, None) => Model::Elliptical,
        (ModelArg::Circular, None) => Model::Circular,
    };
    let likelihood = match opts.likelihood {
        LikelihoodArg::Full => Likelihood::Full,
        LikelihoodArg::Marginal => Likelihood::Marginal,
    };
    let mut spec = FitSpec::new(model, likelihood);
    spec.bands = opts.bands.as_deref().map(parse_bands).transpose()?;
    spec.k_max = opts.k_max;
    spec.mean_subtract = !opts.keep_mean;
    spec.optimizer.restarts = opts.restarts;
    spec.optimizer.seed = opts.seed;
    Ok(spec)
}

fn transform(series: &ComplexSeries, spec: &FitSpec) -> CliResult<SpectralData> {
    Ok(dft_with(
        series,
        DftOptions {
            mean_subtract: spec.mean_subtract,
            phase: PhaseReference::OneBased,
        },
    )?)
}

fn require_converged(res: &FitResult, what: &str) -> CliResult {
    if res.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "{what} stopped after {} iterations (boundary flags {:?})",
            res.iterations, res.boundary_flags
        )))
    }
}

fn boot_config(opts: &BootOptions) -> CliResult<BootstrapConfig> {
    let estimator = estimator(opts.estimator, &opts.bandwidth)?;
    let mut cfg = BootstrapConfig::new(opts.n_boot, estimator, opts.boot_seed);
    cfg.ci_level = opts.ci_level;
    Ok(cfg)
}

fn estimator(kind: EstimatorArg, bandwidth: &str) -> CliResult<SpectralEstimator> {
    Ok(match kind {
        EstimatorArg::Periodogram => SpectralEstimator::RawPeriodogram,
        EstimatorArg::Epanechnikov => SpectralEstimator::Epanechnikov {
            bandwidth: parse_frequency(bandwidth)?,
        },
    })
}

fn draws_csv(summary: &BootstrapSummary) -> CliResult<String> {
    let header: Vec<&str> = std::iter::once("rep").chain(PARAM_NAMES).collect();
    Ok(to_csv(
        &header,
        summary.draws.iter().enumerate().map(|(i, d)| {
            let mut row = vec![i as f64];
            row.extend_from_slice(d);
            row
        }),
    )?)
}

#[derive(Serialize)]
struct BootstrapOutput<'a> {
    fit: &'a FitResult,
    bootstrap: &'a BootstrapSummary,
}

fn strip_draws(s: &BootstrapSummary) -> BootstrapSummary {
    BootstrapSummary {
        draws: Vec::new(),
        ..s.clone()
    }
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult {
    let p = load_params(&a.source)?;
    let cfg = SimConfig {
        substeps: a.substeps,
        burn_in: a.burn_in,
        scheme: a.scheme.into(),
        ..SimConfig::new(a.n, a.delta, a.seed).with_replicate(a.replicate)
    };
    let s = simulate(&p, &cfg)?;
    emit(&a.out, &series_to_csv(&s)?)
}

fn spectrum_csv(g: &GeometricParams, n: usize, delta: f64, k_max: usize) -> CliResult<String> {
    let grid = FrequencyGrid::fourier(n, delta)?;
    let values = spectral_matrix_grid(g, &grid.omegas, delta, k_max)?;
    Ok(to_csv(
        &["omega", "s_pos", "s_neg", "r_re", "r_im"],
        grid.omegas
            .iter()
            .zip(&values)
            .map(|(w, v)| [*w, v.s_pos, v.s_neg, v.r_val.re, v.r_val.im]),
    )?)
}

fn cmd_spectrum(a: &SpectrumArgs) -> CliResult {
    let g = load_params(&a.source)?.to_geometric()?;
    emit(&a.out, &spectrum_csv(&g, a.n, a.delta, a.k_max)?)
}

fn periodogram_csv(sd: &SpectralData, values: &[f64]) -> CliResult<String> {
    Ok(to_csv(
        &["omega", "I"],
        sd.grid.omegas.iter().zip(values).map(|(w, i)| [*w, *i]),
    )?)
}

fn cmd_periodogram(a: &PeriodogramArgs) -> CliResult {
    let s = load_series(&a.input)?;
    let sd = dft_with(
        &s,
        DftOptions {
            mean_subtract: a.mean_subtract,
            phase: PhaseReference::OneBased,
        },
    )?;
    let values = match &a.smooth {
        Some(bw) => smooth_periodogram(&sd, parse_frequency(bw)?)?,
        None => sd.periodogram.clone(),
    };
    emit(&a.out, &periodogram_csv(&sd, &values)?)
}

fn cmd_fit(a: &FitArgs) -> CliResult {
    let spec = fit_spec(&a.fit)?;
    let s = load_series(&a.input)?;
    let sd = transform(&s, &spec)?;
    let res = fit(&sd, &spec)?;
    emit(&a.out, &to_json(&res)?)?;
    require_converged(&res, "fit")
}

fn cmd_bootstrap(a: &BootstrapArgs) -> CliResult {
    let spec = fit_spec(&a.fit)?;
    let cfg = boot_config(&a.boot)?;
    let s = load_series(&a.input)?;
    let sd = transform(&s, &spec)?;
    let res = fit(&sd, &spec)?;
    require_converged(&res, "base fit")?;
    let summary = bootstrap(&sd, &res, &spec, &cfg)?;
    if let Some(path) = &a.draws_out {
        write_atomic(path, draws_csv(&summary)?.as_bytes())?;
    }
    let stripped = strip_draws(&summary);
    emit(
        &a.out,
        &to_json(&BootstrapOutput {
            fit: &res,
            bootstrap: &stripped,
        })?,
    )?;
    if summary.failed {
        return Err(CliError::NotConverged(format!(
            "{} of {} bootstrap replicates failed",
            summary.n_dropped, summary.n_requested
        )));
    }
    Ok(())
}

fn method_spec(m: MethodArg, narrow: &[Band]) -> FitSpec {
    let (lik, bands) = match m {
        MethodArg::Full => (Likelihood::Full, None),
        MethodArg::Marginal => (Likelihood::Marginal, None),
        MethodArg::FullNarrow => (Likelihood::Full, Some(narrow.to_vec())),
        MethodArg::MarginalNarrow => (Likelihood::Marginal, Some(narrow.to_vec())),
    };
    let mut spec = FitSpec::new(Model::Elliptical, lik);
    spec.bands = bands;
    spec
}

fn estimates_csv(report: &McReport, method: usize) -> CliResult<String> {
    let header: Vec<&str> = std::iter::once("rep").chain(PARAM_NAMES).collect();
    Ok(to_csv(
        &header,
        report.estimates[method]
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (i, e)))
            .map(|(i, e)| {
                let mut row = vec![i as f64];
                row.extend_from_slice(&e.params);
                row
            }),
    )?)
}

fn narrow_bands(text: &str) -> CliResult<Vec<Band>> {
    let b = parse_bands(text)?;
    if b.len() != 1 || b[0].lo < 0.0 {
        return Err(CliError::Usage(
            "--narrow-band takes one non-negative LO:HI<unit>; it is mirrored to negative frequencies".into(),
        ));
    }
    Band::symmetric(b[0].lo, b[0].hi).map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_mc(a: &McArgs) -> CliResult {
    let p = load_params(&a.source)?;
    let narrow = narrow_bands(&a.narrow_band)?;
    let mut cfg = McConfig::new(p, a.reps, a.n, a.delta, a.seed);
    cfg.fit_specs = a.methods.iter().map(|&m| method_spec(m, &narrow)).collect();
    cfg.scheme = a.scheme.into();
    cfg.substeps = a.substeps;
    if a.n_boot > 0 {
        cfg.bootstraps = a
            .estimators
            .iter()
            .map(|&e| Ok(BootstrapConfig::new(a.n_boot, estimator(e, &a.bandwidth)?, a.seed)))
            .collect::<CliResult<_>>()?;
    }
    let report = run_monte_carlo(&cfg)?;
    if let Some(path) = &a.estimates_out {
        write_atomic(path, estimates_csv(&report, 0)?.as_bytes())?;
    }
    emit(&a.out, &to_json(&report)?)
}

fn cmd_filter(a: &FilterArgs) -> CliResult {
    let bands = parse_bands(&a.bands)?;
    let s = load_series(&a.input)?;
    emit(&a.out, &series_to_csv(&boxcar_bandpass(&s, &bands)?)?)
}

fn cmd_ingest(a: &IngestArgs) -> CliResult {
    let mut fmt = EopFormat::new(
        ColumnMap::parse(&a.columns).map_err(|e| CliError::Usage(e.to_string()))?,
        match a.unit {
            UnitArg::Arcsec => AngleUnit::Arcsec,
            UnitArg::Mas => AngleUnit::Mas,
        },
    );
    fmt.tolerance = a.tolerance;
    let s = ingest_eop(&read_text(&a.input)?, &fmt)?;
    emit(&a.out, &series_to_csv(&s)?)
}

/// Band of the Chandler wobble, cycles per year.
pub const CHANDLER_BAND_CPY: (f64, f64) = (-0.97, -0.70);
/// Band of the annual oscillation on each side, cycles per year.
pub const ANNUAL_BAND_CPY: (f64, f64) = (0.97, 1.03);
/// Narrow band around the peaks of the eccentric preset, radians per unit time.
pub const NARROW_BAND_RAD: (f64, f64) = (0.725, 0.897);

/// Spec for the circular fit to the Chandler band.
pub fn chandler_spec() -> FitSpec {
    let c = 2.0 * PI;
    FitSpec::new(Model::Circular, Likelihood::Marginal).with_bands(vec![Band::new(
        CHANDLER_BAND_CPY.0 * c,
        CHANDLER_BAND_CPY.1 * c,
    )
    .expect("ordered band")])
}

/// Spec for the annual-band fit with the oscillation fixed at -1 cycle per year.
pub fn annual_spec() -> FitSpec {
    let c = 2.0 * PI;
    FitSpec::new(Model::EllipticalFixedBeta { beta: -c }, Likelihood::Marginal)
        .with_bands(Band::symmetric(ANNUAL_BAND_CPY.0 * c, ANNUAL_BAND_CPY.1 * c).expect("ordered band"))
}

/// Fit summary in the units used when reporting polar motion.
#[derive(Debug, Clone, Serialize)]
pub struct PolarSummary {
    pub alpha1_per_year: f64,
    pub beta1_cpy: f64,
    pub alpha2_cpy: f64,
    pub beta2_cpy: f64,
    pub sigma2_mas2_per_year: f64,
    /// `sigma2 * delta`: increment variance per 0.1-year sample.
    pub sigma2_mas2_per_sample: f64,
    pub eccentricity: f64,
    pub psi_hat: f64,
}

pub fn polar_summary(res: &FitResult, delta: f64) -> PolarSummary {
    let c = 2.0 * PI;
    PolarSummary {
        alpha1_per_year: res.ell.alpha1,
        beta1_cpy: res.ell.beta1 / c,
        alpha2_cpy: res.ell.alpha2 / c,
        beta2_cpy: res.ell.beta2 / c,
        sigma2_mas2_per_year: res.ell.sigma2,
        sigma2_mas2_per_sample: res.ell.sigma2 * delta,
        eccentricity: res.eccentricity(),
        psi_hat: res.psi_hat,
    }
}

fn polar_data(spec: &FitSpec) -> CliResult<(ComplexSeries, SpectralData)> {
    let s = bundled_polar_motion()?;
    let sd = transform(&s, spec)?;
    Ok((s, sd))
}

fn replicates(scale: Scale, full: usize, desk: usize) -> usize {
    match scale {
        Scale::Full => full,
        Scale::Desk => desk,
    }
}

fn mc_bias_config(reps: usize, seed: u64) -> McConfig {
    let narrow = Band::symmetric(NARROW_BAND_RAD.0, NARROW_BAND_RAD.1).expect("ordered band");
    let mut cfg = McConfig::new(Preset::Eccentric.params(), reps, 1759, 1.0, seed);
    cfg.scheme = Scheme::ExactTransition;
    cfg.fit_specs = [
        MethodArg::Full,
        MethodArg::Marginal,
        MethodArg::FullNarrow,
        MethodArg::MarginalNarrow,
    ]
    .iter()
    .map(|&m| method_spec(m, &narrow))
    .collect();
    cfg
}

fn bias_table(report: &McReport) -> CliResult<String> {
    let mut header = vec!["method".to_string()];
    for p in PARAM_NAMES {
        header.push(format!("{p}_bias_pct"));
        header.push(format!("{p}_rmse_pct"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Ok(to_csv(
        &header,
        report.methods.iter().enumerate().map(|(k, m)| {
            let mut row = vec![(k + 1) as f64];
            for j in 0..5 {
                row.push(m.bias_percent[j]);
                row.push(m.rmse_percent[j]);
            }
            row
        }),
    )?)
}

fn reproduce(a: &ReproduceArgs) -> CliResult {
    let dir = &a.out_dir;
    match a.target {
        Target::McBias => {
            let cfg = mc_bias_config(replicates(a.scale, 1000, 200), a.seed);
            let report = run_monte_carlo(&cfg)?;
            write_file(dir, "mc_bias.json", &to_json(&report)?)?;
            // Methods: 1 full/all, 2 marginal/all, 3 full/narrow, 4 marginal/narrow.
            write_file(dir, "mc_bias.csv", &bias_table(&report)?)?;
            write_file(dir, "mc_estimates_marginal.csv", &estimates_csv(&report, 1)?)?;
        }
        Target::McStandardErrors => {
            let mut cfg = McConfig::new(
                Preset::Eccentric.params(),
                replicates(a.scale, 1000, 200),
                1759,
                1.0,
                a.seed,
            );
            cfg.scheme = Scheme::ExactTransition;
            cfg.fit_specs = vec![method_spec(MethodArg::Marginal, &[])];
            cfg.bootstraps = vec![
                BootstrapConfig::new(100, SpectralEstimator::RawPeriodogram, a.seed),
                BootstrapConfig::new(100, SpectralEstimator::Epanechnikov { bandwidth: 0.07 }, a.seed),
            ];
            let report = run_monte_carlo(&cfg)?;
            write_file(dir, "mc_standard_errors.json", &to_json(&report)?)?;
            // Rows: 1 Monte Carlo, 2 periodogram bootstrap, 3 smoothed bootstrap.
            let mut rows = vec![std::iter::once(1.0).chain(report.methods[0].sd_percent).collect::<Vec<f64>>()];
            for (k, b) in report.bootstraps.iter().enumerate() {
                rows.push(std::iter::once((k + 2) as f64).chain(b.mean_se_percent).collect());
            }
            let header: Vec<&str> = std::iter::once("technique").chain(PARAM_NAMES).collect();
            write_file(dir, "mc_standard_errors.csv", &to_csv(&header, rows)?)?;
        }
        Target::AnnualIntervals | Target::Annual => {
            let spec = annual_spec();
            let (s, sd) = polar_data(&spec)?;
            let res = fit(&sd, &spec)?;
            let omega = 2.0 * PI;
            let np = estimate_eccentricity_np(&sd, -omega)?;
            let psi = estimate_orientation(&sd, -omega)?;
            let n_boot = replicates(a.scale, 10_000, 1000);
            let boot = if res.converged {
                Some(bootstrap(
                    &sd,
                    &res,
                    &spec,
                    &BootstrapConfig::new(n_boot, SpectralEstimator::RawPeriodogram, a.seed),
                )?)
            } else {
                None
            };
            let summary = serde_json::json!({
                "fit": res,
                "summary": polar_summary(&res, s.delta),
                "eccentricity_nonparametric": np,
                "psi_nonparametric": psi,
                "bootstrap": boot.as_ref().map(strip_draws),
            });
            write_file(dir, "annual.json", &to_json(&summary)?)?;
            if a.target == Target::AnnualIntervals {
                if let Some(b) = &boot {
                    // Rows: 1 estimate, 2 lower limit, 3 upper limit; model units (per year, rad/yr).
                    let header: Vec<&str> = std::iter::once("row").chain(PARAM_NAMES).collect();
                    let rows: Vec<Vec<f64>> = vec![
                        std::iter::once(1.0).chain(b.params.iter().map(|p| p.estimate)).collect(),
                        std::iter::once(2.0).chain(b.params.iter().map(|p| p.ci_lo)).collect(),
                        std::iter::once(3.0).chain(b.params.iter().map(|p| p.ci_hi)).collect(),
                    ];
                    write_file(dir, "annual_intervals.csv", &to_csv(&header, rows)?)?;
                }
            } else {
                let c = 2.0 * PI;
                let bands = Band::symmetric(ANNUAL_BAND_CPY.0 * c, ANNUAL_BAND_CPY.1 * c)?;
                write_file(dir, "annual_filtered.csv", &series_to_csv(&boxcar_bandpass(&s, &bands)?)?)?;
            }
            require_converged(&res, "annual fit")?;
        }
        Target::ExampleSpectra => {
            for (name, preset) in [("eccentric", Preset::Eccentric), ("slow", Preset::Slow)] {
                let p = preset.params();
                let g = p.to_geometric()?;
                let cfg = SimConfig::new(1000, 1.0, a.seed);
                let s = simulate(&p, &cfg)?;
                let sd = dft_with(&s, DftOptions::default())?;
                let rows = sd.grid.omegas.iter().zip(&sd.periodogram).map(|(&w, &i)| {
                    [w, i, psd(&g, w), aliased_psd(&g, w, 1.0, DEFAULT_ALIAS_TERMS)]
                });
                let text = to_csv(&["omega", "periodogram", "psd", "psd_aliased"], rows)?;
                write_file(dir, &format!("spectra_{name}.csv"), &text)?;
                write_file(dir, &format!("path_{name}.csv"), &series_to_csv(&s)?)?;
            }
        }
        Target::McDensities => {
            let mut cfg = McConfig::new(
                Preset::Eccentric.params(),
                replicates(a.scale, 1000, 200),
                1759,
                1.0,
                a.seed,
            );
            cfg.scheme = Scheme::ExactTransition;
            cfg.fit_specs = vec![method_spec(MethodArg::Marginal, &[])];
            let report = run_monte_carlo(&cfg)?;
            let grid: Vec<f64> = (0..=400).map(|i| -100.0 + 0.5 * i as f64).collect();
            let truth = param_vector(&cfg.true_params);
            let mut cols = Vec::new();
            for j in 0..5 {
                let vals: Vec<f64> = report.estimates[0].iter().flatten().map(|e| e.params[j]).collect();
                cols.push(kernel_density(&percent_deviation(&vals, truth[j]), &grid)?);
            }
            let header: Vec<&str> = std::iter::once("deviation_pct").chain(PARAM_NAMES).collect();
            let rows = grid.iter().enumerate().map(|(i, &x)| {
                std::iter::once(x).chain(cols.iter().map(|c| c[i])).collect::<Vec<f64>>()
            });
            write_file(dir, "mc_densities.csv", &to_csv(&header, rows)?)?;
        }
        Target::Chandler => {
            let spec = chandler_spec();
            let (s, sd) = polar_data(&spec)?;
            let res = fit(&sd, &spec)?;
            let boot = if res.converged {
                Some(bootstrap(
                    &sd,
                    &res,
                    &spec,
                    &BootstrapConfig::new(
                        replicates(a.scale, 10_000, 1000),
                        SpectralEstimator::RawPeriodogram,
                        a.seed,
                    ),
                )?)
            } else {
                None
            };
            let c = 2.0 * PI;
            let two_sided = FitSpec::new(Model::Elliptical, Likelihood::Marginal).with_bands(
                Band::symmetric(-CHANDLER_BAND_CPY.1 * c, -CHANDLER_BAND_CPY.0 * c)?,
            );
            let diag = fit(&sd, &two_sided)?;
            let summary = serde_json::json!({
                "fit": res,
                "summary": polar_summary(&res, s.delta),
                "bootstrap": boot.as_ref().map(strip_draws),
                "two_sided_elliptical": diag,
                "two_sided_summary": polar_summary(&diag, s.delta),
            });
            write_file(dir, "chandler.json", &to_json(&summary)?)?;
            write_file(dir, "polar_periodogram.csv", &periodogram_csv(&sd, &sd.periodogram)?)?;
            let bands = [Band::new(CHANDLER_BAND_CPY.0 * c, CHANDLER_BAND_CPY.1 * c)?];
            write_file(dir, "chandler_filtered.csv", &series_to_csv(&boxcar_bandpass(&s, &bands)?)?)?;
            require_converged(&res, "Chandler fit")?;
        }
    }
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, in which case the existing one is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Periodogram(a) => cmd_periodogram(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Reproduce(a) => reproduce(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ellou: {e}");
            e.code()
        }
    }
}
