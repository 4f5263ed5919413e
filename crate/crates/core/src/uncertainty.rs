//! Frequency-domain bootstrap and the Monte Carlo replication harness.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{smooth_periodogram, SpectralData};
use crate::params::{EllipticalParams, GeometricParams};
use crate::sampling::{simulate, Scheme, SimConfig, DEFAULT_SUBSTEPS};
use crate::whittle::{fit_marginal_periodogram, fit_series, FitResult, FitSpec, Init, Likelihood};

/// Names of the reported coordinates, in table order.
pub const PARAM_NAMES: [&str; 5] = ["alpha1", "beta1", "alpha2", "beta2", "sigma2"];

/// Share of dropped bootstrap replicates above which a run is flagged as failed.
pub const MAX_DROP_FRACTION: f64 = 0.2;

pub fn param_vector(p: &EllipticalParams) -> [f64; 5] {
    [p.alpha1, p.beta1, p.alpha2, p.beta2, p.sigma2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SpectralEstimator {
    RawPeriodogram,
    /// Epanechnikov-smoothed periodogram, bandwidth in radians per unit time.
    Epanechnikov { bandwidth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PsiPolicy {
    /// Replicates reuse the orientation of the base fit.
    #[default]
    HoldAtPointEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub spectral_estimator: SpectralEstimator,
    pub seed: u64,
    pub ci_level: f64,
    pub psi_policy: PsiPolicy,
}

impl BootstrapConfig {
    pub fn new(n_boot: usize, spectral_estimator: SpectralEstimator, seed: u64) -> Self {
        BootstrapConfig {
            n_boot,
            spectral_estimator,
            seed,
            ci_level: 0.95,
            psi_policy: PsiPolicy::HoldAtPointEstimate,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_boot < 2 {
            return Err(Error::input("n_boot must be at least 2"));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::input(format!("ci_level must lie in (0, 1), got {}", self.ci_level)));
        }
        if let SpectralEstimator::Epanechnikov { bandwidth } = self.spectral_estimator {
            if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                return Err(Error::input(format!("bandwidth must be positive, got {bandwidth}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    /// `100 se / |estimate|`.
    pub se_percent: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub params: Vec<ParamSummary>,
    /// Model-based eccentricity `sqrt(1 - rho^4)`.
    pub eccentricity: ParamSummary,
    pub ci_level: f64,
    pub n_requested: usize,
    pub n_used: usize,
    pub n_dropped: usize,
    /// More than [`MAX_DROP_FRACTION`] of the replicates failed to converge.
    pub failed: bool,
    /// Converged replicates as `[alpha1, beta1, alpha2, beta2, sigma2]`.
    pub draws: Vec<[f64; 5]>,
}

/// Quantile with linear interpolation between order statistics (type 7).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sample standard deviation (denominator `n - 1`).
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn summarize(name: &str, estimate: f64, values: &[f64], level: f64) -> ParamSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    let se = sample_sd(values);
    ParamSummary {
        name: name.to_string(),
        estimate,
        se,
        se_percent: 100.0 * se / estimate.abs(),
        ci_lo: quantile(&sorted, tail),
        ci_hi: quantile(&sorted, 1.0 - tail),
    }
}

/// Spectral estimate that the bootstrap multiplies by exponential draws.
pub fn bootstrap_spectrum(sd: &SpectralData, estimator: SpectralEstimator) -> Result<Vec<f64>> {
    match estimator {
        SpectralEstimator::RawPeriodogram => Ok(sd.periodogram.clone()),
        SpectralEstimator::Epanechnikov { bandwidth } => smooth_periodogram(sd, bandwidth),
    }
}

/// `I*(w) = S_hat(w) E(w)` with `E` iid unit exponential, from replicate stream `replicate`.
pub fn pseudo_periodogram(s_hat: &[f64], seed: u64, replicate: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    s_hat
        .iter()
        .map(|s| {
            let e: f64 = rng.sample(Exp1);
            s * e
        })
        .collect()
}

/// Dahlhaus-style bootstrap around a converged base fit.
///
/// Each replicate refits the marginal likelihood on the same bands, starting from the base
/// estimate. Non-converged replicates are dropped and counted.
pub fn bootstrap(
    sd: &SpectralData,
    base: &FitResult,
    spec: &FitSpec,
    cfg: &BootstrapConfig,
) -> Result<BootstrapSummary> {
    cfg.check()?;
    if !base.converged {
        return Err(Error::input("bootstrap needs a converged base fit"));
    }
    let s_hat = bootstrap_spectrum(sd, cfg.spectral_estimator)?;
    let mut refit = spec.clone();
    refit.likelihood = Likelihood::Marginal;
    refit.optimizer.restarts = 0;
    refit.optimizer.init = Init::Given(GeometricParams {
        psi: base.psi_hat,
        ..base.geo
    });
    let exclude_zero = spec.mean_subtract || sd.options.mean_subtract;
    let psi = match cfg.psi_policy {
        PsiPolicy::HoldAtPointEstimate => base.psi_hat,
    };

    let outcomes: Vec<Option<([f64; 5], f64)>> = (0..cfg.n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let pseudo = pseudo_periodogram(&s_hat, cfg.seed, b);
            match fit_marginal_periodogram(&sd.grid, &pseudo, exclude_zero, &refit, psi) {
                Ok(r) if r.converged => Some((param_vector(&r.ell), r.eccentricity())),
                _ => None,
            }
        })
        .collect();
    let kept: Vec<([f64; 5], f64)> = outcomes.into_iter().flatten().collect();
    let n_used = kept.len();
    let n_dropped = cfg.n_boot - n_used;
    let failed = n_dropped as f64 > MAX_DROP_FRACTION * cfg.n_boot as f64;
    if n_used < 2 {
        return Err(Error::input(format!(
            "only {n_used} of {} bootstrap replicates converged",
            cfg.n_boot
        )));
    }
    let point = param_vector(&base.ell);
    let params = PARAM_NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col: Vec<f64> = kept.iter().map(|(v, _)| v[j]).collect();
            summarize(name, point[j], &col, cfg.ci_level)
        })
        .collect();
    let ecc: Vec<f64> = kept.iter().map(|(_, e)| *e).collect();
    Ok(BootstrapSummary {
        params,
        eccentricity: summarize("eccentricity", base.eccentricity(), &ecc, cfg.ci_level),
        ci_level: cfg.ci_level,
        n_requested: cfg.n_boot,
        n_used,
        n_dropped,
        failed,
        draws: kept.into_iter().map(|(v, _)| v).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_reps: usize,
    pub true_params: EllipticalParams,
    pub n: usize,
    pub delta: f64,
    pub fit_specs: Vec<FitSpec>,
    pub seed: u64,
    pub substeps: usize,
    pub scheme: Scheme,
    /// Bootstrap configurations run on every replicate with `fit_specs[bootstrap_spec]`.
    pub bootstraps: Vec<BootstrapConfig>,
    pub bootstrap_spec: usize,
}

impl McConfig {
    pub fn new(true_params: EllipticalParams, n_reps: usize, n: usize, delta: f64, seed: u64) -> Self {
        McConfig {
            n_reps,
            true_params,
            n,
            delta,
            fit_specs: Vec::new(),
            seed,
            substeps: DEFAULT_SUBSTEPS,
            scheme: Scheme::EulerMaruyama,
            bootstraps: Vec::new(),
            bootstrap_spec: 0,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::input("n_reps must be at least 1"));
        }
        if self.fit_specs.is_empty() {
            return Err(Error::input("Monte Carlo run needs at least one fit spec"));
        }
        if !self.bootstraps.is_empty() && self.bootstrap_spec >= self.fit_specs.len() {
            return Err(Error::input("bootstrap_spec does not index a fit spec"));
        }
        for b in &self.bootstraps {
            b.check()?;
        }
        self.true_params.validate()
    }
}

/// One fit of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub params: [f64; 5],
    pub psi_hat: f64,
    pub eccentricity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McMethodSummary {
    pub spec: FitSpec,
    pub n_ok: usize,
    pub n_failed: usize,
    pub failure_rate: f64,
    /// `100 mean(theta_hat - theta) / theta` per parameter.
    pub bias_percent: [f64; 5],
    /// `100 sqrt(mean((theta_hat - theta)^2)) / |theta|`.
    pub rmse_percent: [f64; 5],
    /// Monte Carlo standard deviation of the estimates, `100 sd / |theta|` (denominator `n`).
    pub sd_percent: [f64; 5],
    pub mean_psi: f64,
    pub mean_eccentricity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McBootstrapSummary {
    pub config: BootstrapConfig,
    /// Average over replicates of `100 se / |theta|`.
    pub mean_se_percent: [f64; 5],
    pub n_series: usize,
    pub n_failed_series: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub truth: [f64; 5],
    pub true_psi: f64,
    pub true_eccentricity: f64,
    pub methods: Vec<McMethodSummary>,
    pub bootstraps: Vec<McBootstrapSummary>,
    /// `estimates[method][rep]`, `None` where the fit failed.
    pub estimates: Vec<Vec<Option<McEstimate>>>,
}

/// Bias, RMSE and standard deviation of `values` about `truth` (all population moments).
pub fn error_moments(values: &[f64], truth: f64) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let bias = mean - truth;
    let mse = values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (bias, mse.sqrt(), var.sqrt())
}

struct RepOutcome {
    fits: Vec<Option<McEstimate>>,
    boots: Vec<Option<[f64; 5]>>,
}

fn run_replicate(cfg: &McConfig, rep: u64) -> RepOutcome {
    let sim = SimConfig {
        substeps: cfg.substeps,
        scheme: cfg.scheme,
        ..SimConfig::new(cfg.n, cfg.delta, cfg.seed).with_replicate(rep)
    };
    let failed = RepOutcome {
        fits: vec![None; cfg.fit_specs.len()],
        boots: vec![None; cfg.bootstraps.len()],
    };
    let Ok(series) = simulate(&cfg.true_params, &sim) else {
        return failed;
    };
    let mut fits = Vec::with_capacity(cfg.fit_specs.len());
    let mut boots = vec![None; cfg.bootstraps.len()];
    for (k, spec) in cfg.fit_specs.iter().enumerate() {
        let outcome = fit_series(&series, spec).ok().filter(|(_, r)| r.converged);
        if k == cfg.bootstrap_spec {
            if let Some((sd, base)) = &outcome {
                for (b, bcfg) in cfg.bootstraps.iter().enumerate() {
                    // Each series gets its own bootstrap seed so replicates stay independent.
                    let bcfg = BootstrapConfig {
                        seed: bcfg.seed ^ rep.wrapping_mul(0x9E37_79B9_7F4A_7C15),
                        ..*bcfg
                    };
                    boots[b] = bootstrap(sd, base, spec, &bcfg)
                        .ok()
                        .filter(|s| !s.failed)
                        .map(|s| {
                            let mut se = [0.0; 5];
                            for (j, p) in s.params.iter().enumerate() {
                                se[j] = p.se;
                            }
                            se
                        });
                }
            }
        }
        fits.push(outcome.map(|(_, r)| McEstimate {
            params: param_vector(&r.ell),
            psi_hat: r.psi_hat,
            eccentricity: r.eccentricity(),
        }));
    }
    RepOutcome { fits, boots }
}

/// Simulates `n_reps` series and runs every fit spec (and bootstrap) on each.
pub fn run_monte_carlo(cfg: &McConfig) -> Result<McReport> {
    cfg.check()?;
    let truth = param_vector(&cfg.true_params);
    let true_geo = cfg.true_params.to_geometric()?;
    let reps: Vec<RepOutcome> = (0..cfg.n_reps as u64)
        .into_par_iter()
        .map(|rep| run_replicate(cfg, rep))
        .collect();

    let mut methods = Vec::with_capacity(cfg.fit_specs.len());
    let mut estimates = Vec::with_capacity(cfg.fit_specs.len());
    for (k, spec) in cfg.fit_specs.iter().enumerate() {
        let col: Vec<Option<McEstimate>> = reps.iter().map(|r| r.fits[k].clone()).collect();
        let ok: Vec<&McEstimate> = col.iter().flatten().collect();
        let n_ok = ok.len();
        let mut bias = [f64::NAN; 5];
        let mut rmse = [f64::NAN; 5];
        let mut sd = [f64::NAN; 5];
        if n_ok > 0 {
            for j in 0..5 {
                let vals: Vec<f64> = ok.iter().map(|e| e.params[j]).collect();
                let (b, r, s) = error_moments(&vals, truth[j]);
                let scale = 100.0 / truth[j].abs();
                bias[j] = b * scale;
                rmse[j] = r * scale;
                sd[j] = s * scale;
            }
        }
        let mean = |f: &dyn Fn(&McEstimate) -> f64| ok.iter().map(|e| f(e)).sum::<f64>() / n_ok as f64;
        methods.push(McMethodSummary {
            spec: spec.clone(),
            n_ok,
            n_failed: cfg.n_reps - n_ok,
            failure_rate: (cfg.n_reps - n_ok) as f64 / cfg.n_reps as f64,
            bias_percent: bias,
            rmse_percent: rmse,
            sd_percent: sd,
            mean_psi: mean(&|e| e.psi_hat),
            mean_eccentricity: mean(&|e| e.eccentricity),
        });
        estimates.push(col);
    }

    let bootstraps = cfg
        .bootstraps
        .iter()
        .enumerate()
        .map(|(b, bcfg)| {
            let ok: Vec<[f64; 5]> = reps.iter().filter_map(|r| r.boots[b]).collect();
            let mut mean_se = [f64::NAN; 5];
            if !ok.is_empty() {
                for j in 0..5 {
                    mean_se[j] = ok.iter().map(|se| 100.0 * se[j] / truth[j].abs()).sum::<f64>()
                        / ok.len() as f64;
                }
            }
            McBootstrapSummary {
                config: *bcfg,
                mean_se_percent: mean_se,
                n_series: ok.len(),
                n_failed_series: cfg.n_reps - ok.len(),
            }
        })
        .collect();

    Ok(McReport {
        truth,
        true_psi: true_geo.psi,
        true_eccentricity: true_geo.eccentricity(),
        methods,
        bootstraps,
        estimates,
    })
}

/// `100 (estimate - truth) / truth` for each estimate.
pub fn percent_deviation(estimates: &[f64], truth: f64) -> Vec<f64> {
    estimates.iter().map(|v| 100.0 * (v - truth) / truth).collect()
}

/// Silverman's rule-of-thumb bandwidth `0.9 min(sd, IQR / 1.34) n^(-1/5)`.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::input("kernel density needs at least two values"));
    }
    let sd = sample_sd(values);
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::input("kernel density needs values with positive spread"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (values.len() as f64).powf(-0.2))
}

/// Gaussian kernel density of `values` at each grid point, Silverman bandwidth.
pub fn kernel_density(values: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let h = silverman_bandwidth(values)?;
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(grid
        .iter()
        .map(|&x| {
            values
                .iter()
                .map(|v| (-0.5 * ((x - v) / h).powi(2)).exp())
                .sum::<f64>()
                * norm
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{dft_with, DftOptions};
    use crate::spectral::{aliased_psd, FrequencyGrid};
    use crate::whittle::{fit, Model};
    use proptest::prelude::*;

    fn eccentric() -> EllipticalParams {
        EllipticalParams::new(0.02, 1.0, -0.5, -0.3, 2.0)
    }

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert!((quantile(&v, 0.25) - 1.75).abs() < 1e-15);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn exponential_multipliers_have_unit_mean() {
        let s_hat: Vec<f64> = (0..64).map(|i| 1.0 + i as f64).collect();
        let reps = 4000;
        let mut acc = vec![0.0; s_hat.len()];
        for b in 0..reps {
            for (a, v) in acc.iter_mut().zip(pseudo_periodogram(&s_hat, 11, b)) {
                *a += v / reps as f64;
            }
        }
        for (a, s) in acc.iter().zip(&s_hat) {
            // Standard error of the mean of Exp(1) multipliers is 1/sqrt(reps).
            assert!((a / s - 1.0).abs() < 4.0 / (reps as f64).sqrt(), "{a} vs {s}");
        }
    }

    #[test]
    fn streams_do_not_collide() {
        let s_hat = vec![1.0; 1024];
        let a = pseudo_periodogram(&s_hat, 3, 0);
        let b = pseudo_periodogram(&s_hat, 3, 1);
        assert!(a.iter().zip(&b).all(|(x, y)| x != y));
        assert_eq!(a, pseudo_periodogram(&s_hat, 3, 0));
    }

    #[test]
    fn bootstrap_is_deterministic_and_flags_coverage() {
        let s = simulate(&eccentric(), &SimConfig::new(512, 1.0, 21)).unwrap();
        let sd = dft_with(&s, DftOptions::for_fitting()).unwrap();
        let spec = FitSpec::new(Model::Elliptical, Likelihood::Marginal);
        let base = fit(&sd, &spec).unwrap();
        let cfg = BootstrapConfig::new(20, SpectralEstimator::RawPeriodogram, 5);
        let a = bootstrap(&sd, &base, &spec, &cfg).unwrap();
        let b = bootstrap(&sd, &base, &spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_used + a.n_dropped, 20);
        assert!(!a.failed);
        for p in &a.params {
            assert!(p.se > 0.0 && p.ci_lo <= p.ci_hi, "{p:?}");
        }
        let bad = BootstrapConfig::new(1, SpectralEstimator::RawPeriodogram, 5);
        assert!(bootstrap(&sd, &base, &spec, &bad).is_err());
    }

    #[test]
    fn monte_carlo_on_expected_spectrum_is_unbiased() {
        // With the periodogram replaced by the model spectrum, the fit returns the truth.
        let truth = eccentric();
        let g = truth.to_geometric().unwrap();
        let grid = FrequencyGrid::fourier(1024, 1.0).unwrap();
        let s: Vec<f64> = grid.omegas.iter().map(|&w| aliased_psd(&g, w, 1.0, 10)).collect();
        let mut spec = FitSpec::new(Model::Elliptical, Likelihood::Marginal);
        spec.mean_subtract = false;
        let r = fit_marginal_periodogram(&grid, &s, false, &spec, g.psi).unwrap();
        let got = param_vector(&r.ell);
        for (a, b) in got.iter().zip(param_vector(&truth)) {
            let (bias, rmse, _) = error_moments(&[*a], b);
            assert!(bias.abs() < 1e-4 * b.abs() && rmse.abs() < 1e-4 * b.abs());
        }
    }

    #[test]
    fn small_monte_carlo_run() {
        let mut cfg = McConfig::new(eccentric(), 3, 256, 1.0, 2);
        cfg.scheme = Scheme::ExactTransition;
        cfg.fit_specs = vec![FitSpec::new(Model::Elliptical, Likelihood::Marginal)];
        cfg.bootstraps = vec![BootstrapConfig::new(5, SpectralEstimator::RawPeriodogram, 1)];
        let rep = run_monte_carlo(&cfg).unwrap();
        assert_eq!(rep.estimates[0].len(), 3);
        let m = &rep.methods[0];
        assert_eq!(m.n_ok + m.n_failed, 3);
        for j in 0..5 {
            let lhs = m.rmse_percent[j].powi(2);
            let rhs = m.bias_percent[j].powi(2) + m.sd_percent[j].powi(2);
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1e-300));
        }
        assert_eq!(rep.bootstraps[0].n_series + rep.bootstraps[0].n_failed_series, 3);
        assert_eq!(rep, run_monte_carlo(&cfg).unwrap());
    }

    #[test]
    fn density_symmetry_and_mass() {
        let grid: Vec<f64> = (-4000..=4000).map(|i| i as f64 * 0.01).collect();
        let d = kernel_density(&[-2.0, 2.0], &grid).unwrap();
        for i in 0..grid.len() {
            assert!((d[i] - d[grid.len() - 1 - i]).abs() < 1e-15);
        }
        let mass: f64 = d.iter().sum::<f64>() * 0.01;
        assert!((mass - 1.0).abs() < 0.01);
        assert!(kernel_density(&[1.0, 1.0, 1.0], &grid).is_err());
        assert!(kernel_density(&[1.0], &grid).is_err());
    }

    #[test]
    fn smoothed_spectrum_has_lower_variance() {
        let s = simulate(&eccentric(), &SimConfig::new(1024, 1.0, 4)).unwrap();
        let sd = dft_with(&s, DftOptions::for_fitting()).unwrap();
        let raw = bootstrap_spectrum(&sd, SpectralEstimator::RawPeriodogram).unwrap();
        let smooth = bootstrap_spectrum(&sd, SpectralEstimator::Epanechnikov { bandwidth: 0.07 }).unwrap();
        let rough = |v: &[f64]| v.windows(2).map(|w| (w[1] / w[0]).ln().powi(2)).sum::<f64>();
        assert!(rough(&smooth) < rough(&raw));
    }

    proptest! {
        #[test]
        fn rmse_decomposes(values in proptest::collection::vec(-10.0f64..10.0, 1..50), truth in -5.0f64..5.0) {
            let (b, r, s) = error_moments(&values, truth);
            prop_assert!((r * r - (b * b + s * s)).abs() <= 1e-9 * (1.0 + r * r));
        }
    }
}
