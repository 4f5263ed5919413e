//! Whittle pseudo-likelihoods and parameter estimation.
//!
//! Two objectives are available over a chosen set of Fourier frequencies:
//!
//! * full: `-1/2 sum { log det S_C + J_C^H S_C^-1 J_C }` with the 2x2 spectral matrix of
//!   `(J_Z, J_{Z*})`;
//! * marginal: `-sum { log S_z + I_Z / S_z }`, which carries no information about `psi`. The
//!   orientation is then read off the DFT at the fitted peak frequency.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{dft_with, smooth_ordinates, Band, DftOptions, PhaseReference, SpectralData};
use crate::optimize::{nelder_mead, NelderMeadConfig};
use crate::params::{wrap_orientation, EllipticalParams, GeometricParams};
use crate::sampling::ComplexSeries;
use crate::spectral::{combine, fold_lorentzian, FrequencyGrid, DEFAULT_ALIAS_TERMS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Model {
    Elliptical,
    /// Complex OU: `rho = 1`, three parameters.
    Circular,
    /// Elliptical with the oscillation frequency held at `beta` (radians per unit time).
    EllipticalFixedBeta { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Likelihood {
    Full,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "params")]
pub enum Init {
    #[default]
    Auto,
    Given(GeometricParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Iteration cap for each simplex run.
    pub max_iters: usize,
    /// Relative spread of the simplex objective values at convergence.
    pub tol_rel: f64,
    /// Largest allowed vertex distance in transformed coordinates at convergence.
    pub tol_x: f64,
    /// Randomly perturbed restarts in addition to the run from the initial point.
    pub restarts: usize,
    pub init: Init,
    /// Seed for the restart perturbations.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iters: 5000,
            tol_rel: 1e-10,
            tol_x: 1e-8,
            restarts: 3,
            init: Init::Auto,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub model: Model,
    pub likelihood: Likelihood,
    /// Frequency bands in radians per unit time; `None` uses the whole grid.
    pub bands: Option<Vec<Band>>,
    pub k_max: usize,
    pub mean_subtract: bool,
    pub optimizer: OptimizerConfig,
}

impl FitSpec {
    pub fn new(model: Model, likelihood: Likelihood) -> Self {
        FitSpec {
            model,
            likelihood,
            bands: None,
            k_max: DEFAULT_ALIAS_TERMS,
            mean_subtract: true,
            optimizer: OptimizerConfig::default(),
        }
    }

    pub fn with_bands(mut self, bands: Vec<Band>) -> Self {
        self.bands = Some(bands);
        self
    }

    fn check(&self) -> Result<()> {
        if let Some(b) = &self.bands {
            if b.is_empty() {
                return Err(Error::input("band list is empty"));
            }
        }
        if self.optimizer.max_iters == 0 {
            return Err(Error::input("max_iters must be at least 1"));
        }
        if let Model::EllipticalFixedBeta { beta } = self.model {
            if !beta.is_finite() || beta == 0.0 {
                return Err(Error::input(format!("fixed beta must be finite and non-zero, got {beta}")));
            }
        }
        Ok(())
    }
}

/// Parameters that ended on or near the edge of their admissible range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BoundaryFlags {
    pub alpha: bool,
    pub beta: bool,
    pub rho: bool,
    pub psi: bool,
    pub a2: bool,
}

impl BoundaryFlags {
    pub fn any(&self) -> bool {
        self.alpha || self.beta || self.rho || self.psi || self.a2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub geo: GeometricParams,
    pub ell: EllipticalParams,
    pub psi_hat: f64,
    /// Objective value at the estimate, on the original data scale.
    pub loglik: f64,
    pub converged: bool,
    pub n_freqs_used: usize,
    pub boundary_flags: BoundaryFlags,
    pub iterations: usize,
    pub evaluations: usize,
}

impl FitResult {
    /// Model-based eccentricity `sqrt(1 - rho^4)`.
    pub fn eccentricity(&self) -> f64 {
        self.geo.eccentricity()
    }
}

/// Grid positions entering the objective: the bands, minus `omega = 0` after mean removal.
fn used_indices(grid: &FrequencyGrid, bands: Option<&[Band]>, exclude_zero: bool) -> Vec<usize> {
    grid.omegas
        .iter()
        .enumerate()
        .filter(|(_, &w)| bands.is_none_or(|b| b.iter().any(|band| band.contains(w))))
        .filter(|(_, &w)| !(exclude_zero && w == 0.0))
        .map(|(i, _)| i)
        .collect()
}

/// Frequencies and data needed to evaluate an objective quickly.
///
/// The Lorentzian peaked at `-beta` at `omega` equals the one peaked at `+beta` at `-omega`, so
/// both are read from a single folded evaluation over the union of used and mirrored frequencies.
struct Design {
    delta: f64,
    k_max: usize,
    eval_omegas: Vec<f64>,
    pos: Vec<usize>,
    neg: Vec<usize>,
    i_pos: Vec<f64>,
    /// `|J_{Z*}|^2` and `conj(J_Z) J_{Z*}`, present for the full likelihood.
    full: Option<(Vec<f64>, Vec<Complex64>)>,
}

impl Design {
    fn new(
        grid: &FrequencyGrid,
        used: &[usize],
        periodogram: &[f64],
        transforms: Option<(&[Complex64], &[Complex64])>,
        k_max: usize,
    ) -> Self {
        let n = grid.n as i64;
        let k_lo = -((n + 1) / 2) + 1;
        let spacing = grid.spacing();
        // Slots indexed by Fourier integer k + n (covers -n..=n).
        let mut slot: Vec<Option<usize>> = vec![None; (2 * n + 1) as usize];
        let mut eval_omegas = Vec::new();
        let mut place = |k: i64, eval_omegas: &mut Vec<f64>| -> usize {
            let s = (k + n) as usize;
            *slot[s].get_or_insert_with(|| {
                eval_omegas.push(spacing * k as f64);
                eval_omegas.len() - 1
            })
        };
        let mut pos = Vec::with_capacity(used.len());
        let mut neg = Vec::with_capacity(used.len());
        for &i in used {
            let k = k_lo + i as i64;
            pos.push(place(k, &mut eval_omegas));
            neg.push(place(-k, &mut eval_omegas));
        }
        let i_pos = used.iter().map(|&i| periodogram[i]).collect();
        let full = transforms.map(|(jz, jc)| {
            let i_neg = used.iter().map(|&i| jc[i].norm_sqr()).collect();
            let cross = used.iter().map(|&i| jz[i].conj() * jc[i]).collect();
            (i_neg, cross)
        });
        Design {
            delta: grid.delta,
            k_max,
            eval_omegas,
            pos,
            neg,
            i_pos,
            full,
        }
    }

    fn len(&self) -> usize {
        self.pos.len()
    }

    fn rescale(&mut self, scale: f64) {
        self.i_pos.iter_mut().for_each(|v| *v /= scale);
        if let Some((i_neg, cross)) = &mut self.full {
            i_neg.iter_mut().for_each(|v| *v /= scale);
            cross.iter_mut().for_each(|v| *v /= scale);
        }
    }

    fn folded(&self, g: &GeometricParams, scratch: &mut Vec<f64>) {
        scratch.resize(self.eval_omegas.len(), 0.0);
        fold_lorentzian(g.alpha, g.beta, &self.eval_omegas, self.delta, self.k_max, scratch);
    }

    /// Negative marginal log-likelihood `sum { log S + I / S }`.
    fn marginal(&self, g: &GeometricParams, scratch: &mut Vec<f64>) -> f64 {
        self.folded(g, scratch);
        let inv = 1.0 / g.rho;
        let q = 0.25 * g.a2;
        let major = q * (inv + g.rho).powi(2);
        let minor = q * (inv - g.rho).powi(2);
        let mut total = 0.0;
        for m in 0..self.len() {
            let s = major * scratch[self.pos[m]] + minor * scratch[self.neg[m]];
            total += s.ln() + self.i_pos[m] / s;
        }
        total
    }

    /// Negative full log-likelihood `1/2 sum { log det S_C + J_C^H S_C^-1 J_C }`.
    fn full(&self, g: &GeometricParams, scratch: &mut Vec<f64>) -> f64 {
        let (i_neg, cross) = self
            .full
            .as_ref()
            .expect("full likelihood needs both transforms");
        self.folded(g, scratch);
        let mut total = 0.0;
        for m in 0..self.len() {
            let v = combine(g, scratch[self.pos[m]], scratch[self.neg[m]]);
            if !(v.det > 0.0) {
                return f64::INFINITY;
            }
            let quad = (v.s_neg * self.i_pos[m] + v.s_pos * i_neg[m]
                - 2.0 * (cross[m] * v.r_val).re)
                / v.det;
            total += v.det.ln() + quad;
        }
        0.5 * total
    }

    fn objective(&self, likelihood: Likelihood, g: &GeometricParams, scratch: &mut Vec<f64>) -> f64 {
        match likelihood {
            Likelihood::Marginal => self.marginal(g, scratch),
            Likelihood::Full => self.full(g, scratch),
        }
    }
}

fn check_grid_point(g: &GeometricParams) -> Result<()> {
    let ok = g.alpha > 0.0
        && g.rho > 0.0
        && g.a2 > 0.0
        && [g.alpha, g.beta, g.rho, g.psi, g.a2].iter().all(|v| v.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::constraint(
            "parameter point",
            format!("likelihood needs alpha, rho, a2 > 0 and finite values, got {g:?}"),
        ))
    }
}

fn exclude_zero(sd: &SpectralData, spec: &FitSpec) -> bool {
    spec.mean_subtract || sd.options.mean_subtract
}

/// Full Whittle log-likelihood over the bands of `spec`.
pub fn loglik_full(sd: &SpectralData, g: &GeometricParams, spec: &FitSpec) -> Result<f64> {
    check_grid_point(g)?;
    let used = used_indices(&sd.grid, spec.bands.as_deref(), exclude_zero(sd, spec));
    let design = Design::new(&sd.grid, &used, &sd.periodogram, Some((&sd.j_z, &sd.j_zconj)), spec.k_max);
    Ok(-design.full(g, &mut Vec::new()))
}

/// Marginal Whittle log-likelihood over the bands of `spec`. Independent of `psi`.
pub fn loglik_marginal(sd: &SpectralData, g: &GeometricParams, spec: &FitSpec) -> Result<f64> {
    check_grid_point(g)?;
    let used = used_indices(&sd.grid, spec.bands.as_deref(), exclude_zero(sd, spec));
    let design = Design::new(&sd.grid, &used, &sd.periodogram, None, spec.k_max);
    Ok(-design.marginal(g, &mut Vec::new()))
}

/// Which coordinates are free, in the order `log alpha, beta, log rho, psi, log A^2`.
#[derive(Debug, Clone, Copy)]
struct Layout {
    fixed_beta: Option<f64>,
    rho_free: bool,
    psi_free: bool,
}

impl Layout {
    fn new(model: Model, likelihood: Likelihood) -> Self {
        let (fixed_beta, rho_free) = match model {
            Model::Elliptical => (None, true),
            Model::Circular => (None, false),
            Model::EllipticalFixedBeta { beta } => (Some(beta), true),
        };
        Layout {
            fixed_beta,
            rho_free,
            psi_free: rho_free && likelihood == Likelihood::Full,
        }
    }

    fn dim(&self) -> usize {
        2 + self.fixed_beta.is_none() as usize + self.rho_free as usize + self.psi_free as usize
    }

    /// Maps a coordinate vector to canonical parameters (`rho <= 1`, wrapped `psi`).
    fn decode(&self, x: &[f64], psi_default: f64) -> GeometricParams {
        let mut it = x.iter().copied();
        let alpha = it.next().unwrap().exp();
        let beta = self.fixed_beta.unwrap_or_else(|| it.next().unwrap());
        let mut rho = if self.rho_free { it.next().unwrap().exp() } else { 1.0 };
        let mut psi = if self.psi_free { it.next().unwrap() } else { psi_default };
        let a2 = it.next().unwrap().exp();
        if rho > 1.0 {
            rho = 1.0 / rho;
            psi += FRAC_PI_2;
        }
        GeometricParams {
            alpha,
            beta,
            rho,
            psi: wrap_orientation(psi),
            a2,
        }
    }

    fn encode(&self, g: &GeometricParams) -> Vec<f64> {
        let mut x = vec![g.alpha.ln()];
        if self.fixed_beta.is_none() {
            x.push(g.beta);
        }
        if self.rho_free {
            x.push(g.rho.min(1.0).ln());
        }
        if self.psi_free {
            x.push(g.psi);
        }
        x.push(g.a2.ln());
        x
    }

    fn steps(&self, g: &GeometricParams, spacing: f64) -> Vec<f64> {
        let mut s = vec![0.5];
        if self.fixed_beta.is_none() {
            s.push(g.alpha.max(spacing));
        }
        if self.rho_free {
            s.push(0.3);
        }
        if self.psi_free {
            s.push(0.3);
        }
        s.push(0.5);
        s
    }

    fn perturb(&self, x: &[f64], g: &GeometricParams, spacing: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut y = x.to_vec();
        let mut i = 0;
        let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
        y[i] += 0.5 * normal(rng);
        i += 1;
        if self.fixed_beta.is_none() {
            y[i] += g.alpha.max(spacing) * normal(rng);
            i += 1;
        }
        if self.rho_free {
            y[i] = (y[i] + 0.3 * normal(rng)).min(0.0);
            i += 1;
        }
        if self.psi_free {
            y[i] += 0.5 * normal(rng);
            i += 1;
        }
        y[i] += 0.5 * normal(rng);
        y
    }
}

/// Moment-style starting point from a lightly smoothed periodogram.
fn auto_init(
    grid: &FrequencyGrid,
    periodogram: &[f64],
    used: &[usize],
    layout: &Layout,
    orientation: Option<&dyn Fn(f64) -> Option<f64>>,
) -> Result<GeometricParams> {
    let spacing = grid.spacing();
    let smooth = smooth_ordinates(periodogram, spacing, 3.0 * spacing)?;
    let n = grid.omegas.len();
    let nearest = |w: f64| -> usize {
        let k = (w / spacing).round() as i64;
        let k_lo = -((grid.n as i64 + 1) / 2) + 1;
        (k - k_lo).clamp(0, n as i64 - 1) as usize
    };
    let peak = match layout.fixed_beta {
        Some(beta) => nearest(beta),
        None => *used
            .iter()
            .max_by(|&&a, &&b| smooth[a].total_cmp(&smooth[b]))
            .ok_or_else(|| Error::input("no frequencies selected"))?,
    };
    let beta = layout.fixed_beta.unwrap_or(grid.omegas[peak]);
    let top = smooth[peak];
    if !(top > 0.0) {
        return Err(Error::input("periodogram is zero at the selected frequencies"));
    }

    let rho = if layout.rho_free {
        let mirror = smooth[nearest(-grid.omegas[peak])];
        let q = (mirror / top).clamp(0.0, 0.98);
        let rq = q.sqrt();
        ((1.0 - rq) / (1.0 + rq)).sqrt().clamp(0.05, 0.995)
    } else {
        1.0
    };

    let half = 0.5 * top;
    let walk = |dir: i64| -> Option<usize> {
        let mut i = peak as i64;
        let mut steps = 0;
        loop {
            i += dir;
            steps += 1;
            if i < 0 || i >= n as i64 {
                return None;
            }
            if smooth[i as usize] <= half {
                return Some(steps);
            }
        }
    };
    let widths: Vec<usize> = [walk(-1), walk(1)].into_iter().flatten().collect();
    let hwhm = if widths.is_empty() {
        spacing
    } else {
        widths.iter().sum::<usize>() as f64 / widths.len() as f64 * spacing
    };
    let alpha = hwhm.max(spacing);
    let a2 = 4.0 * alpha * alpha * top / (1.0 / rho + rho).powi(2);
    let psi = if layout.psi_free {
        orientation.and_then(|f| f(grid.omegas[peak])).unwrap_or(0.0)
    } else {
        0.0
    };
    Ok(GeometricParams {
        alpha,
        beta,
        rho,
        psi,
        a2,
    })
}

struct Problem<'a> {
    design: &'a Design,
    layout: Layout,
    likelihood: Likelihood,
    psi_default: f64,
}

impl Problem<'_> {
    fn minimize(
        &self,
        start: &GeometricParams,
        spacing: f64,
        cfg: &OptimizerConfig,
    ) -> (GeometricParams, f64, bool, usize, usize) {
        let nm = NelderMeadConfig {
            max_iters: cfg.max_iters,
            tol_f: cfg.tol_rel,
            tol_x: cfg.tol_x,
        };
        let mut scratch = Vec::new();
        let mut objective = |x: &[f64]| {
            let g = self.layout.decode(x, self.psi_default);
            self.design.objective(self.likelihood, &g, &mut scratch)
        };
        let x0 = self.layout.encode(start);
        let steps = self.layout.steps(start, spacing);
        let mut best = nelder_mead(&mut objective, &x0, &steps, &nm);
        let mut iters = best.iterations;
        let mut evals = best.evaluations;

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.restarts {
            let x = self.layout.perturb(&x0, start, spacing, &mut rng);
            let m = nelder_mead(&mut objective, &x, &steps, &nm);
            iters += m.iterations;
            evals += m.evaluations;
            if m.f < best.f {
                best = m;
            }
        }
        // Restart the simplex at the best point so convergence is judged on a fresh simplex.
        let polish_from = self.layout.decode(&best.x, self.psi_default);
        let polish_steps: Vec<f64> = self
            .layout
            .steps(&polish_from, spacing)
            .iter()
            .map(|s| 0.1 * s)
            .collect();
        let polish = nelder_mead(&mut objective, &self.layout.encode(&polish_from), &polish_steps, &nm);
        iters += polish.iterations;
        evals += polish.evaluations;
        let (x, f) = if polish.f <= best.f {
            (polish.x, polish.f)
        } else {
            (best.x, best.f)
        };
        (
            self.layout.decode(&x, self.psi_default),
            f,
            polish.converged,
            iters,
            evals,
        )
    }
}

fn boundary_flags(g: &GeometricParams, layout: &Layout, grid: &FrequencyGrid) -> BoundaryFlags {
    BoundaryFlags {
        alpha: g.alpha < 1e-3 * grid.spacing() || g.alpha > grid.nyquist(),
        beta: layout.fixed_beta.is_none() && g.beta.abs() > grid.nyquist(),
        rho: layout.rho_free && (g.rho < 1e-3 || g.rho > 1.0 - 1e-6),
        psi: false,
        a2: !g.a2.is_finite(),
    }
}

fn check_sd(sd: &SpectralData, likelihood: Likelihood) -> Result<()> {
    let n = sd.grid.omegas.len();
    let full = likelihood == Likelihood::Full;
    if sd.periodogram.len() != n || (full && (sd.j_z.len() != n || sd.j_zconj.len() != n)) {
        return Err(Error::input("spectral data arrays do not match the grid"));
    }
    Ok(())
}

/// Maximizes the selected Whittle likelihood.
pub fn fit(sd: &SpectralData, spec: &FitSpec) -> Result<FitResult> {
    spec.check()?;
    check_sd(sd, spec.likelihood)?;
    let used = used_indices(&sd.grid, spec.bands.as_deref(), exclude_zero(sd, spec));
    let orient = |w: f64| estimate_orientation(sd, w).ok();
    let transforms = match spec.likelihood {
        Likelihood::Full => Some((sd.j_z.as_slice(), sd.j_zconj.as_slice())),
        Likelihood::Marginal => None,
    };
    let mut res = fit_design(&sd.grid, &sd.periodogram, transforms, &used, spec, None, Some(&orient))?;
    if spec.likelihood == Likelihood::Marginal && Layout::new(spec.model, spec.likelihood).rho_free {
        // A known frequency is used as is; otherwise the peak comes from the periodogram.
        let omega_max = match spec.model {
            Model::EllipticalFixedBeta { beta } => Some(beta),
            _ => periodogram_peak(sd, &used),
        };
        match omega_max
            .ok_or_else(|| Error::input("no used frequency has its mirror on the grid"))
            .and_then(|w| estimate_orientation(sd, w))
        {
            Ok(psi) => res.psi_hat = psi,
            Err(_) => {
                res.psi_hat = 0.0;
                res.boundary_flags.psi = true;
            }
        }
        res.geo.psi = res.psi_hat;
        res.ell = res.geo.to_elliptical()?;
    }
    Ok(res)
}

/// Transforms `series` (mean handling per `spec`, one-based phase) and fits it.
pub fn fit_series(series: &ComplexSeries, spec: &FitSpec) -> Result<(SpectralData, FitResult)> {
    let sd = dft_with(
        series,
        DftOptions {
            mean_subtract: spec.mean_subtract,
            phase: PhaseReference::OneBased,
        },
    )?;
    let res = fit(&sd, spec)?;
    Ok((sd, res))
}

/// Marginal fit to an arbitrary set of periodogram ordinates on `grid`, with `psi` held fixed.
///
/// Used by the frequency-domain bootstrap, where only pseudo-periodograms exist.
pub fn fit_marginal_periodogram(
    grid: &FrequencyGrid,
    periodogram: &[f64],
    exclude_zero: bool,
    spec: &FitSpec,
    psi: f64,
) -> Result<FitResult> {
    spec.check()?;
    if spec.likelihood != Likelihood::Marginal {
        return Err(Error::input("periodogram-only fits use the marginal likelihood"));
    }
    if periodogram.len() != grid.omegas.len() {
        return Err(Error::input("periodogram length does not match the grid"));
    }
    let used = used_indices(grid, spec.bands.as_deref(), exclude_zero);
    fit_design(grid, periodogram, None, &used, spec, Some(psi), None)
}

fn fit_design(
    grid: &FrequencyGrid,
    periodogram: &[f64],
    transforms: Option<(&[Complex64], &[Complex64])>,
    used: &[usize],
    spec: &FitSpec,
    psi_fixed: Option<f64>,
    orientation: Option<&dyn Fn(f64) -> Option<f64>>,
) -> Result<FitResult> {
    if used.is_empty() {
        return Err(Error::input("no Fourier frequencies fall inside the requested bands"));
    }
    let layout = Layout::new(spec.model, spec.likelihood);
    let mut design = Design::new(grid, used, periodogram, transforms, spec.k_max);
    let scale = match &design.full {
        Some((i_neg, _)) => {
            (design.i_pos.iter().sum::<f64>() + i_neg.iter().sum::<f64>()) / (2 * used.len()) as f64
        }
        None => design.i_pos.iter().sum::<f64>() / used.len() as f64,
    };
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::input("periodogram is zero or non-finite over the selected frequencies"));
    }
    design.rescale(scale);
    let scaled: Vec<f64> = periodogram.iter().map(|v| v / scale).collect();

    let mut start = match spec.optimizer.init {
        Init::Auto => auto_init(grid, &scaled, used, &layout, orientation)?,
        Init::Given(g) => {
            g.validate()?;
            GeometricParams { a2: g.a2 / scale, ..g }
        }
    };
    if let Some(beta) = layout.fixed_beta {
        start.beta = beta;
    }
    if !layout.rho_free {
        start.rho = 1.0;
        start.psi = 0.0;
    }
    let psi_default = psi_fixed.unwrap_or(if layout.psi_free { 0.0 } else { start.psi });
    let problem = Problem {
        design: &design,
        layout,
        likelihood: spec.likelihood,
        psi_default: if layout.rho_free { psi_default } else { 0.0 },
    };
    let (g_scaled, _, converged, iterations, evaluations) =
        problem.minimize(&start, grid.spacing(), &spec.optimizer);
    let geo = GeometricParams {
        a2: g_scaled.a2 * scale,
        ..g_scaled
    };

    let mut original = Design::new(grid, used, periodogram, transforms, spec.k_max);
    original.rescale(1.0);
    let loglik = -original.objective(spec.likelihood, &geo, &mut Vec::new());
    let identifiable = used.len() >= layout.dim();
    let mut flags = boundary_flags(&geo, &layout, grid);
    if !identifiable {
        flags = BoundaryFlags {
            alpha: true,
            beta: layout.fixed_beta.is_none(),
            rho: layout.rho_free,
            psi: layout.psi_free,
            a2: true,
        };
    }
    let ell = geo.to_elliptical()?;
    Ok(FitResult {
        geo,
        ell,
        psi_hat: geo.psi,
        loglik,
        converged: converged && identifiable && loglik.is_finite(),
        n_freqs_used: used.len(),
        boundary_flags: flags,
        iterations,
        evaluations,
    })
}

/// Used frequency with the largest periodogram ordinate whose mirror is also on the grid.
fn periodogram_peak(sd: &SpectralData, used: &[usize]) -> Option<f64> {
    used.iter()
        .map(|&i| (sd.grid.omegas[i], sd.periodogram[i]))
        .filter(|&(w, _)| w != 0.0 && peak_index(&sd.grid, w).is_ok())
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(w, _)| w)
}

fn peak_index(grid: &FrequencyGrid, omega: f64) -> Result<usize> {
    let spacing = grid.spacing();
    let k = (omega / spacing).round() as i64;
    let n = grid.n as i64;
    let k_lo = -((n + 1) / 2) + 1;
    let i = k - k_lo;
    let mirror = -k - k_lo;
    if i < 0 || i >= n || mirror < 0 || mirror >= n {
        return Err(Error::input(format!(
            "frequency {omega} and its mirror are not both on the Fourier grid"
        )));
    }
    Ok(i as usize)
}

/// `(J_Z(omega), J_{Z*}(omega))` at the grid point nearest `omega_max`.
fn transform_pair(sd: &SpectralData, omega_max: f64) -> Result<(Complex64, Complex64)> {
    if !omega_max.is_finite() {
        return Err(Error::input("peak frequency must be finite"));
    }
    let i = peak_index(&sd.grid, omega_max)?;
    Ok((sd.j_z[i], sd.j_zconj[i]))
}

/// Orientation `1/2 arg{J_Z(omega) conj(J_{Z*}(omega))}` at the grid point nearest `omega_max`.
///
/// `conj(J_{Z*}(omega)) = J_Z(-omega)`, so the phase reference of the time index cancels.
pub fn estimate_orientation(sd: &SpectralData, omega_max: f64) -> Result<f64> {
    let (a, b) = transform_pair(sd, omega_max)?;
    let floor = 1e-14 * (sd.periodogram.iter().sum::<f64>() / sd.periodogram.len() as f64).sqrt();
    if a.norm() <= floor || b.norm() <= floor || a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(Error::input(format!(
            "DFT vanishes at +-{omega_max}; orientation is undefined"
        )));
    }
    Ok(wrap_orientation(0.5 * (a * b.conj()).arg()))
}

/// Non-parametric eccentricity `2 sqrt(|J_Z(w)| |J_Z(-w)|) / (|J_Z(w)| + |J_Z(-w)|)`.
pub fn estimate_eccentricity_np(sd: &SpectralData, omega_max: f64) -> Result<f64> {
    let (a, b) = transform_pair(sd, omega_max)?;
    let (a, b) = (a.norm(), b.norm());
    if a + b == 0.0 {
        return Err(Error::input(format!(
            "DFT vanishes at both +-{omega_max}; eccentricity is undefined"
        )));
    }
    Ok(2.0 * (a * b).sqrt() / (a + b))
}
