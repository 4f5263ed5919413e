//! Path simulation and improper complex-normal draws.
//!
//! Every simulation owns a ChaCha8 stream keyed by `(seed, replicate)`; the generator's block
//! counter plays the role of the step index, so replicates are independent and reproducible
//! regardless of how they are scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{to_geometric, EllipticalParams, GeometricParams};
use crate::spectral::{autocovariance, comp_autocovariance};

/// Default number of internal steps per output sample.
pub const DEFAULT_SUBSTEPS: usize = 100;

/// Default burn-in, in units of the decorrelation time `1/alpha`.
pub const DEFAULT_BURN_IN_DECAYS: f64 = 50.0;

/// A regularly sampled complex series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSeries {
    pub values: Vec<Complex64>,
    pub delta: f64,
    pub t0: f64,
}

impl ComplexSeries {
    pub fn new(values: Vec<Complex64>, delta: f64, t0: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("series must contain at least one sample"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::input(format!("sampling interval must be positive, got {delta}")));
        }
        if !t0.is_finite() {
            return Err(Error::input("start time must be finite"));
        }
        Ok(ComplexSeries { values, delta, t0 })
    }

    /// Builds a series from separate real and imaginary parts.
    pub fn from_xy(x: &[f64], y: &[f64], delta: f64, t0: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::input(format!(
                "x has {} samples but y has {}",
                x.len(),
                y.len()
            )));
        }
        let values = x.iter().zip(y).map(|(&a, &b)| Complex64::new(a, b)).collect();
        ComplexSeries::new(values, delta, t0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.delta
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }
}

/// How the state is initialised before burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum InitialState {
    #[default]
    Zero,
    Value(Complex64),
    /// A draw from the stationary law.
    StationaryDraw,
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Euler-Maruyama with `substeps` internal steps per output sample.
    #[default]
    EulerMaruyama,
    /// Exact Gaussian transition over each output interval; `substeps` is ignored.
    ExactTransition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_out: usize,
    pub delta_out: f64,
    pub substeps: usize,
    /// Time discarded before the first recorded sample; `None` means `50 / alpha`.
    pub burn_in: Option<f64>,
    pub seed: u64,
    /// Independent stream index for replicate `replicate` under the same seed.
    pub replicate: u64,
    pub z0: InitialState,
    pub scheme: Scheme,
    /// Suppress the stochastic forcing (deterministic diagnostics).
    pub noiseless: bool,
}

impl SimConfig {
    pub fn new(n_out: usize, delta_out: f64, seed: u64) -> Self {
        SimConfig {
            n_out,
            delta_out,
            substeps: DEFAULT_SUBSTEPS,
            burn_in: None,
            seed,
            replicate: 0,
            z0: InitialState::Zero,
            scheme: Scheme::EulerMaruyama,
            noiseless: false,
        }
    }

    pub fn with_replicate(mut self, replicate: u64) -> Self {
        self.replicate = replicate;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n_out == 0 {
            return Err(Error::input("n_out must be at least 1"));
        }
        if !(self.delta_out > 0.0 && self.delta_out.is_finite()) {
            return Err(Error::input(format!(
                "output interval must be positive, got {}",
                self.delta_out
            )));
        }
        if self.substeps == 0 {
            return Err(Error::input("substeps must be at least 1"));
        }
        if let Some(b) = self.burn_in {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::input(format!("burn-in must be non-negative, got {b}")));
            }
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.replicate);
        rng
    }
}

/// Real 2x2 matrix acting on `(Re z, Im z)`.
pub(crate) type Mat2 = [[f64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

#[inline]
fn apply(m: &Mat2, z: Complex64) -> Complex64 {
    Complex64::new(
        m[0][0] * z.re + m[0][1] * z.im,
        m[1][0] * z.re + m[1][1] * z.im,
    )
}

fn inverse(m: &Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

/// Real matrix of the widely linear map `z -> mu z + nu z*`.
pub(crate) fn widely_linear(mu: Complex64, nu: Complex64) -> Mat2 {
    [
        [mu.re + nu.re, -mu.im + nu.im],
        [mu.im + nu.im, mu.re - nu.re],
    ]
}

/// Stretch-then-rotate deformation `Q P` taking the circular process to the elliptical one.
pub(crate) fn deformation(g: &GeometricParams) -> Mat2 {
    let (s, c) = g.psi.sin_cos();
    [[c / g.rho, -g.rho * s], [s / g.rho, g.rho * c]]
}

/// Improper complex normal `CN(0, sigma2, r)`, pre-factored for repeated draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexNormal {
    factor: Mat2,
}

impl ComplexNormal {
    pub fn new(sigma2: f64, r: Complex64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite() && r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::input(format!(
                "complex normal needs finite sigma2 >= 0, got sigma2 = {sigma2}, r = {r}"
            )));
        }
        if r.norm() > sigma2 * (1.0 + 1e-12) {
            return Err(Error::constraint(
                "complex normal",
                format!("|r| = {} exceeds sigma2 = {sigma2}", r.norm()),
            ));
        }
        let vxx = 0.5 * (sigma2 + r.re);
        let vyy = 0.5 * (sigma2 - r.re);
        let cxy = 0.5 * r.im;
        Ok(ComplexNormal {
            factor: cholesky(vxx, vyy, cxy),
        })
    }

    /// From a real covariance of `(Re B, Im B)`.
    fn from_covariance(vxx: f64, vyy: f64, cxy: f64) -> Self {
        ComplexNormal {
            factor: cholesky(vxx, vyy, cxy),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        apply(&self.factor, Complex64::new(a, b))
    }
}

/// Lower Cholesky factor of a 2x2 PSD covariance, tolerant of rank deficiency.
fn cholesky(vxx: f64, vyy: f64, cxy: f64) -> Mat2 {
    let vxx = vxx.max(0.0);
    if vxx == 0.0 {
        return [[0.0, 0.0], [0.0, vyy.max(0.0).sqrt()]];
    }
    let l11 = vxx.sqrt();
    let l21 = cxy / l11;
    let l22 = (vyy - l21 * l21).max(0.0).sqrt();
    [[l11, 0.0], [l21, l22]]
}

/// One increment `sqrt(dt) B` with `B ~ CN(0, sigma2, r)`.
pub fn sample_increment<R: Rng + ?Sized>(
    sigma2: f64,
    r: Complex64,
    dt: f64,
    rng: &mut R,
) -> Result<Complex64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::input(format!("time step must be positive, got {dt}")));
    }
    Ok(ComplexNormal::new(sigma2, r)?.sample(rng) * dt.sqrt())
}

/// Linear SDE `dX = L X dt + M dW` (real, two-dimensional), observed through `out`.
struct LinearSde {
    drift: Mat2,
    noise: Mat2,
    out: Mat2,
}

fn burn_in_time(cfg: &SimConfig, alpha: f64) -> f64 {
    cfg.burn_in.unwrap_or(DEFAULT_BURN_IN_DECAYS / alpha)
}

fn euler_path(
    sde: &LinearSde,
    cfg: &SimConfig,
    z0: Complex64,
    burn_in: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Complex64> {
    let dt = cfg.delta_out / cfg.substeps as f64;
    let sqdt = dt.sqrt();
    let step_matrix = {
        let mut m = sde.drift;
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v *= dt;
            }
        }
        m[0][0] += 1.0;
        m[1][1] += 1.0;
        m
    };
    let noise = sde.noise;
    let step = |x: Complex64, rng: &mut ChaCha8Rng| {
        let next = apply(&step_matrix, x);
        if cfg.noiseless {
            next
        } else {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            next + apply(&noise, Complex64::new(a, b)) * sqdt
        }
    };
    let mut x = apply(&inverse(&sde.out), z0);
    let burn_steps = (burn_in / dt).ceil() as u64;
    for _ in 0..burn_steps {
        x = step(x, rng);
    }
    let mut values = Vec::with_capacity(cfg.n_out);
    values.push(apply(&sde.out, x));
    for _ in 1..cfg.n_out {
        for _ in 0..cfg.substeps {
            x = step(x, rng);
        }
        values.push(apply(&sde.out, x));
    }
    values
}

/// Exact transition over `h`: `Phi = exp(L h)` for drift eigenvalues `-alpha +- i beta`,
/// innovation covariance `Sigma - Phi Sigma Phi^T`.
fn exact_path(
    p: &EllipticalParams,
    g: &GeometricParams,
    cfg: &SimConfig,
    z0: Complex64,
    burn_in: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Complex64> {
    let h = cfg.delta_out;
    let l = widely_linear(p.linear_coefficient(), p.conjugate_coefficient());
    let phi = transition_matrix(&l, g.alpha, g.beta, h);
    let sigma = stationary_covariance(g);
    let carried = mat_mul(&mat_mul(&phi, &sigma), &transpose(&phi));
    let innovation = ComplexNormal::from_covariance(
        sigma[0][0] - carried[0][0],
        sigma[1][1] - carried[1][1],
        sigma[0][1] - carried[0][1],
    );
    let step = |x: Complex64, rng: &mut ChaCha8Rng| {
        let next = apply(&phi, x);
        if cfg.noiseless {
            next
        } else {
            next + innovation.sample(rng)
        }
    };
    let mut x = z0;
    if burn_in > 0.0 {
        let burn_steps = (burn_in / h).ceil() as u64;
        for _ in 0..burn_steps {
            x = step(x, rng);
        }
    }
    let mut values = Vec::with_capacity(cfg.n_out);
    values.push(x);
    for _ in 1..cfg.n_out {
        x = step(x, rng);
        values.push(x);
    }
    values
}

/// `exp(L h)` for a real 2x2 `L` with eigenvalues `-alpha +- i beta`.
pub(crate) fn transition_matrix(l: &Mat2, alpha: f64, beta: f64, h: f64) -> Mat2 {
    let decay = (-alpha * h).exp();
    let c = (beta * h).cos();
    let sinc = if beta == 0.0 { h } else { (beta * h).sin() / beta };
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { 1.0 } else { 0.0 };
            let shifted = l[i][j] + alpha * id;
            m[i][j] = decay * (c * id + sinc * shifted);
        }
    }
    m
}

/// Stationary covariance of `(Re z, Im z)`.
pub(crate) fn stationary_covariance(g: &GeometricParams) -> Mat2 {
    let s0 = autocovariance(g, 0.0).re;
    let r0 = comp_autocovariance(g, 0.0);
    let cxy = 0.5 * r0.im;
    [[0.5 * (s0 + r0.re), cxy], [cxy, 0.5 * (s0 - r0.re)]]
}

fn initial_value(
    cfg: &SimConfig,
    g: &GeometricParams,
    rng: &mut ChaCha8Rng,
) -> Result<Complex64> {
    Ok(match cfg.z0 {
        InitialState::Zero => Complex64::new(0.0, 0.0),
        InitialState::Value(z) => {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::input("initial value must be finite"));
            }
            z
        }
        InitialState::StationaryDraw => {
            let s = stationary_covariance(g);
            ComplexNormal::from_covariance(s[0][0], s[1][1], s[0][1]).sample(rng)
        }
    })
}

/// Simulates the complex SDE and samples it every `delta_out`, starting at `t0 = 0`.
pub fn simulate(p: &EllipticalParams, cfg: &SimConfig) -> Result<ComplexSeries> {
    p.validate()?;
    cfg.check()?;
    let g = to_geometric(p)?;
    let mut rng = cfg.rng();
    let z0 = initial_value(cfg, &g, &mut rng)?;
    let burn_in = burn_in_time(cfg, p.alpha1);
    let values = match cfg.scheme {
        Scheme::EulerMaruyama => {
            let noise = ComplexNormal::new(p.sigma2, p.r)?.factor;
            let sde = LinearSde {
                drift: widely_linear(p.linear_coefficient(), p.conjugate_coefficient()),
                noise,
                out: [[1.0, 0.0], [0.0, 1.0]],
            };
            euler_path(&sde, cfg, z0, burn_in, &mut rng)
        }
        Scheme::ExactTransition => exact_path(p, &g, cfg, z0, burn_in, &mut rng),
    };
    ComplexSeries::new(values, cfg.delta_out, 0.0)
}

/// Simulates the circular bivariate OU and deforms each output sample by `Q P`.
///
/// `cfg.z0` refers to the deformed (observed) coordinates.
pub fn simulate_bivariate(g: &GeometricParams, cfg: &SimConfig) -> Result<ComplexSeries> {
    g.validate()?;
    cfg.check()?;
    if cfg.scheme == Scheme::ExactTransition {
        return simulate(&g.to_elliptical()?, cfg);
    }
    let mut rng = cfg.rng();
    let z0 = initial_value(cfg, g, &mut rng)?;
    let amp = (0.5 * g.a2).sqrt();
    let sde = LinearSde {
        drift: [[-g.alpha, -g.beta], [g.beta, -g.alpha]],
        noise: [[amp, 0.0], [0.0, amp]],
        out: deformation(g),
    };
    let values = euler_path(&sde, cfg, z0, burn_in_time(cfg, g.alpha), &mut rng);
    ComplexSeries::new(values, cfg.delta_out, 0.0)
}

/// Euler path of the complex SDE driven by `noise_factor * (N(0,1), N(0,1))`, for coupling checks
/// against [`simulate_bivariate`].
#[doc(hidden)]
pub fn simulate_with_noise_factor(
    p: &EllipticalParams,
    noise_factor: [[f64; 2]; 2],
    cfg: &SimConfig,
) -> Result<ComplexSeries> {
    p.validate()?;
    cfg.check()?;
    let g = to_geometric(p)?;
    let mut rng = cfg.rng();
    let z0 = initial_value(cfg, &g, &mut rng)?;
    let sde = LinearSde {
        drift: widely_linear(p.linear_coefficient(), p.conjugate_coefficient()),
        noise: noise_factor,
        out: [[1.0, 0.0], [0.0, 1.0]],
    };
    let values = euler_path(&sde, cfg, z0, burn_in_time(cfg, p.alpha1), &mut rng);
    ComplexSeries::new(values, cfg.delta_out, 0.0)
}

/// Matched noise factor `Q P A / sqrt(2)` for [`simulate_with_noise_factor`].
#[doc(hidden)]
pub fn bivariate_noise_factor(g: &GeometricParams) -> [[f64; 2]; 2] {
    let amp = (0.5 * g.a2).sqrt();
    let mut m = deformation(g);
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v *= amp;
        }
    }
    m
}
