//! Power and complementary spectra, their aliased forms, and autocovariances.
//!
//! Spectra use the forward transform `S(omega) = integral s(tau) exp(-i omega tau) dtau`.
//! Writing `L(x) = 1 / (alpha^2 + x^2)`, the elliptical OU has
//!
//! ```text
//! S_z(omega) = (A^2/4) [ (1/rho + rho)^2 L(omega - beta) + (1/rho - rho)^2 L(omega + beta) ]
//! R_z(omega) = (A^2/4) (1/rho^2 - rho^2) [ L(omega - beta) + L(omega + beta) ] exp(2 i psi)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::GeometricParams;

/// Default truncation of the aliasing sum.
pub const DEFAULT_ALIAS_TERMS: usize = 10;

/// A frequency grid with the sampling it was built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    /// Angular frequencies (radians per unit time), strictly increasing.
    pub omegas: Vec<f64>,
    pub delta: f64,
    pub n: usize,
}

impl FrequencyGrid {
    /// Fourier frequencies `2 pi k / (n delta)` for `k = -ceil(n/2)+1, ..., floor(n/2)`.
    pub fn fourier(n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("grid needs at least one sample"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::input(format!("sampling interval must be positive, got {delta}")));
        }
        let omegas = fourier_indices(n)
            .map(|k| 2.0 * PI * k as f64 / (n as f64 * delta))
            .collect();
        Ok(FrequencyGrid { omegas, delta, n })
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Spacing between adjacent Fourier frequencies.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.delta)
    }

    /// Nyquist frequency `pi / delta`.
    pub fn nyquist(&self) -> f64 {
        PI / self.delta
    }
}

/// Integer frequency indices of the canonical grid, ascending.
pub fn fourier_indices(n: usize) -> impl Iterator<Item = i64> {
    let n = n as i64;
    let lo = -((n + 1) / 2) + 1;
    let hi = n / 2;
    lo..=hi
}

/// Entries of the 2x2 spectral matrix `[[S(w), R(w)], [R*(w), S(-w)]]` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralValue {
    pub s_pos: f64,
    pub s_neg: f64,
    pub r_val: Complex64,
    /// `s_pos * s_neg - |r_val|^2`, evaluated without cancellation where a closed form exists.
    pub det: f64,
}

impl SpectralValue {
    fn from_parts(s_pos: f64, s_neg: f64, r_val: Complex64, det: f64) -> Self {
        SpectralValue {
            s_pos,
            s_neg,
            r_val,
            det,
        }
    }

    /// Determinant computed directly from the entries.
    pub fn direct_determinant(&self) -> f64 {
        self.s_pos * self.s_neg - self.r_val.norm_sqr()
    }
}

#[inline]
fn lorentz(alpha2: f64, x: f64) -> f64 {
    1.0 / (alpha2 + x * x)
}

/// Peak-at-`+beta` and peak-at-`-beta` Lorentzians, optionally folded.
#[inline]
fn lorentz_pair(g: &GeometricParams, omega: f64, fold: Option<(f64, usize)>) -> (f64, f64) {
    let a2 = g.alpha * g.alpha;
    match fold {
        None | Some((_, 0)) => (lorentz(a2, omega - g.beta), lorentz(a2, omega + g.beta)),
        Some((delta, k_max)) => {
            let step = 2.0 * PI / delta;
                let (mut l1, mut l2) = (0.0, 0.0);
            let k = k_max as i64;
            for j in -k..=k {
                let w = omega + step * j as f64;
                l1 += lorentz(a2, w - g.beta);
                l2 += lorentz(a2, w + g.beta);
            }
            (l1, l2)
        }
    }
}

/// Writes the folded Lorentzian peaked at `+beta` for each frequency into `out`.
///
/// The `-beta` companion at `omega` equals this function at `-omega`.
pub(crate) fn fold_lorentzian(
    alpha: f64,
    beta: f64,
    omegas: &[f64],
    delta: f64,
    k_max: usize,
    out: &mut [f64],
) {
    let a2 = alpha * alpha;
    let step = 2.0 * PI / delta;
    out.iter_mut().for_each(|v| *v = 0.0);
    let k = k_max as i64;
    for j in -k..=k {
        let shift = step * j as f64 - beta;
        for (o, &w) in out.iter_mut().zip(omegas) {
            let x = w + shift;
            *o += 1.0 / (a2 + x * x);
        }
    }
}

#[inline]
pub(crate) fn combine(g: &GeometricParams, l1: f64, l2: f64) -> SpectralValue {
    let inv = 1.0 / g.rho;
    let major = (inv + g.rho).powi(2);
    let minor = (inv - g.rho).powi(2);
    let q = 0.25 * g.a2;
    let s_pos = q * (major * l1 + minor * l2);
    let s_neg = q * (major * l2 + minor * l1);
    let stretch = q * (inv * inv - g.rho * g.rho) * (l1 + l2);
    let r_val = Complex64::from_polar(stretch, 2.0 * g.psi);
    // (major * minor) = (1/rho^2 - rho^2)^2 cancels exactly, leaving A^4 l1 l2.
    let det = g.a2 * g.a2 * l1 * l2;
    SpectralValue::from_parts(s_pos, s_neg, r_val, det)
}

/// Spectrum of the circular complex OU, `A^2 / (alpha^2 + (omega - beta)^2)`.
pub fn psd_complex_ou(g: &GeometricParams, omega: f64) -> Result<f64> {
    if g.rho != 1.0 {
        return Err(Error::constraint(
            "circular process",
            format!("the complex OU spectrum needs rho = 1, got {}", g.rho),
        ));
    }
    g.validate()?;
    Ok(g.a2 * lorentz(g.alpha * g.alpha, omega - g.beta))
}

/// Power spectral density `S_z(omega)`.
pub fn psd(g: &GeometricParams, omega: f64) -> f64 {
    let (l1, l2) = lorentz_pair(g, omega, None);
    combine(g, l1, l2).s_pos
}

/// Complementary spectrum `R_z(omega)`.
pub fn comp_spectrum(g: &GeometricParams, omega: f64) -> Complex64 {
    let (l1, l2) = lorentz_pair(g, omega, None);
    combine(g, l1, l2).r_val
}

/// `S_z` folded over `k = -k_max..=k_max` copies spaced `2 pi / delta` apart.
pub fn aliased_psd(g: &GeometricParams, omega: f64, delta: f64, k_max: usize) -> f64 {
    let (l1, l2) = lorentz_pair(g, omega, Some((delta, k_max)));
    combine(g, l1, l2).s_pos
}

/// `R_z` folded the same way as [`aliased_psd`].
pub fn aliased_comp_spectrum(g: &GeometricParams, omega: f64, delta: f64, k_max: usize) -> Complex64 {
    let (l1, l2) = lorentz_pair(g, omega, Some((delta, k_max)));
    combine(g, l1, l2).r_val
}

/// Aliased spectral matrix at one frequency.
pub fn spectral_matrix(
    g: &GeometricParams,
    omega: f64,
    delta: f64,
    k_max: usize,
) -> Result<SpectralValue> {
    let (l1, l2) = lorentz_pair(g, omega, Some((delta, k_max)));
    let v = combine(g, l1, l2);
    check_realizable(&v, omega)?;
    Ok(v)
}

/// Aliased spectral matrix over a list of frequencies.
pub fn spectral_matrix_grid(
    g: &GeometricParams,
    omegas: &[f64],
    delta: f64,
    k_max: usize,
) -> Result<Vec<SpectralValue>> {
    omegas
        .iter()
        .map(|&w| spectral_matrix(g, w, delta, k_max))
        .collect()
}

/// Aliased `S_z` over a list of frequencies.
pub fn aliased_psd_grid(g: &GeometricParams, omegas: &[f64], delta: f64, k_max: usize) -> Vec<f64> {
    omegas
        .iter()
        .map(|&w| aliased_psd(g, w, delta, k_max))
        .collect()
}

fn check_realizable(v: &SpectralValue, omega: f64) -> Result<()> {
    let ok = v.s_pos.is_finite()
        && v.s_neg.is_finite()
        && v.s_pos > 0.0
        && v.s_neg > 0.0
        && v.det >= 0.0
        && v.r_val.norm_sqr() <= v.s_pos * v.s_neg * (1.0 + 1e-12);
    if ok {
        Ok(())
    } else {
        Err(Error::Internal(format!(
            "spectral matrix not positive semi-definite at omega = {omega}: {v:?}"
        )))
    }
}

/// Autocovariance `s_z(tau) = E[z(t) z*(t + tau)]`.
///
/// The sign of `tau` follows the convention under which the complex OU has
/// `s_z(tau) = A^2/(2 alpha) exp(-alpha |tau|) exp(i beta tau)`.
pub fn autocovariance(g: &GeometricParams, tau: f64) -> Complex64 {
    let inv = 1.0 / g.rho;
    let scale = g.a2 / (8.0 * g.alpha) * (-g.alpha * tau.abs()).exp();
    let major = (inv + g.rho).powi(2);
    let minor = (inv - g.rho).powi(2);
    let phase = Complex64::from_polar(1.0, g.beta * tau);
    scale * (major * phase + minor * phase.conj())
}

/// Complementary autocovariance `r_z(tau) = E[z(t) z(t + tau)]`.
pub fn comp_autocovariance(g: &GeometricParams, tau: f64) -> Complex64 {
    let inv = 1.0 / g.rho;
    let amp = g.a2 / (4.0 * g.alpha)
        * (inv * inv - g.rho * g.rho)
        * (-g.alpha * tau.abs()).exp()
        * (g.beta * tau).cos();
    Complex64::from_polar(amp, 2.0 * g.psi)
}

/// Spectral matrix computed through the Cartesian components.
///
/// Starts from the auto- and cross-spectra of the circular bivariate OU, pushes them through
/// the stretch-and-rotate map `x = a x~ + b y~, y = c x~ + d y~`, and recombines
/// `S_z = S_x + S_y + 2 Im S_xy`, `R_z = S_x - S_y + 2 i Re S_xy`. Shares no code with
/// [`psd`] and [`comp_spectrum`] and serves as their test oracle.
pub fn cartesian_spectral_value(g: &GeometricParams, omega: f64) -> SpectralValue {
    let at = |w: f64| {
        let m1 = 1.0 / (g.alpha.powi(2) + (w - g.beta).powi(2));
        let m2 = 1.0 / (g.alpha.powi(2) + (w + g.beta).powi(2));
        let sxt = g.a2 / 4.0 * (m1 + m2);
        let syt = sxt;
        let sxyt = Complex64::new(0.0, g.a2 / 4.0 * (m1 - m2));

        let (s, c) = g.psi.sin_cos();
        let a = c / g.rho;
        let b = -g.rho * s;
        let cc = s / g.rho;
        let d = g.rho * c;

        let sx = a * a * sxt + b * b * syt + a * b * (sxyt + sxyt.conj()).re;
        let sy = cc * cc * sxt + d * d * syt + cc * d * (sxyt + sxyt.conj()).re;
        let sxy = a * cc * sxt + b * d * syt + a * d * sxyt + b * cc * sxyt.conj();

        let sz = sx + sy + 2.0 * sxy.im;
        let rz = Complex64::new(sx - sy, 0.0) + Complex64::new(0.0, 2.0) * sxy.re;
        (sz, rz)
    };
    let (s_pos, r_val) = at(omega);
    let (s_neg, _) = at(-omega);
    SpectralValue::from_parts(s_pos, s_neg, r_val, s_pos * s_neg - r_val.norm_sqr())
}
