//! Scaled DFTs of a series and its conjugate, periodograms, band selection and smoothing.
//!
//! `J_Z(omega) = sqrt(delta/n) sum_t Z_t exp(-i omega t delta)` on the canonical Fourier grid,
//! with `t = 1..n` by default. `J_{Z*}(omega)` is the same transform of the conjugate series,
//! which equals `conj(J_Z(-omega))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::ComplexSeries;
use crate::spectral::{fourier_indices, FrequencyGrid};

/// Where the DFT time index starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseReference {
    /// `t = 1, ..., n`.
    #[default]
    OneBased,
    /// `t = 0, ..., n - 1`.
    ZeroBased,
}

impl PhaseReference {
    fn offset(self) -> f64 {
        match self {
            PhaseReference::OneBased => 1.0,
            PhaseReference::ZeroBased => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DftOptions {
    pub mean_subtract: bool,
    pub phase: PhaseReference,
}

impl DftOptions {
    /// Settings used for fitting: mean removed, one-based phase.
    pub fn for_fitting() -> Self {
        DftOptions {
            mean_subtract: true,
            phase: PhaseReference::OneBased,
        }
    }
}

/// Transforms of a series on its Fourier grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub grid: FrequencyGrid,
    pub j_z: Vec<Complex64>,
    pub j_zconj: Vec<Complex64>,
    /// `|J_Z(omega)|^2`.
    pub periodogram: Vec<f64>,
    /// Mean removed before transforming (zero when not requested).
    pub mean: Complex64,
    pub t0: f64,
    pub options: DftOptions,
}

/// A closed frequency interval in radians per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::input(format!("band [{lo}, {hi}] is not a valid interval")));
        }
        Ok(Band { lo, hi })
    }

    /// The interval and its mirror image, `[-hi, -lo]` and `[lo, hi]`.
    pub fn symmetric(lo: f64, hi: f64) -> Result<Vec<Band>> {
        let b = Band::new(lo, hi)?;
        Ok(vec![Band::new(-hi, -lo)?, b])
    }

    pub fn contains(&self, omega: f64) -> bool {
        let slack = 1e-12 * self.lo.abs().max(self.hi.abs()).max(1.0);
        omega >= self.lo - slack && omega <= self.hi + slack
    }
}

fn in_any(bands: &[Band], omega: f64) -> bool {
    bands.iter().any(|b| b.contains(omega))
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn delta(&self) -> f64 {
        self.grid.delta
    }

    pub fn omegas(&self) -> &[f64] {
        &self.grid.omegas
    }

    /// Grid positions whose frequency lies in the union of `bands`, ascending.
    pub fn band_indices(&self, bands: &[Band]) -> Vec<usize> {
        self.grid
            .omegas
            .iter()
            .enumerate()
            .filter(|(_, &w)| in_any(bands, w))
            .map(|(i, _)| i)
            .collect()
    }

    /// Grid position of frequency `-omega_i`, if it is on the grid.
    pub fn mirror_index(&self, i: usize) -> Option<usize> {
        let n = self.grid.n as i64;
        let k_lo = -((n + 1) / 2) + 1;
        let k = k_lo + i as i64;
        let m = -k;
        if m < k_lo || m > n / 2 {
            None
        } else {
            Some((m - k_lo) as usize)
        }
    }
}

/// Scaled DFT with default options: raw series, one-based phase.
pub fn dft(series: &ComplexSeries) -> Result<SpectralData> {
    dft_with(series, DftOptions::default())
}

pub fn dft_with(series: &ComplexSeries, options: DftOptions) -> Result<SpectralData> {
    let n = series.len();
    if n < 2 {
        return Err(Error::input(format!("DFT needs at least 2 samples, got {n}")));
    }
    if series.values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::input("series contains non-finite values"));
    }
    let grid = FrequencyGrid::fourier(n, series.delta)?;
    let mean = if options.mean_subtract {
        series.values.iter().sum::<Complex64>() / n as f64
    } else {
        Complex64::new(0.0, 0.0)
    };
    let mut buf: Vec<Complex64> = series.values.iter().map(|z| z - mean).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let scale = (series.delta / n as f64).sqrt();
    let offset = options.phase.offset();
    let ni = n as i64;
    let bin = |k: i64| buf[k.rem_euclid(ni) as usize];
    let twiddle = |k: i64| Complex64::from_polar(scale, -2.0 * PI * k as f64 * offset / n as f64);

    let mut j_z = Vec::with_capacity(n);
    let mut j_zconj = Vec::with_capacity(n);
    for k in fourier_indices(n) {
        j_z.push(twiddle(k) * bin(k));
        j_zconj.push((twiddle(-k) * bin(-k)).conj());
    }
    let periodogram = j_z.iter().map(|j| j.norm_sqr()).collect();
    Ok(SpectralData {
        grid,
        j_z,
        j_zconj,
        periodogram,
        mean,
        t0: series.t0,
        options,
    })
}

/// Direct `O(n)` evaluation of `J_Z` at an arbitrary frequency.
pub fn direct_transform(series: &ComplexSeries, omega: f64, phase: PhaseReference) -> Complex64 {
    let n = series.len();
    let scale = (series.delta / n as f64).sqrt();
    let offset = phase.offset();
    series
        .values
        .iter()
        .enumerate()
        .map(|(t, z)| z * Complex64::from_polar(1.0, -omega * (t as f64 + offset) * series.delta))
        .sum::<Complex64>()
        * scale
}

/// Inverts [`dft_with`], restoring any subtracted mean.
pub fn inverse(sd: &SpectralData) -> Result<ComplexSeries> {
    let n = sd.n();
    let coeffs = raw_coefficients(sd);
    let values = inverse_raw(coeffs, n)
        .into_iter()
        .map(|z| z + sd.mean)
        .collect();
    ComplexSeries::new(values, sd.delta(), sd.t0)
}

/// Unscaled FFT bins in natural order, recovered from `j_z`.
fn raw_coefficients(sd: &SpectralData) -> Vec<Complex64> {
    let n = sd.n();
    let scale = (sd.delta() / n as f64).sqrt();
    let offset = sd.options.phase.offset();
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    for (k, j) in fourier_indices(n).zip(&sd.j_z) {
        let untwist = Complex64::from_polar(1.0 / scale, 2.0 * PI * k as f64 * offset / n as f64);
        bins[k.rem_euclid(n as i64) as usize] = j * untwist;
    }
    bins
}

fn inverse_raw(mut bins: Vec<Complex64>, n: usize) -> Vec<Complex64> {
    FftPlanner::new().plan_fft_inverse(n).process(&mut bins);
    let inv_n = 1.0 / n as f64;
    bins.iter().map(|z| z * inv_n).collect()
}

/// Periodogram peak within `band`. Ties go to smaller `|omega|`, then to negative `omega`.
pub fn peak_frequency(sd: &SpectralData, band: &Band) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (&w, &p) in sd.grid.omegas.iter().zip(&sd.periodogram) {
        if !band.contains(w) {
            continue;
        }
        best = match best {
            None => Some((w, p)),
            Some((bw, bp)) => {
                let better = p > bp
                    || (p == bp && (w.abs() < bw.abs() || (w.abs() == bw.abs() && w < bw)));
                if better {
                    Some((w, p))
                } else {
                    Some((bw, bp))
                }
            }
        };
    }
    best.map(|(w, _)| w).ok_or_else(|| {
        Error::input(format!(
            "band [{}, {}] contains no Fourier frequency",
            band.lo, band.hi
        ))
    })
}

/// Keeps only the Fourier components whose frequency lies in one of `bands`.
pub fn boxcar_bandpass(series: &ComplexSeries, bands: &[Band]) -> Result<ComplexSeries> {
    let n = series.len();
    if n < 2 {
        return Ok(series.clone());
    }
    let grid = FrequencyGrid::fourier(n, series.delta)?;
    let mut bins = series.values.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut bins);
    for (k, &w) in fourier_indices(n).zip(&grid.omegas) {
        if !in_any(bands, w) {
            bins[k.rem_euclid(n as i64) as usize] = Complex64::new(0.0, 0.0);
        }
    }
    ComplexSeries::new(inverse_raw(bins, n), series.delta, series.t0)
}

/// Epanechnikov-smoothed periodogram with circular wrap across the Nyquist frequency.
pub fn smooth_periodogram(sd: &SpectralData, bandwidth: f64) -> Result<Vec<f64>> {
    smooth_ordinates(&sd.periodogram, sd.grid.spacing(), bandwidth)
}

/// Smooths ordinates on a uniform circular grid of the given spacing.
///
/// Weights are `0.75 (1 - u^2)` at `u = m * spacing / bandwidth` for grid offsets `m`, so a
/// bandwidth not exceeding the spacing leaves the input unchanged.
pub fn smooth_ordinates(values: &[f64], spacing: f64, bandwidth: f64) -> Result<Vec<f64>> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::input(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let n = values.len();
    let reach = ((bandwidth / spacing).ceil() as usize).min(n.saturating_sub(1) / 2);
    let weights: Vec<f64> = (0..=reach)
        .map(|m| {
            let u = m as f64 * spacing / bandwidth;
            if u < 1.0 {
                0.75 * (1.0 - u * u)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights[0] + 2.0 * weights[1..].iter().sum::<f64>();
    let out = (0..n)
        .map(|i| {
            let mut acc = weights[0] * values[i];
            for (m, &w) in weights.iter().enumerate().skip(1) {
                if w == 0.0 {
                    continue;
                }
                acc += w * (values[(i + m) % n] + values[(i + n - m % n) % n]);
            }
            acc / total
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::EllipticalParams;
    use crate::sampling::{simulate, SimConfig};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_series(n: usize, delta: f64, seed: u64) -> ComplexSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.3, rng.random::<f64>() + 0.1))
            .collect();
        ComplexSeries::new(v, delta, 0.0).unwrap()
    }

    #[test]
    fn grid_for_four_samples() {
        let s = random_series(4, 1.0, 0);
        let sd = dft(&s).unwrap();
        assert_eq!(sd.grid.omegas, vec![-PI / 2.0, 0.0, PI / 2.0, PI]);
    }

    #[test]
    fn constant_series_dc() {
        let c = Complex64::new(1.5, -0.5);
        let s = ComplexSeries::new(vec![c; 9], 1.0, 0.0).unwrap();
        let sd = dft(&s).unwrap();
        let zero = sd.grid.omegas.iter().position(|&w| w == 0.0).unwrap();
        assert!((sd.j_z[zero] - c * 3.0).norm() < 1e-14);
        for (i, j) in sd.j_z.iter().enumerate() {
            if i != zero {
                assert!(j.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn fft_matches_direct_sum() {
        for (n, phase) in [(17, PhaseReference::OneBased), (64, PhaseReference::ZeroBased), (33, PhaseReference::OneBased)] {
            let s = random_series(n, 0.7, n as u64);
            let sd = dft_with(&s, DftOptions { mean_subtract: false, phase }).unwrap();
            let conj = ComplexSeries::new(s.values.iter().map(|z| z.conj()).collect(), s.delta, 0.0).unwrap();
            for (i, &w) in sd.grid.omegas.iter().enumerate() {
                let d = direct_transform(&s, w, phase);
                assert!((sd.j_z[i] - d).norm() < 1e-10 * d.norm().max(1e-3));
                let dc = direct_transform(&conj, w, phase);
                assert!((sd.j_zconj[i] - dc).norm() < 1e-10 * dc.norm().max(1e-3));
                assert_eq!(sd.periodogram[i], sd.j_z[i].norm_sqr());
            }
        }
    }

    #[test]
    fn conjugate_pairs_and_real_input_symmetry() {
        let s = random_series(10, 1.0, 5);
        let sd = dft(&s).unwrap();
        for i in 0..sd.n() {
            if let Some(m) = sd.mirror_index(i) {
                assert!((sd.j_zconj[i] - sd.j_z[m].conj()).norm() < 1e-12);
            }
        }
        let real = ComplexSeries::new(s.values.iter().map(|z| Complex64::new(z.re, 0.0)).collect(), 1.0, 0.0).unwrap();
        let sd = dft(&real).unwrap();
        for i in 0..sd.n() {
            if let Some(m) = sd.mirror_index(i) {
                assert!((sd.periodogram[i] - sd.periodogram[m]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mirror_index_on_odd_and_even_grids() {
        let sd = dft(&random_series(4, 1.0, 0)).unwrap();
        assert_eq!(sd.mirror_index(0), Some(2));
        assert_eq!(sd.mirror_index(1), Some(1));
        assert_eq!(sd.mirror_index(3), None);
        let sd = dft(&random_series(5, 1.0, 0)).unwrap();
        assert_eq!(sd.mirror_index(0), Some(4));
        assert_eq!(sd.mirror_index(2), Some(2));
    }

    #[test]
    fn inverse_round_trip_with_mean() {
        let s = random_series(101, 0.25, 2);
        for opts in [DftOptions::default(), DftOptions::for_fitting()] {
            let back = inverse(&dft_with(&s, opts).unwrap()).unwrap();
            for (a, b) in s.values.iter().zip(&back.values) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_short_series() {
        let s = ComplexSeries::new(vec![Complex64::new(1.0, 0.0)], 1.0, 0.0).unwrap();
        assert!(dft(&s).is_err());
    }

    #[test]
    fn peak_rules() {
        let s = random_series(8, 1.0, 0);
        let mut sd = dft(&s).unwrap();
        let w = sd.grid.omegas[5];
        assert_eq!(peak_frequency(&sd, &Band::new(w, w).unwrap()).unwrap(), w);
        for p in sd.periodogram.iter_mut() {
            *p = 1.0;
        }
        let all = Band::new(-PI, PI).unwrap();
        assert_eq!(peak_frequency(&sd, &all).unwrap(), 0.0);
        let off = Band::new(0.5, 4.0).unwrap();
        assert_eq!(peak_frequency(&sd, &off).unwrap(), sd.grid.omegas[4]);
        let sym = Band::new(-1.0, 1.0).unwrap();
        sd.periodogram[3] = 0.5;
        assert_eq!(peak_frequency(&sd, &sym).unwrap(), -PI / 4.0);
        assert!(peak_frequency(&sd, &Band::new(0.1, 0.2).unwrap()).is_err());
    }

    #[test]
    fn peak_locates_oscillation() {
        let p = EllipticalParams::new(0.02, 1.0, -0.5, -0.3, 2.0);
        let s = simulate(&p, &SimConfig::new(1759, 1.0, 2024)).unwrap();
        let sd = dft(&s).unwrap();
        let w = peak_frequency(&sd, &Band::new(0.5, 1.5).unwrap()).unwrap();
        let beta = 0.66f64.sqrt();
        assert!((w - beta).abs() <= 2.0 * sd.grid.spacing(), "{w}");
        let scaled = ComplexSeries::new(s.values.iter().map(|z| z * 37.0).collect(), 1.0, 0.0).unwrap();
        assert_eq!(peak_frequency(&dft(&scaled).unwrap(), &Band::new(0.5, 1.5).unwrap()).unwrap(), w);
    }

    #[test]
    fn bandpass_properties() {
        let s = random_series(64, 0.5, 9);
        let full = boxcar_bandpass(&s, &[Band::new(-10.0, 10.0).unwrap()]).unwrap();
        for (a, b) in s.values.iter().zip(&full.values) {
            assert!((a - b).norm() < 1e-10);
        }
        let mean = s.values.iter().sum::<Complex64>() / 64.0;
        let dc = boxcar_bandpass(&s, &[Band::new(0.0, 0.0).unwrap()]).unwrap();
        for z in &dc.values {
            assert!((z - mean).norm() < 1e-12);
        }
        let bands = Band::symmetric(1.0, 3.0).unwrap();
        let out = boxcar_bandpass(&s, &bands).unwrap();
        let sd = dft(&s).unwrap();
        let kept: f64 = sd.band_indices(&bands).iter().map(|&i| sd.periodogram[i]).sum();
        let energy: f64 = out.values.iter().map(|z| z.norm_sqr()).sum();
        assert!((energy - kept / s.delta).abs() < 1e-10 * energy);
    }

    #[test]
    fn smoothing_edge_cases() {
        let flat = vec![2.5; 50];
        let out = smooth_ordinates(&flat, 0.1, 0.45).unwrap();
        assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-14));
        let raw: Vec<f64> = (0..50).map(|i| (i * i % 7) as f64).collect();
        assert_eq!(smooth_ordinates(&raw, 0.1, 0.1).unwrap(), raw);
        assert_eq!(smooth_ordinates(&raw, 0.1, 0.05).unwrap(), raw);
        let wider = smooth_ordinates(&raw, 0.1, 0.15).unwrap();
        assert_ne!(wider, raw);
        // Wrap-around: a spike at the first ordinate leaks to the last.
        let mut spike = vec![0.0; 20];
        spike[0] = 1.0;
        let s = smooth_ordinates(&spike, 1.0, 2.5).unwrap();
        assert!(s[19] > 0.0 && s[18] > 0.0 && s[17] == 0.0);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(smooth_ordinates(&raw, 0.1, 0.0).is_err());
    }

    #[test]
    fn smoothing_reduces_variance() {
        let p = EllipticalParams::new(0.5, 1.0, 0.0, 0.0, 1.0);
        let mut ratio_sum = 0.0;
        for r in 0..100 {
            let mut cfg = SimConfig::new(256, 1.0, 3).with_replicate(r);
            cfg.substeps = 10;
            let sd = dft(&simulate(&p, &cfg).unwrap()).unwrap();
            let sm = smooth_periodogram(&sd, 0.3).unwrap();
            let var = |v: &[f64]| {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|x| (x - m).powi(2)).sum::<f64>()
            };
            ratio_sum += var(&sm) / var(&sd.periodogram);
        }
        assert!(ratio_sum / 100.0 < 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn parseval(n in 2usize..200, seed in any::<u64>(), delta in 0.01..10.0f64) {
                let s = random_series(n, delta, seed);
                let sd = dft(&s).unwrap();
                let lhs: f64 = sd.periodogram.iter().sum();
                let rhs = delta * s.values.iter().map(|z| z.norm_sqr()).sum::<f64>();
                prop_assert!((lhs - rhs).abs() < 1e-10 * rhs);
            }

            #[test]
            fn round_trip(n in 2usize..300, seed in any::<u64>()) {
                let s = random_series(n, 1.0, seed);
                let back = inverse(&dft(&s).unwrap()).unwrap();
                for (a, b) in s.values.iter().zip(&back.values) {
                    prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
                }
            }
        }
    }
}
