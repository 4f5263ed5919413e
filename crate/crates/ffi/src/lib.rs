//! C ABI over `elliptical-ou`.
//!
//! Conventions:
//! - Every fallible function returns an `EouStatus`; results go through out-pointers, which are
//!   left untouched on failure (except `eou_fit`, which fills its output on non-convergence).
//! - `eou_last_error` gives a message for the most recent failure on the calling thread.
//! - Series and transforms are opaque handles owned by the caller and released with the
//!   matching `*_free` function. Passing NULL to a free function is a no-op.
//! - Enumerations are passed as `uint32_t` and validated; the enum types document the values.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use elliptical_ou::fourier::{dft_with, Band, DftOptions, PhaseReference, SpectralData};
use elliptical_ou::sampling::{simulate, ComplexSeries, Scheme, SimConfig};
use elliptical_ou::spectral::spectral_matrix;
use elliptical_ou::whittle::{self, FitSpec, Likelihood, Model};
use elliptical_ou::{EllipticalParams, Error, GeometricParams};
use num_complex::Complex64;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EouStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConstraintViolated = 3,
    NotConverged = 4,
    Internal = 5,
    Panic = 6,
}

/// Time-stepping schemes for `eou_simulate`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EouScheme {
    EulerMaruyama = 0,
    ExactTransition = 1,
}

/// Model families for `eou_fit`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EouModel {
    Elliptical = 0,
    Circular = 1,
    /// Elliptical with the oscillation frequency held at the supplied `beta`.
    EllipticalFixedBeta = 2,
}

/// Whittle likelihoods for `eou_fit`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EouLikelihood {
    Full = 0,
    Marginal = 1,
}

/// Coefficients of the complex SDE. `r_re`, `r_im` hold the noise pseudo-variance.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EouEllipticalParams {
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub sigma2: f64,
    pub r_re: f64,
    pub r_im: f64,
}

/// Geometric parameters: damping, frequency, stretch, orientation, noise amplitude.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EouGeometricParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub psi: f64,
    pub a2: f64,
}

/// Spectral matrix entries at one frequency.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EouSpectralValue {
    pub s_pos: f64,
    pub s_neg: f64,
    pub r_re: f64,
    pub r_im: f64,
    pub det: f64,
}

/// Bits of `EouFitResult::boundary_flags`.
pub const EOU_BOUNDARY_ALPHA: u32 = 1;
pub const EOU_BOUNDARY_BETA: u32 = 2;
pub const EOU_BOUNDARY_RHO: u32 = 4;
pub const EOU_BOUNDARY_PSI: u32 = 8;
pub const EOU_BOUNDARY_A2: u32 = 16;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EouFitResult {
    pub geometric: EouGeometricParams,
    pub elliptical: EouEllipticalParams,
    pub psi_hat: f64,
    pub loglik: f64,
    pub eccentricity: f64,
    /// 1 when the optimizer converged, 0 otherwise.
    pub converged: i32,
    pub n_freqs_used: usize,
    pub boundary_flags: u32,
    pub iterations: usize,
}

/// Opaque regularly sampled complex series.
pub struct EouSeries(ComplexSeries);

/// Opaque discrete Fourier transforms of a series.
pub struct EouSpectralData(SpectralData);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(EouStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Constraint { .. } => EouStatus::ConstraintViolated,
            Error::Internal(_) => EouStatus::Internal,
            _ => EouStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EouStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(EouStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EouStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EouStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EouStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a, T>(p: *mut T, n: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

impl From<EllipticalParams> for EouEllipticalParams {
    fn from(p: EllipticalParams) -> Self {
        EouEllipticalParams {
            alpha1: p.alpha1,
            beta1: p.beta1,
            alpha2: p.alpha2,
            beta2: p.beta2,
            sigma2: p.sigma2,
            r_re: p.r.re,
            r_im: p.r.im,
        }
    }
}

impl From<EouEllipticalParams> for EllipticalParams {
    fn from(p: EouEllipticalParams) -> Self {
        EllipticalParams {
            alpha1: p.alpha1,
            beta1: p.beta1,
            alpha2: p.alpha2,
            beta2: p.beta2,
            sigma2: p.sigma2,
            r: Complex64::new(p.r_re, p.r_im),
        }
    }
}

impl From<GeometricParams> for EouGeometricParams {
    fn from(g: GeometricParams) -> Self {
        EouGeometricParams {
            alpha: g.alpha,
            beta: g.beta,
            rho: g.rho,
            psi: g.psi,
            a2: g.a2,
        }
    }
}

impl From<EouGeometricParams> for GeometricParams {
    fn from(g: EouGeometricParams) -> Self {
        GeometricParams::new(g.alpha, g.beta, g.rho, g.psi, g.a2)
    }
}

/// Message for the most recent failure on this thread, or NULL if none. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eou_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eou_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fills `out` with the coefficients `(alpha1, beta1, alpha2, beta2, sigma2)` and the
/// pseudo-variance they imply.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one `EouEllipticalParams`.
#[no_mangle]
pub unsafe extern "C" fn eou_elliptical_new(
    alpha1: f64,
    beta1: f64,
    alpha2: f64,
    beta2: f64,
    sigma2: f64,
    out: *mut EouEllipticalParams,
) -> EouStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        let p = EllipticalParams::new(alpha1, beta1, alpha2, beta2, sigma2);
        p.validate()?;
        *out = p.into();
        Ok(())
    })
}

/// # Safety
/// `params` must be NULL or valid for reads; `out` NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eou_to_geometric(
    params: *const EouEllipticalParams,
    out: *mut EouGeometricParams,
) -> EouStatus {
    guard(|| {
        let p: EllipticalParams = (*deref(params, "params")?).into();
        let out = self::out(out, "out")?;
        *out = p.to_geometric()?.into();
        Ok(())
    })
}

/// # Safety
/// `params` must be NULL or valid for reads; `out` NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eou_to_elliptical(
    params: *const EouGeometricParams,
    out: *mut EouEllipticalParams,
) -> EouStatus {
    guard(|| {
        let g: GeometricParams = (*deref(params, "params")?).into();
        let out = self::out(out, "out")?;
        *out = g.to_elliptical()?.into();
        Ok(())
    })
}

/// Spectral matrix at `omega` for sampling interval `delta`, folding `k_max` aliases per side.
///
/// # Safety
/// `params` must be NULL or valid for reads; `out` NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eou_spectral_matrix(
    params: *const EouGeometricParams,
    omega: f64,
    delta: f64,
    k_max: usize,
    out: *mut EouSpectralValue,
) -> EouStatus {
    guard(|| {
        let g: GeometricParams = (*deref(params, "params")?).into();
        let out = self::out(out, "out")?;
        let v = spectral_matrix(&g, omega, delta, k_max)?;
        *out = EouSpectralValue {
            s_pos: v.s_pos,
            s_neg: v.s_neg,
            r_re: v.r_val.re,
            r_im: v.r_val.im,
            det: v.det,
        };
        Ok(())
    })
}

/// Copies `n` samples from `x` and `y` into a new series handle.
///
/// # Safety
/// `x` and `y` must each point to `n` readable doubles; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eou_series_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    delta: f64,
    t0: f64,
    out: *mut *mut EouSeries,
) -> EouStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        let x = slice(x, n, "x")?;
        let y = slice(y, n, "y")?;
        let values = x.iter().zip(y).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let s = ComplexSeries::new(values, delta, t0)?;
        *out = Box::into_raw(Box::new(EouSeries(s)));
        Ok(())
    })
}

/// Simulates `n` samples at spacing `delta`. `scheme` takes an `EouScheme` value.
///
/// # Safety
/// `params` must be NULL or valid for reads; `out` NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eou_simulate(
    params: *const EouEllipticalParams,
    n: usize,
    delta: f64,
    seed: u64,
    replicate: u64,
    scheme: u32,
    out: *mut *mut EouSeries,
) -> EouStatus {
    guard(|| {
        let p: EllipticalParams = (*deref(params, "params")?).into();
        let out = self::out(out, "out")?;
        let scheme = match scheme {
            0 => Scheme::EulerMaruyama,
            1 => Scheme::ExactTransition,
            other => return Err(invalid(format!("unknown scheme {other}"))),
        };
        let cfg = SimConfig {
            scheme,
            ..SimConfig::new(n, delta, seed).with_replicate(replicate)
        };
        *out = Box::into_raw(Box::new(EouSeries(simulate(&p, &cfg)?)));
        Ok(())
    })
}

/// Number of samples in `series`, or 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eou_series_len(series: *const EouSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.values.len())
}

/// Copies the samples into `x` and `y`, which must hold `capacity` doubles each.
///
/// # Safety
/// `series` must be NULL or a live handle; `x`, `y` writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn eou_series_copy(
    series: *const EouSeries,
    x: *mut f64,
    y: *mut f64,
    capacity: usize,
) -> EouStatus {
    guard(|| {
        let s = &deref(series, "series")?.0;
        let n = s.values.len();
        if capacity < n {
            return Err(invalid(format!("capacity {capacity} is below the series length {n}")));
        }
        let x = slice_mut(x, n, "x")?;
        let y = slice_mut(y, n, "y")?;
        for (i, z) in s.values.iter().enumerate() {
            x[i] = z.re;
            y[i] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `series` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eou_series_free(series: *mut EouSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Transforms `series` on its Fourier grid with one-based phase. A non-zero `mean_subtract`
/// removes the sample mean first.
///
/// # Safety
/// `series` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eou_dft(
    series: *const EouSeries,
    mean_subtract: i32,
    out: *mut *mut EouSpectralData,
) -> EouStatus {
    guard(|| {
        let s = &deref(series, "series")?.0;
        let out = self::out(out, "out")?;
        let opts = DftOptions {
            mean_subtract: mean_subtract != 0,
            phase: PhaseReference::OneBased,
        };
        *out = Box::into_raw(Box::new(EouSpectralData(dft_with(s, opts)?)));
        Ok(())
    })
}

/// Number of Fourier frequencies, or 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eou_spectral_len(data: *const EouSpectralData) -> usize {
    data.as_ref().map_or(0, |d| d.0.grid.omegas.len())
}

/// Copies the ascending frequency grid and the periodogram, `capacity` doubles each.
///
/// # Safety
/// `data` must be NULL or a live handle; `omega`, `periodogram` writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn eou_spectral_copy(
    data: *const EouSpectralData,
    omega: *mut f64,
    periodogram: *mut f64,
    capacity: usize,
) -> EouStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        let n = d.grid.omegas.len();
        if capacity < n {
            return Err(invalid(format!("capacity {capacity} is below the grid length {n}")));
        }
        slice_mut(omega, n, "omega")?.copy_from_slice(&d.grid.omegas);
        slice_mut(periodogram, n, "periodogram")?.copy_from_slice(&d.periodogram);
        Ok(())
    })
}

/// # Safety
/// `data` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eou_spectral_free(data: *mut EouSpectralData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Whittle fit. `model` and `likelihood` take `EouModel` and `EouLikelihood` values; `beta` is
/// used only by the fixed-frequency model. `bands` holds `n_bands` (lo, hi) pairs in radians per
/// unit time; `n_bands = 0` uses every frequency. Returns `NOT_CONVERGED` with `out` filled
/// when the optimizer stops short.
///
/// # Safety
/// `data` must be NULL or a live handle; `bands` readable for `2 * n_bands` doubles; `out`
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eou_fit(
    data: *const EouSpectralData,
    model: u32,
    beta: f64,
    likelihood: u32,
    bands: *const f64,
    n_bands: usize,
    k_max: usize,
    out: *mut EouFitResult,
) -> EouStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        let out = self::out(out, "out")?;
        let model = match model {
            0 => Model::Elliptical,
            1 => Model::Circular,
            2 => Model::EllipticalFixedBeta { beta },
            other => return Err(invalid(format!("unknown model {other}"))),
        };
        let likelihood = match likelihood {
            0 => Likelihood::Full,
            1 => Likelihood::Marginal,
            other => return Err(invalid(format!("unknown likelihood {other}"))),
        };
        let mut spec = FitSpec::new(model, likelihood);
        spec.k_max = k_max;
        spec.mean_subtract = d.options.mean_subtract;
        if n_bands > 0 {
            let raw = slice(bands, 2 * n_bands, "bands")?;
            spec.bands = Some(
                raw.chunks_exact(2)
                    .map(|b| Band::new(b[0], b[1]))
                    .collect::<Result<_, _>>()?,
            );
        }
        let r = whittle::fit(d, &spec)?;
        let f = r.boundary_flags;
        *out = EouFitResult {
            geometric: r.geo.into(),
            elliptical: r.ell.into(),
            psi_hat: r.psi_hat,
            loglik: r.loglik,
            eccentricity: r.eccentricity(),
            converged: r.converged as i32,
            n_freqs_used: r.n_freqs_used,
            boundary_flags: [f.alpha, f.beta, f.rho, f.psi, f.a2]
                .iter()
                .enumerate()
                .map(|(i, &b)| (b as u32) << i)
                .sum(),
            iterations: r.iterations,
        };
        if r.converged {
            Ok(())
        } else {
            Err(Failure(
                EouStatus::NotConverged,
                format!("optimizer stopped after {} iterations", r.iterations),
            ))
        }
    })
}

/// Non-parametric orientation from the transforms at the grid frequencies nearest `+-omega`.
///
/// # Safety
/// `data` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn eou_estimate_orientation(
    data: *const EouSpectralData,
    omega: f64,
    out: *mut f64,
) -> EouStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        let out = self::out(out, "out")?;
        *out = whittle::estimate_orientation(d, omega)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(eou_last_error()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn conversions_round_trip() {
        let mut p = EouEllipticalParams::default();
        let mut g = EouGeometricParams::default();
        let mut back = EouEllipticalParams::default();
        unsafe {
            assert_eq!(eou_elliptical_new(0.02, 1.0, -0.5, -0.3, 2.0, &mut p), EouStatus::Ok);
            assert_eq!(eou_to_geometric(&p, &mut g), EouStatus::Ok);
            assert_eq!(eou_to_elliptical(&g, &mut back), EouStatus::Ok);
        }
        for (a, b) in [
            (p.alpha1, back.alpha1),
            (p.beta1, back.beta1),
            (p.alpha2, back.alpha2),
            (p.beta2, back.beta2),
            (p.sigma2, back.sigma2),
            (p.r_re, back.r_re),
            (p.r_im, back.r_im),
        ] {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn constraint_errors_carry_messages() {
        let mut p = EouEllipticalParams::default();
        let st = unsafe { eou_elliptical_new(-1.0, 1.0, 0.0, 0.0, 1.0, &mut p) };
        assert_eq!(st, EouStatus::ConstraintViolated);
        assert!(last_error().contains("constraint"));
        assert_eq!(p, EouEllipticalParams::default());
    }

    #[test]
    fn null_pointers_are_reported() {
        unsafe {
            assert_eq!(eou_to_geometric(ptr::null(), ptr::null_mut()), EouStatus::NullPointer);
            assert_eq!(eou_series_len(ptr::null()), 0);
            eou_series_free(ptr::null_mut());
            eou_spectral_free(ptr::null_mut());
            let mut s = ptr::null_mut();
            assert_eq!(eou_series_new(ptr::null(), ptr::null(), 3, 1.0, 0.0, &mut s), EouStatus::NullPointer);
        }
        assert!(last_error().contains("NULL"));
    }

    #[test]
    fn simulate_transform_fit() {
        let mut p = EouEllipticalParams::default();
        let mut s = ptr::null_mut();
        let mut d = ptr::null_mut();
        let mut r = EouFitResult::default();
        unsafe {
            assert_eq!(eou_elliptical_new(0.02, 1.0, -0.5, -0.3, 2.0, &mut p), EouStatus::Ok);
            assert_eq!(eou_simulate(&p, 1024, 1.0, 5, 0, 1, &mut s), EouStatus::Ok);
            assert_eq!(eou_series_len(s), 1024);
            let mut unused = ptr::null_mut();
            assert_eq!(eou_simulate(&p, 16, 1.0, 5, 0, 9, &mut unused), EouStatus::InvalidArgument);
            assert!(unused.is_null());
            assert_eq!(eou_dft(s, 1, &mut d), EouStatus::Ok);
            assert_eq!(eou_spectral_len(d), 1024);
            assert_eq!(eou_fit(d, 0, 0.0, 1, ptr::null(), 0, 10, &mut r), EouStatus::Ok);
            assert_eq!(r.converged, 1);
            assert!((r.elliptical.beta1 - 1.0).abs() < 0.05, "{r:?}");
            let mut psi = 0.0;
            assert_eq!(eou_estimate_orientation(d, r.geometric.beta, &mut psi), EouStatus::Ok);
            assert!((psi - r.psi_hat).abs() < 0.1, "{psi} vs {}", r.psi_hat);
            let mut x = vec![0.0; 1024];
            let mut y = vec![0.0; 1024];
            assert_eq!(eou_series_copy(s, x.as_mut_ptr(), y.as_mut_ptr(), 10), EouStatus::InvalidArgument);
            assert_eq!(eou_series_copy(s, x.as_mut_ptr(), y.as_mut_ptr(), 1024), EouStatus::Ok);
            assert!(x.iter().any(|&v| v != 0.0));
            eou_spectral_free(d);
            eou_series_free(s);
        }
    }

    #[test]
    fn series_from_buffers_and_band_fit() {
        let n = 256;
        let x: Vec<f64> = (0..n).map(|i| (0.8 * i as f64).cos()).collect();
        let y: Vec<f64> = (0..n).map(|i| (0.8 * i as f64).sin()).collect();
        let mut s = ptr::null_mut();
        let mut d = ptr::null_mut();
        let mut r = EouFitResult::default();
        unsafe {
            assert_eq!(eou_series_new(x.as_ptr(), y.as_ptr(), n, 1.0, 0.0, &mut s), EouStatus::Ok);
            assert_eq!(eou_dft(s, 1, &mut d), EouStatus::Ok);
            let mut omega = vec![0.0; n];
            let mut pg = vec![0.0; n];
            assert_eq!(eou_spectral_copy(d, omega.as_mut_ptr(), pg.as_mut_ptr(), n), EouStatus::Ok);
            let peak = (0..n).max_by(|&a, &b| pg[a].total_cmp(&pg[b])).unwrap();
            assert!((omega[peak] - 0.8).abs() < 0.03);
            // A single frequency cannot identify the model.
            let band = [0.79, 0.80];
            let st = eou_fit(d, 1, 0.0, 1, band.as_ptr(), 1, 10, &mut r);
            assert!(matches!(st, EouStatus::NotConverged | EouStatus::InvalidArgument), "{st:?}");
            let bad = [0.9, 0.1];
            assert_eq!(eou_fit(d, 1, 0.0, 1, bad.as_ptr(), 1, 10, &mut r), EouStatus::InvalidArgument);
            assert_eq!(eou_fit(d, 7, 0.0, 1, ptr::null(), 0, 10, &mut r), EouStatus::InvalidArgument);
            eou_spectral_free(d);
            eou_series_free(s);
        }
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(eou_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
