//! The two parameterizations of the elliptical OU process and the maps between them.
//!
//! [`EllipticalParams`] holds the coefficients of the complex SDE
//!
//! ```text
//! dz = (-alpha1 + i beta1) z dt + (-alpha2 + i beta2) z* dt + dW,   E|dW|^2 = sigma2 dt,  E dW^2 = r dt
//! ```
//!
//! and [`GeometricParams`] describes the same process as a circular bivariate OU
//! `(alpha, beta, a2)` that has been stretched by `diag(1/rho, rho)` and rotated by `psi`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `beta1^2 - (alpha2^2 + beta2^2)` below this fraction of `beta1^2` is treated as the
/// degenerate line geometry and rejected.
pub const ELLIPSE_MARGIN: f64 = 1e-12;

/// Relative tolerance on the redundant pseudo-variance `r`.
pub const PSEUDO_VARIANCE_RTOL: f64 = 1e-10;

/// Coefficients of the complex SDE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "EllipticalWire", into = "EllipticalWire")]
pub struct EllipticalParams {
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub sigma2: f64,
    /// Pseudo-variance of the Wiener increment.
    pub r: Complex64,
}

#[derive(Serialize, Deserialize)]
struct EllipticalWire {
    alpha1: f64,
    beta1: f64,
    alpha2: f64,
    beta2: f64,
    sigma2: f64,
    r_re: f64,
    r_im: f64,
}

impl From<EllipticalWire> for EllipticalParams {
    fn from(w: EllipticalWire) -> Self {
        EllipticalParams {
            alpha1: w.alpha1,
            beta1: w.beta1,
            alpha2: w.alpha2,
            beta2: w.beta2,
            sigma2: w.sigma2,
            r: Complex64::new(w.r_re, w.r_im),
        }
    }
}

impl From<EllipticalParams> for EllipticalWire {
    fn from(p: EllipticalParams) -> Self {
        EllipticalWire {
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

/// Parameters of the deformed circular bivariate OU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricParams {
    /// Damping (inverse time).
    pub alpha: f64,
    /// Oscillation frequency (radians per unit time). Its sign is the direction of spin.
    pub beta: f64,
    /// Stretch, `0 < rho <= 1`; `rho = 1` is the circular process.
    pub rho: f64,
    /// Orientation of the major axis (radians).
    pub psi: f64,
    /// Noise amplitude `A^2`.
    pub a2: f64,
}

/// Proper-case discrete-time AR(1) equivalent of a sampled complex OU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexAr1Params {
    /// Modulus of the AR coefficient.
    pub lambda: f64,
    /// Rotation rate in radians per unit time; the rotation applied per sample is `zeta * delta`.
    pub zeta: f64,
    /// Innovation variance.
    pub sigma2_ar: f64,
}

impl ComplexAr1Params {
    /// AR coefficient `lambda * exp(i zeta delta)` for sampling interval `delta`.
    pub fn coefficient(&self, delta: f64) -> Complex64 {
        Complex64::from_polar(self.lambda, self.zeta * delta)
    }
}

/// Wraps an orientation into `(-pi/2, pi/2]`.
///
/// The ellipse is invariant under a half turn, so orientations are only defined modulo `pi`.
pub fn wrap_orientation(psi: f64) -> f64 {
    let mut w = psi.rem_euclid(PI);
    if w > FRAC_PI_2 {
        w -= PI;
    }
    if w <= -FRAC_PI_2 {
        w += PI;
    }
    w
}

impl EllipticalParams {
    /// Builds a parameter set with the redundant pseudo-variance filled in.
    pub fn new(alpha1: f64, beta1: f64, alpha2: f64, beta2: f64, sigma2: f64) -> Self {
        let mut p = EllipticalParams {
            alpha1,
            beta1,
            alpha2,
            beta2,
            sigma2,
            r: Complex64::new(0.0, 0.0),
        };
        p.r = p.implied_pseudo_variance();
        p
    }

    /// `r = -(sigma2 / beta1) (beta2 + i alpha2)`, the value forced by the bivariate construction.
    pub fn implied_pseudo_variance(&self) -> Complex64 {
        -(self.sigma2 / self.beta1) * Complex64::new(self.beta2, self.alpha2)
    }

    /// Checks stationarity and the ellipse condition.
    pub fn check_geometry(&self) -> Result<()> {
        let all = [self.alpha1, self.beta1, self.alpha2, self.beta2, self.sigma2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::constraint("finite", format!("non-finite coefficient in {self:?}")));
        }
        if self.alpha1 <= 0.0 {
            return Err(Error::constraint(
                "stationarity",
                format!("alpha1 must be positive, got {}", self.alpha1),
            ));
        }
        if self.beta1 == 0.0 {
            return Err(Error::constraint(
                "valid ellipse",
                "beta1 = 0 has no ellipse mapping (sign of beta1 undefined)",
            ));
        }
        let h2 = self.alpha2 * self.alpha2 + self.beta2 * self.beta2;
        let b2 = self.beta1 * self.beta1;
        if b2 - h2 < ELLIPSE_MARGIN * b2 {
            return Err(Error::constraint(
                "valid ellipse",
                format!("beta1^2 = {b2} must exceed alpha2^2 + beta2^2 = {h2}"),
            ));
        }
        Ok(())
    }

    /// Full validation: geometry, positive variance, and a consistent pseudo-variance.
    pub fn validate(&self) -> Result<()> {
        self.check_geometry()?;
        if self.sigma2 <= 0.0 {
            return Err(Error::constraint(
                "positive variance",
                format!("sigma2 must be positive, got {}", self.sigma2),
            ));
        }
        if !(self.r.re.is_finite() && self.r.im.is_finite()) {
            return Err(Error::constraint("finite", "non-finite pseudo-variance"));
        }
        let implied = self.implied_pseudo_variance();
        if (self.r - implied).norm() > PSEUDO_VARIANCE_RTOL * self.sigma2 {
            return Err(Error::constraint(
                "pseudo-variance consistency",
                format!("r = {} but the geometry implies {}", self.r, implied),
            ));
        }
        if self.r.norm() > self.sigma2 {
            return Err(Error::constraint(
                "propriety of increments",
                format!("|r| = {} exceeds sigma2 = {}", self.r.norm(), self.sigma2),
            ));
        }
        Ok(())
    }

    pub fn to_geometric(&self) -> Result<GeometricParams> {
        to_geometric(self)
    }

    pub fn eccentricity(&self) -> Result<f64> {
        eccentricity(self)
    }

    /// Drift coefficient multiplying `z`.
    pub fn linear_coefficient(&self) -> Complex64 {
        Complex64::new(-self.alpha1, self.beta1)
    }

    /// Drift coefficient multiplying `z*`.
    pub fn conjugate_coefficient(&self) -> Complex64 {
        Complex64::new(-self.alpha2, self.beta2)
    }
}

impl GeometricParams {
    pub fn new(alpha: f64, beta: f64, rho: f64, psi: f64, a2: f64) -> Self {
        GeometricParams {
            alpha,
            beta,
            rho,
            psi,
            a2,
        }
    }

    /// Circular (complex OU) special case.
    pub fn circular(alpha: f64, beta: f64, a2: f64) -> Self {
        GeometricParams::new(alpha, beta, 1.0, 0.0, a2)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.rho, self.psi, self.a2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::constraint("finite", format!("non-finite parameter in {self:?}")));
        }
        if self.alpha <= 0.0 {
            return Err(Error::constraint(
                "stationarity",
                format!("alpha must be positive, got {}", self.alpha),
            ));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::constraint(
                "stretch range",
                format!("rho must lie in (0, 1], got {}", self.rho),
            ));
        }
        if self.psi.abs() > FRAC_PI_2 * (1.0 + 1e-12) {
            return Err(Error::constraint(
                "orientation range",
                format!("psi must lie in [-pi/2, pi/2], got {}", self.psi),
            ));
        }
        if self.a2 <= 0.0 {
            return Err(Error::constraint(
                "positive amplitude",
                format!("a2 must be positive, got {}", self.a2),
            ));
        }
        Ok(())
    }

    /// `sqrt(1 - rho^4)`.
    pub fn eccentricity(&self) -> f64 {
        let r4 = self.rho.powi(4);
        (1.0 - r4).max(0.0).sqrt()
    }

    pub fn to_elliptical(&self) -> Result<EllipticalParams> {
        to_elliptical(self)
    }
}

/// Complex SDE coefficients to the bivariate construction.
pub fn to_geometric(p: &EllipticalParams) -> Result<GeometricParams> {
    p.check_geometry()?;
    let h = p.alpha2.hypot(p.beta2);
    let b = p.beta1.abs();
    let gap = (b - h) * (b + h);
    let root = gap.sqrt();

    let beta = p.beta1.signum() * root;
    let rho = ((b - h) / (b + h)).powf(0.25);
    let psi = if p.alpha2 == 0.0 && p.beta2 == 0.0 {
        0.0
    } else {
        let s = if p.beta1 > 0.0 { -1.0 } else { 1.0 };
        wrap_orientation(0.5 * s * p.alpha2.atan2(s * p.beta2))
    };
    let a2 = p.sigma2 * root / b;
    Ok(GeometricParams {
        alpha: p.alpha1,
        beta,
        rho,
        psi,
        a2,
    })
}

/// Bivariate construction to complex SDE coefficients, including the redundant `r`.
pub fn to_elliptical(g: &GeometricParams) -> Result<EllipticalParams> {
    g.validate()?;
    if g.beta == 0.0 {
        return Err(Error::constraint(
            "valid ellipse",
            "beta = 0 maps to beta1 = 0, which has no ellipse mapping",
        ));
    }
    let r2 = g.rho * g.rho;
    let inv = 1.0 / r2;
    let half_beta = 0.5 * g.beta;
    let shear = half_beta * (r2 - inv);
    let (s2, c2) = (2.0 * g.psi).sin_cos();
    Ok(EllipticalParams::new(
        g.alpha,
        half_beta * (r2 + inv),
        shear * s2,
        shear * c2,
        0.5 * g.a2 * (r2 + inv),
    ))
}

/// Eccentricity of the oscillation, `sqrt(2h / (|beta1| + h))` with `h = |alpha2 + i beta2|`.
pub fn eccentricity(p: &EllipticalParams) -> Result<f64> {
    p.check_geometry()?;
    let h = p.alpha2.hypot(p.beta2);
    Ok((2.0 * h / (p.beta1.abs() + h)).sqrt())
}

/// Proper-case map from a complex OU sampled every `delta` to a complex AR(1).
pub fn proper_ar1_map(p: &EllipticalParams, delta: f64) -> Result<ComplexAr1Params> {
    if p.alpha2 != 0.0 || p.beta2 != 0.0 || p.r.norm() != 0.0 {
        return Err(Error::constraint(
            "proper case",
            "the OU to AR(1) map has a closed form only when alpha2 = beta2 = 0 and r = 0",
        ));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::input(format!("sampling interval must be positive, got {delta}")));
    }
    if !(p.alpha1 >= 0.0) || !p.alpha1.is_finite() {
        return Err(Error::constraint(
            "stationarity",
            format!("alpha1 must be non-negative, got {}", p.alpha1),
        ));
    }
    if !(p.sigma2 > 0.0) {
        return Err(Error::constraint("positive variance", "sigma2 must be positive"));
    }
    let lambda = (-p.alpha1 * delta).exp();
    let sigma2_ar = if p.alpha1 == 0.0 {
        p.sigma2 * delta
    } else {
        p.sigma2 * -(-2.0 * p.alpha1 * delta).exp_m1() / (2.0 * p.alpha1)
    };
    Ok(ComplexAr1Params {
        lambda,
        zeta: p.beta1,
        sigma2_ar,
    })
}
