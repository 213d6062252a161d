#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use super::simple::Lognormal;
use super::{Continuous, SeverityFamily};
use crate::special::{norm_cdf, norm_ln_cdf, norm_ln_pdf, norm_ln_sf, norm_quantile, norm_sf, norm_sf_inv};
use crate::{Error, Result};

/// Log sinh-arcsinh: `X = exp(a + b·sinh((asinh(Z) + ε)/δ))` with `Z ~ N(0, 1)`.
///
/// `(ε, δ) = (0, 1)` is exactly `Lognormal(a, b)` and is evaluated through
/// that family so the two agree bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSaS {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub delta: f64,
    ln_b: f64,
    ln_delta: f64,
}

impl LogSaS {
    pub fn new(a: f64, b: f64, epsilon: f64, delta: f64) -> Result<Self> {
        let err = |reason| Error::InvalidParameter { family: SeverityFamily::LogSaS, reason };
        if !a.is_finite() || !epsilon.is_finite() {
            return Err(err("location and skewness must be finite"));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(err("scale must be positive"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(err("tailweight must be positive"));
        }
        Ok(Self { a, b, epsilon, delta, ln_b: b.ln(), ln_delta: delta.ln() })
    }

    #[inline]
    fn as_lognormal(&self) -> Option<Lognormal> {
        (self.epsilon == 0.0 && self.delta == 1.0).then_some(Lognormal { mu: self.a, sigma: self.b })
    }

    /// Inverse transform `z = sinh(δ·asinh(w) - ε)` of the standardised log-loss.
    #[inline]
    pub fn inverse_transform(&self, w: f64) -> f64 {
        (self.delta * w.asinh() - self.epsilon).sinh()
    }

    /// Forward transform `w = sinh((asinh(z) + ε)/δ)`.
    #[inline]
    pub fn transform(&self, z: f64) -> f64 {
        ((z.asinh() + self.epsilon) / self.delta).sinh()
    }

    #[inline]
    fn z(&self, x: f64) -> f64 {
        self.inverse_transform((x.ln() - self.a) / self.b)
    }
}

impl Continuous for LogSaS {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_pdf_with_log(x, x.ln())
    }

    #[inline]
    fn ln_pdf_with_log(&self, x: f64, ln_x: f64) -> f64 {
        if let Some(ln) = self.as_lognormal() {
            return ln.ln_pdf_with_log(x, ln_x);
        }
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let w = (ln_x - self.a) / self.b;
        let inner = self.delta * w.asinh() - self.epsilon;
        let z = inner.sinh();
        // ln|dz/dw| = ln δ + ln cosh(inner) - ½ ln(1 + w²)
        let ln_cosh = inner.abs() + (-2.0 * inner.abs()).exp().ln_1p() - core::f64::consts::LN_2;
        let ln_jac = self.ln_delta + ln_cosh - w.hypot(1.0).ln();
        norm_ln_pdf(z) + ln_jac - self.ln_b - ln_x
    }

    fn cdf(&self, x: f64) -> f64 {
        if let Some(ln) = self.as_lognormal() {
            return ln.cdf(x);
        }
        if x <= 0.0 {
            0.0
        } else {
            norm_cdf(self.z(x))
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if let Some(ln) = self.as_lognormal() {
            return ln.sf(x);
        }
        if x <= 0.0 {
            1.0
        } else {
            norm_sf(self.z(x))
        }
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            norm_ln_cdf(self.z(x))
        }
    }

    fn ln_sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            norm_ln_sf(self.z(x))
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        if let Some(ln) = self.as_lognormal() {
            return ln.quantile(p);
        }
        (self.a + self.b * self.transform(norm_quantile(p))).exp()
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        if let Some(ln) = self.as_lognormal() {
            return ln.inverse_sf(s);
        }
        (self.a + self.b * self.transform(norm_sf_inv(s))).exp()
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let Some(ln) = self.as_lognormal() {
            return ln.sample_one(rng);
        }
        let z: f64 = rng.sample(StandardNormal);
        (self.a + self.b * self.transform(z)).exp()
    }
}
