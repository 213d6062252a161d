//! Closed-form families: lognormal, generalized Pareto, Burr, Weibull and
//! loglogistic.

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{softplus, uniform_open_closed, Continuous, SeverityFamily, LIMIT_EPS};
use crate::special::{norm_cdf, norm_ln_cdf, norm_ln_sf, norm_quantile, norm_sf, norm_sf_inv, LN_SQRT_2PI};
use crate::{Error, Result};

fn check(family: SeverityFamily, ok: bool, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { family, reason })
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// `ln(1 - p)` for `p` in `(0, 1)`.
#[inline]
fn ln_one_minus(p: f64) -> f64 {
    (-p).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lognormal {
    pub mu: f64,
    pub sigma: f64,
}

impl Lognormal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        check(SeverityFamily::Lognormal, mu.is_finite(), "mu must be finite")?;
        check(SeverityFamily::Lognormal, positive(sigma), "sigma must be positive")?;
        Ok(Self { mu, sigma })
    }

    #[inline]
    fn z(&self, x: f64) -> f64 {
        (x.ln() - self.mu) / self.sigma
    }
}

impl Continuous for Lognormal {
    #[inline]
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_pdf_with_log(x, x.ln())
    }

    #[inline]
    fn ln_pdf_with_log(&self, x: f64, ln_x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let z = (ln_x - self.mu) / self.sigma;
        -ln_x - self.sigma.ln() - LN_SQRT_2PI - 0.5 * z * z
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            norm_cdf(self.z(x))
        }
    }

    fn sf(&self, x: f64) -> f64 {
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
        (self.mu + self.sigma * norm_quantile(p)).exp()
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        (self.mu + self.sigma * norm_sf_inv(s)).exp()
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        (self.mu + self.sigma * z).exp()
    }
}

/// Generalized Pareto with location `u`, scale `θ` and shape `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gpd {
    pub u: f64,
    pub theta: f64,
    pub xi: f64,
}

impl Gpd {
    pub fn new(u: f64, theta: f64, xi: f64) -> Result<Self> {
        let f = SeverityFamily::GeneralizedPareto;
        check(f, u.is_finite(), "location must be finite")?;
        check(f, positive(theta), "scale must be positive")?;
        check(f, xi.is_finite(), "shape must be finite")?;
        Ok(Self { u, theta, xi })
    }

    /// Upper end of the support.
    pub fn upper(&self) -> f64 {
        if self.xi < 0.0 && self.xi.abs() >= LIMIT_EPS {
            self.u - self.theta / self.xi
        } else {
            f64::INFINITY
        }
    }

    /// `ln S(x)` for `x ≥ u` inside the support.
    #[inline]
    fn ln_sf_inner(&self, y: f64) -> f64 {
        if self.xi.abs() < LIMIT_EPS {
            -y
        } else {
            -(self.xi * y).ln_1p() / self.xi
        }
    }

    /// Shared inverse of `S`, given `ln S`.
    #[inline]
    fn from_ln_sf(&self, ln_s: f64) -> f64 {
        let y = if self.xi.abs() < LIMIT_EPS {
            -ln_s
        } else {
            (-self.xi * ln_s).exp_m1() / self.xi
        };
        self.u + self.theta * y
    }
}

impl Continuous for Gpd {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x < self.u || x >= self.upper() {
            return f64::NEG_INFINITY;
        }
        let y = (x - self.u) / self.theta;
        if self.xi.abs() < LIMIT_EPS {
            -self.theta.ln() - y
        } else {
            -self.theta.ln() - (1.0 / self.xi + 1.0) * (self.xi * y).ln_1p()
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.u {
            0.0
        } else if x >= self.upper() {
            1.0
        } else {
            -self.ln_sf_inner((x - self.u) / self.theta).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= self.u {
            1.0
        } else if x >= self.upper() {
            0.0
        } else {
            self.ln_sf_inner((x - self.u) / self.theta).exp()
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        self.from_ln_sf(ln_one_minus(p))
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        self.from_ln_sf(s.ln())
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_sf(uniform_open_closed(rng))
    }
}

/// Burr XII: `F(x) = 1 - [1 + (x/θ)^γ]^(-α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burr {
    pub alpha: f64,
    pub gamma: f64,
    pub theta: f64,
    ln_theta: f64,
}

impl Burr {
    pub fn new(alpha: f64, gamma: f64, theta: f64) -> Result<Self> {
        let f = SeverityFamily::Burr;
        check(f, positive(alpha), "alpha must be positive")?;
        check(f, positive(gamma), "gamma must be positive")?;
        check(f, positive(theta), "theta must be positive")?;
        Ok(Self { alpha, gamma, theta, ln_theta: theta.ln() })
    }

    /// `ln S(x) = -α ln(1 + (x/θ)^γ)` given `ln x`.
    #[inline]
    fn ln_sf_log(&self, ln_x: f64) -> f64 {
        -self.alpha * softplus(self.gamma * (ln_x - self.ln_theta))
    }

    #[inline]
    fn from_ln_sf(&self, ln_s: f64) -> f64 {
        // (x/θ)^γ = S^(-1/α) - 1
        let a = -ln_s / self.alpha;
        let ln_t = if a > 30.0 { a + (-(-a).exp()).ln_1p() } else { a.exp_m1().ln() };
        self.theta * (ln_t / self.gamma).exp()
    }
}

impl Continuous for Burr {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_pdf_with_log(x, x.ln())
    }

    #[inline]
    fn ln_pdf_with_log(&self, x: f64, ln_x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let lt = self.gamma * (ln_x - self.ln_theta);
        self.alpha.ln() + self.gamma.ln() + lt - ln_x - (self.alpha + 1.0) * softplus(lt)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -self.ln_sf_log(x.ln()).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            self.ln_sf_log(x.ln()).exp()
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        self.from_ln_sf(ln_one_minus(p))
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        self.from_ln_sf(s.ln())
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_sf(uniform_open_closed(rng))
    }
}

/// Weibull: `F(x) = 1 - exp(-(x/θ)^a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull {
    pub shape: f64,
    pub theta: f64,
    ln_theta: f64,
}

impl Weibull {
    pub fn new(shape: f64, theta: f64) -> Result<Self> {
        let f = SeverityFamily::Weibull;
        check(f, positive(shape), "shape must be positive")?;
        check(f, positive(theta), "theta must be positive")?;
        Ok(Self { shape, theta, ln_theta: theta.ln() })
    }

    #[inline]
    fn power(&self, x: f64) -> f64 {
        (self.shape * (x.ln() - self.ln_theta)).exp()
    }

    #[inline]
    fn from_neg_ln_sf(&self, t: f64) -> f64 {
        self.theta * (t.ln() / self.shape).exp()
    }
}

impl Continuous for Weibull {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_pdf_with_log(x, x.ln())
    }

    #[inline]
    fn ln_pdf_with_log(&self, x: f64, ln_x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let lr = ln_x - self.ln_theta;
        self.shape.ln() - self.ln_theta + (self.shape - 1.0) * lr - (self.shape * lr).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.power(x)).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.power(x)).exp()
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        self.from_neg_ln_sf(-ln_one_minus(p))
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        self.from_neg_ln_sf(-s.ln())
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_sf(uniform_open_closed(rng))
    }
}

/// Loglogistic: `F(x) = [1 + (x/θ)^(-γ)]^(-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loglogistic {
    pub gamma: f64,
    pub theta: f64,
    ln_theta: f64,
}

impl Loglogistic {
    pub fn new(gamma: f64, theta: f64) -> Result<Self> {
        let f = SeverityFamily::Loglogistic;
        check(f, positive(gamma), "gamma must be positive")?;
        check(f, positive(theta), "theta must be positive")?;
        Ok(Self { gamma, theta, ln_theta: theta.ln() })
    }

    #[inline]
    fn lt(&self, x: f64) -> f64 {
        self.gamma * (x.ln() - self.ln_theta)
    }
}

impl Continuous for Loglogistic {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_pdf_with_log(x, x.ln())
    }

    #[inline]
    fn ln_pdf_with_log(&self, x: f64, ln_x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let lt = self.gamma * (ln_x - self.ln_theta);
        self.gamma.ln() - ln_x + lt - 2.0 * softplus(lt)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-softplus(-self.lt(x))).exp()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-softplus(self.lt(x))).exp()
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        // logit(p) / γ
        self.theta * ((p.ln() - ln_one_minus(p)) / self.gamma).exp()
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        self.theta * ((ln_one_minus(s) - s.ln()) / self.gamma).exp()
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = uniform_open_closed(rng);
        if s >= 1.0 {
            return 0.0;
        }
        self.inverse_sf(s)
    }
}
