use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::simple::{Gpd, Lognormal};
use super::{uniform_open_closed, Continuous, SeverityFamily};
use crate::{Error, Result};

/// Tail component of a spliced distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplicedTail {
    Lognormal(Lognormal),
    /// GPD located at the splicing point.
    Gpd(Gpd),
}

impl SplicedTail {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Lognormal(d) => d.cdf(x),
            Self::Gpd(d) => d.cdf(x),
        }
    }

    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Self::Lognormal(d) => d.sf(x),
            Self::Gpd(d) => d.sf(x),
        }
    }

    fn ln_pdf_with_log(&self, x: f64, ln_x: f64) -> f64 {
        match self {
            Self::Lognormal(d) => d.ln_pdf_with_log(x, ln_x),
            Self::Gpd(d) => d.ln_pdf(x),
        }
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        match self {
            Self::Lognormal(d) => d.inverse_sf(s),
            Self::Gpd(d) => d.inverse_sf(s),
        }
    }
}

/// Lognormal body spliced at `x_s` to a lognormal or GPD tail.
///
/// With body CDF `F_b`, tail CDF `F_t`, threshold `τ` and body proportion
/// `p_b`:
///
/// ```text
/// D1 = F_b(x_s) - (1 - p_b)·F_b(τ)
/// D2 = (1 - p_b)/D1 · (F_b(x_s) - F_b(τ)) / (1 - F_t(x_s))
/// F(x) = p_b·F_b(x)/D1                              for 0 < x ≤ x_s
///      = p_b·F_b(x_s)/D1 + D2·(F_t(x) - F_t(x_s))   for x > x_s
/// ```
///
/// This is a proper distribution on `(0, ∞)`. Conditioned on exceeding `τ`
/// it puts mass exactly `p_b` on the body `(τ, x_s]`, so `p_b` can be read
/// directly off the reported losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spliced {
    pub body: Lognormal,
    pub tail: SplicedTail,
    pub x_s: f64,
    pub p_b: f64,
    pub tau: f64,
    d1: f64,
    d2: f64,
    ln_body_weight: f64,
    ln_d2: f64,
    /// `F(x_s)`
    body_mass: f64,
    tail_sf_at_splice: f64,
}

impl Spliced {
    pub fn new(body: Lognormal, tail: SplicedTail, x_s: f64, p_b: f64, tau: f64) -> Result<Self> {
        let family = match tail {
            SplicedTail::Lognormal(_) => SeverityFamily::SplicedLognLogn,
            SplicedTail::Gpd(_) => SeverityFamily::SplicedLognGpd,
        };
        let err = |reason| Error::InvalidParameter { family, reason };
        if !(p_b > 0.0 && p_b < 1.0) {
            return Err(err("body proportion must lie in (0, 1)"));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(err("threshold must be finite and non-negative"));
        }
        if !(x_s.is_finite() && x_s > tau) {
            return Err(err("splicing point must exceed the threshold"));
        }
        if let SplicedTail::Gpd(g) = tail {
            if g.u != x_s {
                return Err(err("GPD tail must be located at the splicing point"));
            }
        }
        let fb_xs = body.cdf(x_s);
        let fb_tau = body.cdf(tau);
        let d1 = fb_xs - (1.0 - p_b) * fb_tau;
        let body_window = fb_xs - fb_tau;
        let tail_sf_at_splice = tail.sf(x_s);
        if !(d1 > 0.0 && body_window > 0.0 && tail_sf_at_splice > 0.0) {
            return Err(err("body or tail carries no mass on its piece"));
        }
        let d2 = (1.0 - p_b) / d1 * body_window / tail_sf_at_splice;
        Ok(Self {
            body,
            tail,
            x_s,
            p_b,
            tau,
            d1,
            d2,
            ln_body_weight: (p_b / d1).ln(),
            ln_d2: d2.ln(),
            body_mass: p_b * fb_xs / d1,
            tail_sf_at_splice,
        })
    }

    pub fn family(&self) -> SeverityFamily {
        match self.tail {
            SplicedTail::Lognormal(_) => SeverityFamily::SplicedLognLogn,
            SplicedTail::Gpd(_) => SeverityFamily::SplicedLognGpd,
        }
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn params(&self) -> Vec<f64> {
        let (t1, t2) = match self.tail {
            SplicedTail::Lognormal(d) => (d.mu, d.sigma),
            SplicedTail::Gpd(d) => (d.theta, d.xi),
        };
        vec![self.body.mu, self.body.sigma, t1, t2, self.x_s, self.p_b]
    }
}

impl Continuous for Spliced {
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_pdf_with_log(x, x.ln())
    }

    fn ln_pdf_with_log(&self, x: f64, ln_x: f64) -> f64 {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else if x <= self.x_s {
            self.ln_body_weight + self.body.ln_pdf_with_log(x, ln_x)
        } else {
            self.ln_d2 + self.tail.ln_pdf_with_log(x, ln_x)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x <= self.x_s {
            self.p_b * self.body.cdf(x) / self.d1
        } else {
            // F_t(x) - F_t(x_s) taken as a difference of survival values.
            let tail_part = self.d2 * (self.tail_sf_at_splice - self.tail.sf(x));
            (self.body_mass + tail_part).min(1.0)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else if x <= self.x_s {
            1.0 - self.cdf(x)
        } else {
            self.d2 * self.tail.sf(x)
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        if p <= self.body_mass {
            self.body.quantile((p * self.d1 / self.p_b).min(1.0 - f64::EPSILON))
        } else {
            self.inverse_sf(1.0 - p)
        }
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        if s >= 1.0 - self.body_mass {
            return self.body.quantile(((1.0 - s) * self.d1 / self.p_b).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON));
        }
        let st = (s / self.d2).min(self.tail_sf_at_splice);
        self.tail.inverse_sf(st).max(self.x_s)
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = uniform_open_closed(rng);
        if s > 1.0 - self.body_mass {
            self.body.quantile(((1.0 - s) * self.d1 / self.p_b).max(f64::MIN_POSITIVE))
        } else {
            self.inverse_sf(s)
        }
    }
}
