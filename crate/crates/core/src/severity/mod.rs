//! Candidate loss-severity families.
//!
//! Nine families are supported. Each one is a small immutable value type with
//! density, distribution, survival and quantile functions plus a sampler; the
//! [`Severity`] enum gives them a single interface for fitting, selection and
//! simulation.
//!
//! | family | parameter vector | support |
//! |---|---|---|
//! | Lognormal | (μ, σ) | x > 0 |
//! | GeneralizedPareto | (u, θ, ξ) | x > u (bounded above when ξ < 0) |
//! | Burr | (α, γ, θ) | x > 0 |
//! | Weibull | (a, θ) | x > 0 |
//! | Loglogistic | (γ, θ) | x > 0 |
//! | GandH | (a, b, g, h) | ℝ |
//! | LogSaS | (a, b, ε, δ) | x > 0 |
//! | SplicedLognLogn | (μ_b, σ_b, μ_t, σ_t, x_s, p_b) | x > 0 |
//! | SplicedLognGpd | (μ_b, σ_b, θ, ξ, x_s, p_b) | x > 0 |

mod gandh;
mod logsas;
mod simple;
mod spliced;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

pub use gandh::{GandH, GRID_LEN as GANDH_GRID_LEN, GRID_Z_MAX as GANDH_GRID_Z_MAX};
pub use logsas::LogSaS;
pub use simple::{Burr, Gpd, Loglogistic, Lognormal, Weibull};
pub use spliced::{Spliced, SplicedTail};

use crate::{Error, Result};

/// Below this magnitude the g = 0 and ξ = 0 limits are used.
pub(crate) const LIMIT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeverityFamily {
    Lognormal,
    GeneralizedPareto,
    Burr,
    Weibull,
    Loglogistic,
    GandH,
    LogSaS,
    SplicedLognLogn,
    SplicedLognGpd,
}

impl SeverityFamily {
    pub const ALL: [SeverityFamily; 9] = [
        Self::Lognormal,
        Self::GeneralizedPareto,
        Self::Burr,
        Self::Weibull,
        Self::Loglogistic,
        Self::GandH,
        Self::LogSaS,
        Self::SplicedLognLogn,
        Self::SplicedLognGpd,
    ];

    /// Length of the parameter vector.
    pub const fn param_count(self) -> usize {
        match self {
            Self::Lognormal | Self::Weibull | Self::Loglogistic => 2,
            Self::GeneralizedPareto | Self::Burr => 3,
            Self::GandH | Self::LogSaS => 4,
            Self::SplicedLognLogn | Self::SplicedLognGpd => 6,
        }
    }

    /// Number of parameters estimated from data, `k` in AIC.
    ///
    /// The GPD location is pinned at the threshold and the spliced body
    /// proportion is a data fraction, so neither counts.
    pub const fn estimated_param_count(self) -> usize {
        match self {
            Self::GeneralizedPareto => 2,
            Self::SplicedLognLogn | Self::SplicedLognGpd => 5,
            f => f.param_count(),
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    /// Short code used in reports.
    pub const fn code(self) -> &'static str {
        match self {
            Self::Lognormal => "LGN",
            Self::GeneralizedPareto => "GPD",
            Self::Burr => "BUR",
            Self::Weibull => "WBL",
            Self::Loglogistic => "LLOG",
            Self::GandH => "GNH",
            Self::LogSaS => "LSAS",
            Self::SplicedLognLogn => "LGNLGN",
            Self::SplicedLognGpd => "LGNGPD",
        }
    }

    pub const fn param_names(self) -> &'static [&'static str] {
        match self {
            Self::Lognormal => &["mu", "sigma"],
            Self::GeneralizedPareto => &["u", "theta", "xi"],
            Self::Burr => &["alpha", "gamma", "theta"],
            Self::Weibull => &["a", "theta"],
            Self::Loglogistic => &["gamma", "theta"],
            Self::GandH => &["a", "b", "g", "h"],
            Self::LogSaS => &["a", "b", "epsilon", "delta"],
            Self::SplicedLognLogn => &["mu_b", "sigma_b", "mu_t", "sigma_t", "x_s", "p_b"],
            Self::SplicedLognGpd => &["mu_b", "sigma_b", "theta", "xi", "x_s", "p_b"],
        }
    }

    pub const fn is_spliced(self) -> bool {
        matches!(self, Self::SplicedLognLogn | Self::SplicedLognGpd)
    }
}

impl fmt::Display for SeverityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for SeverityFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let found = Self::ALL.into_iter().find(|f| {
            f.code().eq_ignore_ascii_case(s) || alloc::format!("{f:?}").eq_ignore_ascii_case(s)
        });
        found.ok_or(Error::InvalidInput("unknown severity family"))
    }
}

/// Right-tail decay class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailClass {
    SuperExponential,
    SubExponential,
    RegularlyVarying,
    Bounded,
}

/// Outcome of positive-only rejection sampling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RejectionStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl RejectionStats {
    pub fn rejection_fraction(&self) -> f64 {
        let total = self.accepted + self.rejected;
        if total == 0 {
            0.0
        } else {
            self.rejected as f64 / total as f64
        }
    }
}

/// Shared interface of the concrete families.
pub(crate) trait Continuous {
    fn ln_pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn sf(&self, x: f64) -> f64;
    #[inline]
    fn ln_cdf(&self, x: f64) -> f64 {
        self.cdf(x).ln()
    }
    #[inline]
    fn ln_sf(&self, x: f64) -> f64 {
        self.sf(x).ln()
    }
    /// Quantile for `p` in `(0, 1)`; callers validate `p`.
    fn quantile(&self, p: f64) -> f64;
    /// Inverse survival function for `s` in `(0, 1)`, accurate for small `s`.
    fn inverse_sf(&self, s: f64) -> f64;
    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;

    /// `ln f(x)` when `ln x` is already known. Log-scale families override it.
    #[inline]
    fn ln_pdf_with_log(&self, x: f64, _ln_x: f64) -> f64 {
        self.ln_pdf(x)
    }
}

/// A fully parameterised severity distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Severity {
    Lognormal(Lognormal),
    GeneralizedPareto(Gpd),
    Burr(Burr),
    Weibull(Weibull),
    Loglogistic(Loglogistic),
    GandH(GandH),
    LogSaS(LogSaS),
    Spliced(Spliced),
}

macro_rules! dispatch {
    ($self:expr, $d:ident => $body:expr) => {
        match $self {
            Severity::Lognormal($d) => $body,
            Severity::GeneralizedPareto($d) => $body,
            Severity::Burr($d) => $body,
            Severity::Weibull($d) => $body,
            Severity::Loglogistic($d) => $body,
            Severity::GandH($d) => $body,
            Severity::LogSaS($d) => $body,
            Severity::Spliced($d) => $body,
        }
    };
}

impl Severity {
    /// Build a distribution from its parameter vector (order as in the
    /// module table). `threshold` is the reporting threshold τ, which only the
    /// spliced families use: their normalising constants depend on it.
    pub fn from_params(family: SeverityFamily, params: &[f64], threshold: f64) -> Result<Self> {
        let expected = family.param_count();
        if params.len() != expected {
            return Err(Error::ParameterCount { family, expected, got: params.len() });
        }
        let p = params;
        Ok(match family {
            SeverityFamily::Lognormal => Self::Lognormal(Lognormal::new(p[0], p[1])?),
            SeverityFamily::GeneralizedPareto => Self::GeneralizedPareto(Gpd::new(p[0], p[1], p[2])?),
            SeverityFamily::Burr => Self::Burr(Burr::new(p[0], p[1], p[2])?),
            SeverityFamily::Weibull => Self::Weibull(Weibull::new(p[0], p[1])?),
            SeverityFamily::Loglogistic => Self::Loglogistic(Loglogistic::new(p[0], p[1])?),
            SeverityFamily::GandH => Self::GandH(GandH::new(p[0], p[1], p[2], p[3])?),
            SeverityFamily::LogSaS => Self::LogSaS(LogSaS::new(p[0], p[1], p[2], p[3])?),
            SeverityFamily::SplicedLognLogn => {
                let body = Lognormal::new(p[0], p[1])?;
                let tail = SplicedTail::Lognormal(Lognormal::new(p[2], p[3]).map_err(|_| {
                    Error::InvalidParameter { family, reason: "tail sigma must be positive" }
                })?);
                Self::Spliced(Spliced::new(body, tail, p[4], p[5], threshold)?)
            }
            SeverityFamily::SplicedLognGpd => {
                let body = Lognormal::new(p[0], p[1])?;
                let tail = SplicedTail::Gpd(Gpd::new(p[4], p[2], p[3]).map_err(|_| {
                    Error::InvalidParameter { family, reason: "tail scale must be positive" }
                })?);
                Self::Spliced(Spliced::new(body, tail, p[4], p[5], threshold)?)
            }
        })
    }

    pub fn family(&self) -> SeverityFamily {
        match self {
            Self::Lognormal(_) => SeverityFamily::Lognormal,
            Self::GeneralizedPareto(_) => SeverityFamily::GeneralizedPareto,
            Self::Burr(_) => SeverityFamily::Burr,
            Self::Weibull(_) => SeverityFamily::Weibull,
            Self::Loglogistic(_) => SeverityFamily::Loglogistic,
            Self::GandH(_) => SeverityFamily::GandH,
            Self::LogSaS(_) => SeverityFamily::LogSaS,
            Self::Spliced(s) => s.family(),
        }
    }

    /// Parameter vector in the order accepted by [`Severity::from_params`].
    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::Lognormal(d) => alloc::vec![d.mu, d.sigma],
            Self::GeneralizedPareto(d) => alloc::vec![d.u, d.theta, d.xi],
            Self::Burr(d) => alloc::vec![d.alpha, d.gamma, d.theta],
            Self::Weibull(d) => alloc::vec![d.shape, d.theta],
            Self::Loglogistic(d) => alloc::vec![d.gamma, d.theta],
            Self::GandH(d) => alloc::vec![d.a, d.b, d.g, d.h],
            Self::LogSaS(d) => alloc::vec![d.a, d.b, d.epsilon, d.delta],
            Self::Spliced(d) => d.params(),
        }
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        dispatch!(self, d => d.ln_pdf(x))
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        use num_traits::Float;
        Float::exp(self.ln_pdf(x))
    }

    #[inline]
    pub(crate) fn ln_pdf_with_log(&self, x: f64, ln_x: f64) -> f64 {
        dispatch!(self, d => d.ln_pdf_with_log(x, ln_x))
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        dispatch!(self, d => d.cdf(x))
    }

    /// Survival function `1 - F(x)`, computed without cancellation.
    #[inline]
    pub fn sf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        dispatch!(self, d => d.sf(x))
    }

    /// `ln F(x)`, finite where `F(x)` underflows for the normal-based families.
    #[inline]
    pub fn ln_cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        dispatch!(self, d => d.ln_cdf(x))
    }

    /// `ln(1 - F(x))`, finite where the survival probability underflows for
    /// the normal-based families.
    #[inline]
    pub fn ln_sf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        dispatch!(self, d => d.ln_sf(x))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(dispatch!(self, d => d.quantile(p)))
    }

    /// Inverse of the survival function, `F⁻¹(1 - s)`, without forming `1 - s`.
    pub fn inverse_sf(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::ProbabilityOutOfRange(s));
        }
        Ok(dispatch!(self, d => d.inverse_sf(s)))
    }

    /// Conditional CDF given exceedance of `tau`: `(F(x) - F(τ)) / (1 - F(τ))`.
    pub fn conditional_cdf(&self, x: f64, tau: f64) -> f64 {
        if x <= tau {
            return 0.0;
        }
        1.0 - self.conditional_sf(x, tau)
    }

    /// `1 - F̃(x; τ) = S(x) / S(τ)`.
    pub fn conditional_sf(&self, x: f64, tau: f64) -> f64 {
        if x <= tau {
            return 1.0;
        }
        let s_tau = self.sf(tau);
        if s_tau <= 0.0 {
            return 0.0;
        }
        (self.sf(x) / s_tau).min(1.0)
    }

    /// Quantile of the distribution conditioned on exceeding `tau`.
    pub fn conditional_quantile(&self, p: f64, tau: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(self.conditional_quantile_unchecked(p, tau))
    }

    pub(crate) fn conditional_quantile_unchecked(&self, p: f64, tau: f64) -> f64 {
        let f_tau = self.cdf(tau);
        let s_tau = self.sf(tau);
        // Work from whichever end keeps the target probability accurate.
        let target = f_tau + p * s_tau;
        let q = if target < 0.5 {
            dispatch!(self, d => d.quantile(target.max(f64::MIN_POSITIVE)))
        } else {
            let s = ((1.0 - p) * s_tau).clamp(f64::MIN_POSITIVE, 0.5);
            dispatch!(self, d => d.inverse_sf(s))
        };
        q.max(tau)
    }

    #[inline]
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        dispatch!(self, d => d.sample_one(rng))
    }

    /// `n` i.i.d. draws from the unconditional distribution.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// `n` positive draws, discarding non-positive ones. Only the g-and-h
    /// family can produce them; for the others this equals [`Severity::sample`].
    pub fn sample_positive<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Vec<f64>, RejectionStats) {
        let mut out = Vec::with_capacity(n);
        let mut stats = RejectionStats::default();
        while out.len() < n {
            let x = self.sample_one(rng);
            if x > 0.0 {
                out.push(x);
            } else {
                stats.rejected += 1;
            }
        }
        stats.accepted = n;
        (out, stats)
    }

    pub fn tail_class(&self) -> TailClass {
        match self {
            Self::Lognormal(_) => TailClass::SubExponential,
            Self::GeneralizedPareto(d) => gpd_tail_class(d.xi),
            Self::Burr(_) | Self::Loglogistic(_) => TailClass::RegularlyVarying,
            Self::Weibull(d) => {
                if d.shape < 1.0 {
                    TailClass::SubExponential
                } else {
                    // a = 1 is the exponential, a light tail.
                    TailClass::SuperExponential
                }
            }
            Self::GandH(_) => TailClass::RegularlyVarying,
            Self::LogSaS(d) => {
                if d.delta <= 0.5 {
                    TailClass::RegularlyVarying
                } else if d.delta <= 1.0 {
                    // δ = 1 is lognormal-like.
                    TailClass::SubExponential
                } else {
                    TailClass::SuperExponential
                }
            }
            Self::Spliced(d) => match d.tail {
                SplicedTail::Lognormal(_) => TailClass::SubExponential,
                SplicedTail::Gpd(_) => TailClass::RegularlyVarying,
            },
        }
    }

    /// Probability of a non-positive loss, `F(0)`.
    pub fn prob_nonpositive(&self) -> f64 {
        self.cdf(0.0)
    }
}

fn gpd_tail_class(xi: f64) -> TailClass {
    if xi.abs() < LIMIT_EPS {
        TailClass::SuperExponential
    } else if xi > 0.0 {
        TailClass::RegularlyVarying
    } else {
        TailClass::Bounded
    }
}

#[inline]
pub(crate) fn uniform_open_closed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 1]: safe to take logarithms of
    1.0 - rng.random::<f64>()
}

/// `ln(1 + e^t)` without overflow.
#[inline]
pub(crate) fn softplus(t: f64) -> f64 {
    use num_traits::Float;
    if t > 0.0 {
        t + Float::ln_1p(Float::exp(-t))
    } else {
        Float::ln_1p(Float::exp(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lognormal_median() {
        let d = Severity::from_params(SeverityFamily::Lognormal, &[1.3, 0.7], 0.0).unwrap();
        assert!(approx(d.cdf(1.3f64.exp()), 0.5, 1e-15));
    }

    #[test]
    fn burr_at_theta() {
        let d = Severity::from_params(SeverityFamily::Burr, &[0.07, 12.0, 1.1], 0.0).unwrap();
        let expect = 1.0 - 2f64.powf(-0.07);
        assert!(approx(d.cdf(1.1), expect, 1e-15));
        assert!(approx(expect, 0.04736, 1e-5));
    }

    #[test]
    fn burr_orc1_threshold_is_two_and_a_half_percent() {
        let d = Severity::from_params(SeverityFamily::Burr, &[0.07, 12.0, 1.1], 0.0).unwrap();
        assert!(approx(d.cdf(1.026), 0.025, 5e-4), "{}", d.cdf(1.026));
    }

    #[test]
    fn logsas_orc2_threshold() {
        let d = Severity::from_params(SeverityFamily::LogSaS, &[1.06, 0.37, 1.65, 0.97], 0.0).unwrap();
        let q = d.quantile(0.025).unwrap();
        assert!(approx(q, 3.147, 5e-3), "{q}");
    }

    #[test]
    fn gpd_closed_form_quantile() {
        let d = Severity::from_params(SeverityFamily::GeneralizedPareto, &[0.0, 1.0, 0.5], 0.0).unwrap();
        assert!(approx(d.quantile(0.75).unwrap(), 2.0, 1e-14));
    }

    #[test]
    fn quantile_rejects_bad_probabilities() {
        let d = Severity::from_params(SeverityFamily::Lognormal, &[0.0, 1.0], 0.0).unwrap();
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(d.quantile(p), Err(Error::ProbabilityOutOfRange(_))));
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        use SeverityFamily::*;
        let bad: &[(SeverityFamily, &[f64])] = &[
            (Lognormal, &[0.0, 0.0]),
            (Lognormal, &[f64::NAN, 1.0]),
            (GeneralizedPareto, &[0.0, -1.0, 0.2]),
            (Burr, &[0.0, 1.0, 1.0]),
            (Burr, &[1.0, -1.0, 1.0]),
            (Weibull, &[1.0, 0.0]),
            (Loglogistic, &[-2.0, 1.0]),
            (GandH, &[0.0, 1.0, 0.1, 0.0]),
            (GandH, &[0.0, 0.0, 0.1, 0.1]),
            (LogSaS, &[0.0, 1.0, 0.0, 0.0]),
            (SplicedLognGpd, &[0.0, 1.0, 1.0, 0.2, 2.0, 1.0]),
            (SplicedLognGpd, &[0.0, 1.0, 1.0, 0.2, 0.5, 0.5]),
        ];
        for (fam, p) in bad {
            assert!(Severity::from_params(*fam, p, 1.0).is_err(), "{fam:?} {p:?}");
        }
        assert!(matches!(
            Severity::from_params(Burr, &[1.0, 1.0], 0.0),
            Err(Error::ParameterCount { expected: 3, got: 2, .. })
        ));
    }

    #[test]
    fn tail_classes() {
        let tc = |f, p: &[f64]| Severity::from_params(f, p, 0.5).unwrap().tail_class();
        use SeverityFamily::*;
        assert_eq!(tc(Weibull, &[0.8, 1.0]), TailClass::SubExponential);
        assert_eq!(tc(Weibull, &[1.5, 1.0]), TailClass::SuperExponential);
        assert_eq!(tc(GeneralizedPareto, &[0.0, 1.0, -0.2]), TailClass::Bounded);
        assert_eq!(tc(GeneralizedPareto, &[0.0, 1.0, 0.2]), TailClass::RegularlyVarying);
        assert_eq!(tc(LogSaS, &[0.0, 1.0, 0.0, 0.4]), TailClass::RegularlyVarying);
        assert_eq!(tc(LogSaS, &[0.0, 1.0, 0.0, 0.5]), TailClass::RegularlyVarying);
        assert_eq!(tc(LogSaS, &[0.0, 1.0, 0.0, 0.7]), TailClass::SubExponential);
        assert_eq!(tc(LogSaS, &[0.0, 1.0, 0.0, 1.3]), TailClass::SuperExponential);
        assert_eq!(tc(GandH, &[0.0, 1.0, 0.5, 0.1]), TailClass::RegularlyVarying);
        assert_eq!(tc(Burr, &[1.0, 1.0, 1.0]), TailClass::RegularlyVarying);
        assert_eq!(tc(Loglogistic, &[2.0, 1.0]), TailClass::RegularlyVarying);
        assert_eq!(tc(Lognormal, &[0.0, 1.0]), TailClass::SubExponential);
        assert_eq!(tc(SplicedLognLogn, &[0.0, 1.0, 0.5, 1.5, 2.0, 0.7]), TailClass::SubExponential);
        assert_eq!(tc(SplicedLognGpd, &[0.0, 1.0, 1.0, 0.3, 2.0, 0.7]), TailClass::RegularlyVarying);
    }

    #[test]
    fn sample_zero_is_empty() {
        let d = Severity::from_params(SeverityFamily::Burr, &[0.07, 12.0, 1.1], 0.0).unwrap();
        assert!(d.sample(0, &mut substream(1, &[])).is_empty());
    }

    #[test]
    fn family_codes_round_trip() {
        for f in SeverityFamily::ALL {
            assert_eq!(f.code().parse::<SeverityFamily>().unwrap(), f);
            assert_eq!(alloc::format!("{f:?}").parse::<SeverityFamily>().unwrap(), f);
            assert_eq!(SeverityFamily::ALL[f.index()], f);
        }
        assert!("nope".parse::<SeverityFamily>().is_err());
    }

    #[test]
    fn conditional_cdf_matches_definition() {
        let d = Severity::from_params(SeverityFamily::Weibull, &[0.8, 2.0], 0.0).unwrap();
        let tau = 0.3;
        for &x in &[0.31, 1.0, 5.0, 40.0] {
            let direct = (d.cdf(x) - d.cdf(tau)) / (1.0 - d.cdf(tau));
            assert!(approx(d.conditional_cdf(x, tau), direct, 1e-14));
            let q = d.conditional_quantile(d.conditional_cdf(x, tau), tau).unwrap();
            assert!(approx(q, x, 1e-9 * x), "{q} vs {x}");
        }
    }
}
