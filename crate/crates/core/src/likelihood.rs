//! Truncated and censored maximum likelihood.
//!
//! Reported losses exceed a known threshold `τ`. Under truncation the
//! likelihood of a reported loss is the conditional density
//! `f(x) / (1 - F(τ))`; under censoring the number of losses at or below `τ`
//! is known and each contributes `F(τ)`.
//!
//! Fits run in an unconstrained coordinate system (log for positive
//! parameters, identity otherwise). A fit sits at the parameter-space
//! boundary when any coordinate leaves `[-boundary, boundary]`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::optim::{self, Options};
use crate::rng::substream;
use crate::severity::{Gpd, Lognormal, Severity, SeverityFamily, Spliced, SplicedTail};
use crate::{Error, Result};

/// Coordinates beyond this magnitude are rejected outright so that runaway
/// fits terminate; anything past `FitConfig::boundary` is flagged.
const HARD_BOX: f64 = 25.0;

/// Losses strictly above a non-random reporting threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSample {
    losses: Vec<f64>,
    ln_losses: Vec<f64>,
    threshold: f64,
}

impl TruncatedSample {
    pub fn new(losses: Vec<f64>, threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::InvalidSample("threshold must be finite"));
        }
        if losses.is_empty() {
            return Err(Error::InvalidSample("no losses"));
        }
        if losses.iter().any(|&x| !(x.is_finite() && x > threshold)) {
            return Err(Error::InvalidSample("every loss must be finite and exceed the threshold"));
        }
        let ln_losses = losses.iter().map(|&x| if x > 0.0 { x.ln() } else { f64::NAN }).collect();
        Ok(Self { losses, ln_losses, threshold })
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    fn subset(&self, keep: impl Fn(f64) -> bool, threshold: f64) -> Self {
        let (losses, ln_losses) = self
            .losses
            .iter()
            .zip(&self.ln_losses)
            .filter(|(x, _)| keep(**x))
            .map(|(x, l)| (*x, *l))
            .unzip();
        Self { losses, ln_losses, threshold }
    }
}

/// Reported losses above `τ` plus the count of losses at or below it.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    observed: TruncatedSample,
    below_count: u64,
}

impl CensoredSample {
    pub fn new(observed: Vec<f64>, below_count: u64, threshold: f64) -> Result<Self> {
        Ok(Self { observed: TruncatedSample::new(observed, threshold)?, below_count })
    }

    pub fn observed(&self) -> &TruncatedSample {
        &self.observed
    }

    pub fn below_count(&self) -> u64 {
        self.below_count
    }

    pub fn threshold(&self) -> f64 {
        self.observed.threshold
    }
}

fn sum_ln_pdf(model: &Severity, sample: &TruncatedSample) -> f64 {
    let mut total = 0.0;
    for (&x, &lx) in sample.losses.iter().zip(&sample.ln_losses) {
        let v = model.ln_pdf_with_log(x, lx);
        if v == f64::NEG_INFINITY || v.is_nan() {
            return f64::NEG_INFINITY;
        }
        total += v;
    }
    total
}

/// `Σ ln f(x_i) - n·ln(1 - F(τ))`; `-inf` when any density term vanishes.
pub fn loglik_truncated(model: &Severity, sample: &TruncatedSample) -> f64 {
    let ln_s_tau = model.ln_sf(sample.threshold);
    if !(ln_s_tau > f64::NEG_INFINITY) {
        return f64::NEG_INFINITY;
    }
    let dens = sum_ln_pdf(model, sample);
    if dens == f64::NEG_INFINITY {
        return dens;
    }
    dens - sample.len() as f64 * ln_s_tau
}

/// `(n - m)·ln F(τ) + Σ ln f(x_i)`; `-inf` when any term vanishes.
pub fn loglik_censored(model: &Severity, sample: &CensoredSample) -> f64 {
    let dens = sum_ln_pdf(model, &sample.observed);
    if dens == f64::NEG_INFINITY || sample.below_count == 0 {
        return dens;
    }
    let ln_f_tau = model.ln_cdf(sample.threshold());
    if !(ln_f_tau > f64::NEG_INFINITY) {
        return f64::NEG_INFINITY;
    }
    dens + sample.below_count as f64 * ln_f_tau
}

/// Optimiser and restart settings. Fits are pure functions of
/// `(sample, config)`: restart jitter comes from a substream keyed by
/// `(seed, stream, family)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub seed: u64,
    /// Distinguishes fits that share a seed (ORC, replicate, ...).
    pub stream: u64,
    /// Jittered restarts in addition to the moment-based start.
    pub restarts: usize,
    pub jitter: f64,
    pub max_iter: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    /// Transformed-coordinate magnitude that counts as the boundary.
    pub boundary: f64,
    /// Empirical percentiles tried as splicing points.
    pub splice_percentiles: Vec<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            stream: 0,
            restarts: 4,
            jitter: 0.5,
            max_iter: 2000,
            f_tol: 1e-10,
            x_tol: 1e-8,
            boundary: 20.0,
            splice_percentiles: (0..10).map(|i| 0.50 + 0.05 * i as f64).collect(),
        }
    }
}

impl FitConfig {
    fn options(&self) -> Options {
        Options { max_iter: self.max_iter, f_tol: self.f_tol, x_tol: self.x_tol, ..Options::default() }
    }

    pub fn with_stream(&self, stream: u64) -> Self {
        Self { stream, ..self.clone() }
    }
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: SeverityFamily,
    /// `None` only when no valid parameter vector was ever found.
    pub model: Option<Severity>,
    pub params: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub at_boundary: bool,
    /// `F(τ; θ̂)`: the truncation (or censoring) probability estimate.
    pub trunc_prob: f64,
    /// Number of estimated parameters.
    pub n_params: usize,
    pub n_obs: usize,
}

impl FitResult {
    /// Placeholder for a fit that produced no usable parameters.
    pub fn unfitted(family: SeverityFamily, n_obs: usize) -> Self {
        Self {
            family,
            model: None,
            params: Vec::new(),
            loglik: f64::NEG_INFINITY,
            converged: false,
            at_boundary: false,
            trunc_prob: f64::NAN,
            n_params: family.estimated_param_count(),
            n_obs,
        }
    }

    /// Converged, inside the parameter space, and with a usable model.
    pub fn is_usable(&self) -> bool {
        self.converged && !self.at_boundary && self.model.is_some()
    }
}

#[derive(Clone, Copy)]
enum Data<'a> {
    Truncated(&'a TruncatedSample),
    Censored(&'a CensoredSample),
}

impl Data<'_> {
    fn observed(&self) -> &TruncatedSample {
        match self {
            Data::Truncated(s) => s,
            Data::Censored(s) => &s.observed,
        }
    }

    fn loglik(&self, model: &Severity) -> f64 {
        match self {
            Data::Truncated(s) => loglik_truncated(model, s),
            Data::Censored(s) => loglik_censored(model, s),
        }
    }
}

/// Maximise the truncated likelihood `[1 - F(τ)]^(-n) Π f(x_i)`.
pub fn fit_truncated(family: SeverityFamily, sample: &TruncatedSample, config: &FitConfig) -> Result<FitResult> {
    fit(family, Data::Truncated(sample), None, config)
}

/// Maximise the censored likelihood `F(τ)^(n-m) Π f(x_i)`.
pub fn fit_censored(family: SeverityFamily, sample: &CensoredSample, config: &FitConfig) -> Result<FitResult> {
    fit(family, Data::Censored(sample), None, config)
}

/// Truncated fit started from a known parameter vector (bootstrap refits).
pub fn refit_truncated(
    family: SeverityFamily,
    sample: &TruncatedSample,
    start: &[f64],
    config: &FitConfig,
) -> Result<FitResult> {
    fit(family, Data::Truncated(sample), Some(start), config)
}

fn fit(family: SeverityFamily, data: Data<'_>, start: Option<&[f64]>, config: &FitConfig) -> Result<FitResult> {
    let obs = data.observed();
    let n = obs.len();
    if n < family.param_count().min(family.estimated_param_count()) + 1 {
        return Err(Error::InvalidSample("too few observations for this family"));
    }
    if family.is_positive_support() && obs.threshold < 0.0 {
        return Err(Error::InvalidSample("threshold must be non-negative"));
    }
    let first = obs.losses[0];
    if obs.losses.iter().all(|&x| x == first) {
        // No spread: every family degenerates.
        return Ok(FitResult::unfitted(family, n));
    }
    if family.is_spliced() {
        return Ok(fit_spliced(family, data, config));
    }

    let tau = obs.threshold;
    let mut objective = |u: &[f64]| -> f64 {
        if u.iter().any(|v| !(v.abs() <= HARD_BOX)) {
            return f64::INFINITY;
        }
        match Severity::from_params(family, &natural(family, u, tau), tau) {
            Ok(m) => -data.loglik(&m),
            Err(_) => f64::INFINITY,
        }
    };
    let base = match start {
        Some(p) if p.len() == family.param_count() => unconstrained(family, p),
        _ => unconstrained(family, &start_values(family, obs)),
    };
    let restarts = if start.is_some() { 0 } else { config.restarts };
    let best = multistart(&mut objective, &base, restarts, family.index() as u64, config);
    Ok(finish(family, data, &best, config))
}

fn multistart<F>(objective: &mut F, base: &[f64], restarts: usize, key: u64, config: &FitConfig) -> optim::Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let opts = config.options();
    let mut rng = substream(config.seed, &[config.stream, key]);
    let mut best: Option<optim::Minimum> = None;
    for r in 0..=restarts {
        let mut x0 = base.to_vec();
        if r > 0 {
            for v in &mut x0 {
                let z: f64 = rng.sample(StandardNormal);
                *v += config.jitter * z;
            }
        }
        if !objective(&x0).is_finite() {
            continue;
        }
        let m = optim::minimize(objective, &x0, &opts);
        let better = match &best {
            None => true,
            Some(b) => m.f < b.f || (m.f == b.f && m.converged && !b.converged),
        };
        if better {
            best = Some(m);
        }
    }
    best.unwrap_or(optim::Minimum {
        x: base.to_vec(),
        f: f64::INFINITY,
        iterations: 0,
        evaluations: 0,
        converged: false,
    })
}

fn finish(family: SeverityFamily, data: Data<'_>, best: &optim::Minimum, config: &FitConfig) -> FitResult {
    let obs = data.observed();
    let tau = obs.threshold;
    let n = obs.len();
    if !best.f.is_finite() {
        return FitResult::unfitted(family, n);
    }
    let params = natural(family, &best.x, tau);
    let Ok(model) = Severity::from_params(family, &params, tau) else {
        return FitResult::unfitted(family, n);
    };
    let loglik = data.loglik(&model);
    let at_boundary = best.x.iter().any(|v| v.abs() > config.boundary);
    let mut converged = best.converged && loglik.is_finite();
    if converged && !at_boundary {
        converged = stationary(family, data, &best.x, loglik);
    }
    FitResult {
        family,
        trunc_prob: model.cdf(tau),
        model: Some(model),
        params,
        loglik,
        converged,
        at_boundary,
        n_params: family.estimated_param_count(),
        n_obs: n,
    }
}

/// First-order check: `‖∇ℓ‖∞ ≤ 1e-4·(1 + |ℓ|)` in the fitted coordinates.
fn stationary(family: SeverityFamily, data: Data<'_>, u: &[f64], loglik: f64) -> bool {
    let tau = data.observed().threshold;
    let mut negll = |v: &[f64]| match Severity::from_params(family, &natural(family, v, tau), tau) {
        Ok(m) => -data.loglik(&m),
        Err(_) => f64::INFINITY,
    };
    let mut g = vec![0.0; u.len()];
    optim::numeric_gradient(&mut negll, u, -loglik, &mut g);
    g.iter().all(|v| v.abs() <= 1e-4 * (1.0 + loglik.abs()))
}

impl SeverityFamily {
    fn is_positive_support(self) -> bool {
        !matches!(self, SeverityFamily::GandH | SeverityFamily::GeneralizedPareto)
    }
}

/// Map unconstrained coordinates to the family's parameter vector.
pub fn natural(family: SeverityFamily, u: &[f64], tau: f64) -> Vec<f64> {
    use SeverityFamily::*;
    match family {
        Lognormal => vec![u[0], u[1].exp()],
        GeneralizedPareto => vec![tau, u[0].exp(), u[1]],
        Burr => vec![u[0].exp(), u[1].exp(), u[2].exp()],
        Weibull | Loglogistic => vec![u[0].exp(), u[1].exp()],
        GandH | LogSaS => vec![u[0], u[1].exp(), u[2], u[3].exp()],
        SplicedLognLogn | SplicedLognGpd => u.to_vec(),
    }
}

/// Inverse of [`natural`].
pub fn unconstrained(family: SeverityFamily, p: &[f64]) -> Vec<f64> {
    use SeverityFamily::*;
    match family {
        Lognormal => vec![p[0], p[1].ln()],
        GeneralizedPareto => vec![p[1].ln(), p[2]],
        Burr => vec![p[0].ln(), p[1].ln(), p[2].ln()],
        Weibull | Loglogistic => vec![p[0].ln(), p[1].ln()],
        GandH | LogSaS => vec![p[0], p[1].ln(), p[2], p[3].ln()],
        SplicedLognLogn | SplicedLognGpd => p.to_vec(),
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt().max(1e-3))
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Linear-interpolation empirical quantile of sorted data.
fn empirical_quantile(s: &[f64], p: f64) -> f64 {
    let pos = p * (s.len() - 1) as f64;
    let i = (pos.floor() as usize).min(s.len() - 1);
    let j = (i + 1).min(s.len() - 1);
    s[i] + (pos - i as f64) * (s[j] - s[i])
}

/// Moment-style starting values computed from the reported losses.
pub fn start_values(family: SeverityFamily, sample: &TruncatedSample) -> Vec<f64> {
    use core::f64::consts::PI;
    use SeverityFamily::*;
    let logs: Vec<f64> = sample.ln_losses.iter().copied().filter(|v| v.is_finite()).collect();
    let (m, s) = if logs.len() >= 2 { mean_sd(&logs) } else { (0.0, 1.0) };
    let sqrt3 = 3f64.sqrt();
    let sqrt6 = 6f64.sqrt();
    match family {
        Lognormal => vec![m, s],
        GeneralizedPareto => {
            let y: Vec<f64> = sample.losses.iter().map(|x| x - sample.threshold).collect();
            let (ym, ysd) = mean_sd(&y);
            let xi = (0.5 * (1.0 - ym * ym / (ysd * ysd))).clamp(-0.3, 0.9);
            vec![sample.threshold, (ym * (1.0 - xi)).max(1e-6), xi]
        }
        Burr => vec![1.0, PI / (s * sqrt3), m.exp()],
        Weibull => {
            let a = PI / (s * sqrt6);
            vec![a, (m + 0.577_215_664_9 / a).exp()]
        }
        Loglogistic => vec![PI / (s * sqrt3), m.exp()],
        GandH => {
            let srt = sorted(&sample.losses);
            let (q1, med, q3) =
                (empirical_quantile(&srt, 0.25), empirical_quantile(&srt, 0.5), empirical_quantile(&srt, 0.75));
            let b = ((q3 - q1) / 1.349).max(1e-6);
            let g = if q3 > med && med > q1 {
                (((q3 - med) / (med - q1)).ln() / 0.674_489_75).clamp(-2.0, 2.0)
            } else {
                0.0
            };
            vec![med, b, g, 0.1]
        }
        LogSaS => {
            let srt = sorted(&logs);
            let iqr = empirical_quantile(&srt, 0.75) - empirical_quantile(&srt, 0.25);
            vec![empirical_quantile(&srt, 0.5), (iqr / 1.349).max(1e-3), 0.0, 1.0]
        }
        SplicedLognLogn | SplicedLognGpd => vec![m, s, m, s, empirical_quantile(&sorted(&sample.losses), 0.8), 0.8],
    }
}

// --- spliced families -------------------------------------------------------
//
// With p_b equal to the body's share of reported losses, the likelihood
// factorises into a body term in (μ_b, σ_b) and a tail term in the tail
// parameters, so each splicing point needs two small fits.

struct SplitFit {
    body: optim::Minimum,
    tail: optim::Minimum,
}

fn fit_spliced(family: SeverityFamily, data: Data<'_>, config: &FitConfig) -> FitResult {
    let obs = data.observed();
    let tau = obs.threshold;
    let n = obs.len();
    let srt = sorted(&obs.losses);
    let mut candidates: Vec<f64> = config
        .splice_percentiles
        .iter()
        .map(|&q| srt[((q * n as f64).ceil() as usize).clamp(1, n) - 1])
        .collect();
    candidates.dedup();

    let mut best: Option<(FitResult, f64)> = None;
    for (ci, &x_s) in candidates.iter().enumerate() {
        let n_body = srt.partition_point(|&v| v <= x_s);
        if x_s <= tau || n_body < 3 || n - n_body < 3 {
            continue;
        }
        let p_b = n_body as f64 / n as f64;
        let body = obs.subset(|x| x <= x_s, tau);
        let tail = obs.subset(|x| x > x_s, x_s);
        let split = fit_split(family, data, &body, &tail, x_s, p_b, ci as u64, config);
        let result = assemble(family, data, &split, x_s, p_b, config);
        let score = result.loglik;
        let better = match &best {
            None => true,
            Some((b, s)) => score > *s || (!b.converged && result.converged && score >= *s),
        };
        if better && result.model.is_some() {
            best = Some((result, score));
        }
    }
    best.map(|(r, _)| r).unwrap_or_else(|| FitResult::unfitted(family, n))
}

#[allow(clippy::too_many_arguments)]
fn fit_split(
    family: SeverityFamily,
    data: Data<'_>,
    body: &TruncatedSample,
    tail: &TruncatedSample,
    x_s: f64,
    p_b: f64,
    key: u64,
    config: &FitConfig,
) -> SplitFit {
    let tau = body.threshold;
    let n_tail = tail.len() as f64;
    let below = match data {
        Data::Censored(s) => s.below_count as f64,
        Data::Truncated(_) => 0.0,
    };
    let body_obj = |u: &[f64]| -> f64 {
        if u.iter().any(|v| !(v.abs() <= HARD_BOX)) {
            return f64::INFINITY;
        }
        let Ok(b) = Lognormal::new(u[0], u[1].exp()) else { return f64::INFINITY };
        let fb_xs = Severity::Lognormal(b).cdf(x_s);
        let fb_tau = Severity::Lognormal(b).cdf(tau);
        let window = fb_xs - fb_tau;
        if !(window > 0.0) {
            return f64::INFINITY;
        }
        let dens = sum_ln_pdf(&Severity::Lognormal(b), body);
        let n_body = body.len() as f64;
        let ll = if below == 0.0 {
            dens - n_body * window.ln()
        } else {
            // Body-dependent part of the censored spliced likelihood.
            let d1 = fb_xs - (1.0 - p_b) * fb_tau;
            if !(d1 > 0.0 && fb_tau > 0.0) {
                return f64::INFINITY;
            }
            below * fb_tau.ln() + dens + n_tail * window.ln() - (below + n_body + n_tail) * d1.ln()
        };
        -ll
    };
    let tail_obj = |u: &[f64]| -> f64 {
        if u.iter().any(|v| !(v.abs() <= HARD_BOX)) {
            return f64::INFINITY;
        }
        let model = match family {
            SeverityFamily::SplicedLognLogn => match Lognormal::new(u[0], u[1].exp()) {
                Ok(t) => Severity::Lognormal(t),
                Err(_) => return f64::INFINITY,
            },
            _ => match Gpd::new(x_s, u[0].exp(), u[1]) {
                Ok(t) => Severity::GeneralizedPareto(t),
                Err(_) => return f64::INFINITY,
            },
        };
        -loglik_truncated(&model, tail)
    };

    let body_start = unconstrained(SeverityFamily::Lognormal, &start_values(SeverityFamily::Lognormal, body));
    let tail_family = match family {
        SeverityFamily::SplicedLognLogn => SeverityFamily::Lognormal,
        _ => SeverityFamily::GeneralizedPareto,
    };
    let tail_start = unconstrained(tail_family, &start_values(tail_family, tail));
    let base_key = (family.index() as u64) << 32 | key << 1;
    let mut bo = body_obj;
    let mut to = tail_obj;
    SplitFit {
        body: multistart(&mut bo, &body_start, config.restarts, base_key, config),
        tail: multistart(&mut to, &tail_start, config.restarts, base_key | 1, config),
    }
}

fn assemble(family: SeverityFamily, data: Data<'_>, split: &SplitFit, x_s: f64, p_b: f64, config: &FitConfig) -> FitResult {
    let obs = data.observed();
    let tau = obs.threshold;
    let n = obs.len();
    if !(split.body.f.is_finite() && split.tail.f.is_finite()) {
        return FitResult::unfitted(family, n);
    }
    let (ub, ut) = (&split.body.x, &split.tail.x);
    let Ok(body) = Lognormal::new(ub[0], ub[1].exp()) else { return FitResult::unfitted(family, n) };
    let tail = match family {
        SeverityFamily::SplicedLognLogn => Lognormal::new(ut[0], ut[1].exp()).map(SplicedTail::Lognormal),
        _ => Gpd::new(x_s, ut[0].exp(), ut[1]).map(SplicedTail::Gpd),
    };
    let Ok(tail) = tail else { return FitResult::unfitted(family, n) };
    let Ok(spliced) = Spliced::new(body, tail, x_s, p_b, tau) else { return FitResult::unfitted(family, n) };
    let model = Severity::Spliced(spliced);
    let loglik = data.loglik(&model);
    let at_boundary = ub.iter().chain(ut).any(|v| v.abs() > config.boundary);
    FitResult {
        family,
        params: model.params(),
        trunc_prob: model.cdf(tau),
        model: Some(model),
        loglik,
        converged: split.body.converged && split.tail.converged && loglik.is_finite(),
        at_boundary,
        n_params: family.estimated_param_count(),
        n_obs: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn lognormal_sample(n: usize, tau: f64, seed: u64) -> TruncatedSample {
        let d = Severity::from_params(SeverityFamily::Lognormal, &[0.0, 1.0], 0.0).unwrap();
        let mut rng = substream(seed, &[]);
        let mut v = Vec::with_capacity(n);
        while v.len() < n {
            let x = d.sample_one(&mut rng);
            if x > tau {
                v.push(x);
            }
        }
        TruncatedSample::new(v, tau).unwrap()
    }

    #[test]
    fn sample_validation() {
        assert!(TruncatedSample::new(vec![], 1.0).is_err());
        assert!(TruncatedSample::new(vec![2.0, 1.0], 1.0).is_err());
        assert!(TruncatedSample::new(vec![2.0, f64::INFINITY], 1.0).is_err());
        assert!(TruncatedSample::new(vec![2.0], f64::NAN).is_err());
        assert!(CensoredSample::new(vec![2.0, 3.0], 5, 1.0).is_ok());
    }

    #[test]
    fn single_point_loglik_is_log_density() {
        // Uniform-like check: GPD with ξ = -1 is uniform on (u, u + θ).
        let d = Severity::from_params(SeverityFamily::GeneralizedPareto, &[1.0, 4.0, -1.0], 0.0).unwrap();
        let s = TruncatedSample::new(vec![2.0], 1.0).unwrap();
        assert!((loglik_truncated(&d, &s) - (0.25f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn loglik_is_neg_infinity_outside_support() {
        let d = Severity::from_params(SeverityFamily::GeneralizedPareto, &[1.0, 1.0, -0.5], 0.0).unwrap();
        let s = TruncatedSample::new(vec![1.5, 10.0], 1.0).unwrap();
        assert_eq!(loglik_truncated(&d, &s), f64::NEG_INFINITY);
    }

    #[test]
    fn censored_without_below_count_is_complete_data_loglik() {
        let d = Severity::from_params(SeverityFamily::Weibull, &[0.9, 2.0], 0.0).unwrap();
        let s = CensoredSample::new(vec![0.5, 1.5, 4.0], 0, 0.2).unwrap();
        let direct: f64 = [0.5f64, 1.5, 4.0].iter().map(|&x| d.ln_pdf(x)).sum();
        assert!((loglik_censored(&d, &s) - direct).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sample_does_not_converge() {
        let s = TruncatedSample::new(vec![2.0; 50], 1.0).unwrap();
        let r = fit_truncated(SeverityFamily::Lognormal, &s, &FitConfig::default()).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn too_few_observations_is_an_error() {
        let s = TruncatedSample::new(vec![2.0, 3.0], 1.0).unwrap();
        assert!(fit_truncated(SeverityFamily::GandH, &s, &FitConfig::default()).is_err());
    }

    #[test]
    fn lognormal_recovery() {
        let tau = crate::special::norm_quantile(0.1).exp();
        let s = lognormal_sample(5000, tau, 11);
        let r = fit_truncated(SeverityFamily::Lognormal, &s, &FitConfig::default()).unwrap();
        assert!(r.converged && !r.at_boundary);
        assert!(r.params[0].abs() < 0.05 && (r.params[1] - 1.0).abs() < 0.05, "{:?}", r.params);
        assert!((r.trunc_prob - 0.1).abs() < 0.03);
    }

    #[test]
    fn parameter_transform_round_trips() {
        for f in SeverityFamily::ALL {
            let p: Vec<f64> = (0..f.param_count()).map(|i| 0.3 + i as f64).collect();
            let back = natural(f, &unconstrained(f, &p), p[0]);
            for (a, b) in p.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12, "{f:?}");
            }
        }
    }

    #[test]
    fn spliced_fit_matches_generic_likelihood() {
        let s = lognormal_sample(2000, 0.3, 5);
        let cfg = FitConfig { restarts: 1, ..FitConfig::default() };
        for fam in [SeverityFamily::SplicedLognLogn, SeverityFamily::SplicedLognGpd] {
            let r = fit_truncated(fam, &s, &cfg).unwrap();
            let m = r.model.clone().unwrap();
            assert!((loglik_truncated(&m, &s) - r.loglik).abs() < 1e-9);
            let p_b = r.params[5];
            let x_s = r.params[4];
            let frac = s.losses().iter().filter(|&&x| x <= x_s).count() as f64 / s.len() as f64;
            assert_eq!(p_b, frac);
            // conditional body mass equals p_b
            let cond = m.conditional_cdf(x_s, 0.3);
            assert!((cond - p_b).abs() < 1e-12, "{cond} vs {p_b}");
        }
    }
}
