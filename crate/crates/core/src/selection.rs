//! Severity selection: AIC, modified Anderson–Darling test, truncation
//! probability screen and quantile score on annual losses.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::likelihood::{refit_truncated, FitConfig, FitResult, TruncatedSample};
use crate::rng::substream;
use crate::severity::{Severity, SeverityFamily};
use crate::{Error, Result};

/// Largest conditional CDF value used in `ln(1 - F̃)`.
pub const AD_CLAMP: f64 = 1.0 - 1e-12;
pub const MIN_BOOTSTRAP: usize = 199;
pub const DEFAULT_BOOTSTRAP: usize = 500;
pub const TRUNC_PROB_LIMIT: f64 = 0.5;
/// Rank given to eliminated candidates.
pub const ELIMINATED_RANK: u8 = 9;

const AD_DOMAIN: u64 = 0x6164_7465_7374;

/// `-2·ℓ + 2k`; NaN for a fit that did not converge.
pub fn aic(fit: &FitResult) -> f64 {
    if !fit.converged || !fit.loglik.is_finite() {
        return f64::NAN;
    }
    -2.0 * fit.loglik + 2.0 * fit.n_params as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdStatistic {
    pub value: f64,
    /// Number of `F̃` values clamped to [`AD_CLAMP`].
    pub clamped: usize,
}

/// Upper-tail weighted AD statistic from conditional CDF values (any order).
pub fn modified_ad_from_probs(mut probs: Vec<f64>) -> AdStatistic {
    probs.sort_by(f64::total_cmp);
    let n = probs.len() as f64;
    let mut clamped = 0;
    let mut sum_f = 0.0;
    let mut sum_log = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        let f = if p > AD_CLAMP {
            clamped += 1;
            AD_CLAMP
        } else {
            p.max(0.0)
        };
        sum_f += f;
        let w = 2.0 - (2.0 * (i + 1) as f64 - 1.0) / n;
        sum_log += w * libm::log1p(-f);
    }
    AdStatistic { value: n / 2.0 - 2.0 * sum_f - sum_log, clamped }
}

/// `n/2 - 2ΣF̃(x_(i)) - Σ(2 - (2i-1)/n)·ln(1 - F̃(x_(i)))` with `F̃` the
/// fitted CDF conditional on exceeding the threshold.
pub fn modified_ad_statistic(model: &Severity, sample: &TruncatedSample) -> AdStatistic {
    let tau = sample.threshold();
    modified_ad_from_probs(sample.losses().iter().map(|&x| model.conditional_cdf(x, tau)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdTest {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    /// True when the fit was unusable and the test was not run.
    pub skipped: bool,
    pub replicates: usize,
    pub failed_refits: usize,
    pub clamped: usize,
}

impl AdTest {
    fn skipped() -> Self {
        Self {
            statistic: f64::NAN,
            p_value: f64::NAN,
            reject: true,
            skipped: true,
            replicates: 0,
            failed_refits: 0,
            clamped: 0,
        }
    }

    /// Combine per-replicate statistics (`None` for a failed refit).
    pub fn from_replicates(observed: AdStatistic, level: f64, stats: &[Option<f64>]) -> Self {
        let valid: Vec<f64> = stats.iter().flatten().copied().collect();
        let exceed = valid.iter().filter(|&&s| s >= observed.value).count();
        let p_value = if valid.is_empty() { 0.0 } else { exceed as f64 / valid.len() as f64 };
        Self {
            statistic: observed.value,
            p_value,
            reject: p_value < 1.0 - level,
            skipped: false,
            replicates: valid.len(),
            failed_refits: stats.len() - valid.len(),
            clamped: observed.clamped,
        }
    }
}

/// Draw `n` losses from the fitted distribution conditional on exceeding `τ`.
pub fn sample_conditional<R: Rng + ?Sized>(model: &Severity, n: usize, tau: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u: f64 = rng.random();
        let x = model.conditional_quantile_unchecked(u, tau);
        if x > tau && x.is_finite() {
            out.push(x);
        }
    }
    out
}

/// One parametric-bootstrap statistic: simulate from the fit, refit from
/// the fitted parameters, recompute the statistic. `None` when the refit
/// fails.
pub fn ad_bootstrap_replicate(fit: &FitResult, tau: f64, replicate: usize, config: &FitConfig) -> Option<f64> {
    let model = fit.model.as_ref()?;
    let mut rng = substream(config.seed, &[AD_DOMAIN, config.stream, fit.family.index() as u64, replicate as u64]);
    let draws = sample_conditional(model, fit.n_obs, tau, &mut rng);
    let sample = TruncatedSample::new(draws, tau).ok()?;
    let refit = refit_truncated(fit.family, &sample, &fit.params, config).ok()?;
    if !refit.converged {
        return None;
    }
    let stat = modified_ad_statistic(refit.model.as_ref()?, &sample).value;
    stat.is_finite().then_some(stat)
}

/// Whether the test applies to this fit; unusable fits are rejected through
/// the elimination path.
pub fn ad_test_applies(fit: &FitResult, bootstrap: usize) -> Result<bool> {
    if bootstrap < MIN_BOOTSTRAP {
        return Err(Error::TooFewBootstrapReplicates(bootstrap));
    }
    Ok(fit.is_usable())
}

/// Parametric-bootstrap AD test. `p` is the fraction of bootstrap
/// statistics at least as large as the observed one; reject when
/// `p < 1 - level`.
pub fn ad_test(fit: &FitResult, sample: &TruncatedSample, level: f64, bootstrap: usize, config: &FitConfig) -> Result<AdTest> {
    if !ad_test_applies(fit, bootstrap)? {
        return Ok(AdTest::skipped());
    }
    let observed = modified_ad_statistic(fit.model.as_ref().ok_or(Error::NotConverged)?, sample);
    let stats: Vec<Option<f64>> =
        (0..bootstrap).map(|b| ad_bootstrap_replicate(fit, sample.threshold(), b, config)).collect();
    Ok(AdTest::from_replicates(observed, level, &stats))
}

/// Skipped-test record for unusable fits.
pub fn ad_test_skipped() -> AdTest {
    AdTest::skipped()
}

/// True when the fit is eliminated: `F(τ; θ̂) ≥ limit` (or undefined).
pub fn truncation_screen(fit: &FitResult, limit: f64) -> bool {
    !(fit.trunc_prob < limit)
}

/// Observed annual losses, one entry per year.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualLossSeries {
    values: Vec<f64>,
}

impl AnnualLossSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("annual loss series is empty"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("annual losses must be finite and non-negative"));
        }
        Ok(Self { values })
    }

    /// Sum losses by year over `first..=last`; years without losses count
    /// as zero.
    pub fn aggregate(years: &[i64], amounts: &[f64], first: i64, last: i64) -> Result<Self> {
        if years.len() != amounts.len() || last < first {
            return Err(Error::InvalidInput("years and amounts do not line up"));
        }
        let mut by_year: BTreeMap<i64, f64> = (first..=last).map(|y| (y, 0.0)).collect();
        for (y, a) in years.iter().zip(amounts) {
            match by_year.get_mut(y) {
                Some(v) => *v += a,
                None => return Err(Error::InvalidInput("loss year outside the observation window")),
            }
        }
        Self::new(by_year.into_values().collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `(1/T)·Σ (1(q ≥ L_t) - α)(q - L_t)`.
pub fn quantile_score(forecast: f64, series: &AnnualLossSeries, alpha: f64) -> f64 {
    let total: f64 = series
        .values
        .iter()
        .map(|&l| {
            let ind = if forecast >= l { 1.0 } else { 0.0 };
            (ind - alpha) * (forecast - l)
        })
        .sum();
    total / series.len() as f64
}

/// Trapezoid grid over quantile levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for QsGrid {
    fn default() -> Self {
        Self { lo: 0.75, hi: 0.9995, points: 200 }
    }
}

impl QsGrid {
    pub fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(move |i| if i + 1 == self.points { self.hi } else { self.lo + step * i as f64 })
    }
}

/// Quantile score integrated over the grid's levels by the trapezoid rule.
pub fn integrated_qs(quantile: impl Fn(f64) -> f64, series: &AnnualLossSeries, grid: &QsGrid) -> Result<f64> {
    if grid.points < 2 || !(0.0 < grid.lo && grid.lo < grid.hi && grid.hi < 1.0) {
        return Err(Error::InvalidInput("quantile score grid must span (lo, hi) inside (0, 1)"));
    }
    let step = (grid.hi - grid.lo) / (grid.points - 1) as f64;
    let mut total = 0.0;
    for (i, a) in grid.levels().enumerate() {
        let w = if i == 0 || i + 1 == grid.points { 0.5 } else { 1.0 };
        total += w * quantile_score(quantile(a), series, a);
    }
    Ok(total * step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EliminationReason {
    None,
    Boundary,
    NonConvergence,
    TruncProbTooHigh,
    AdRejected,
}

impl EliminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Boundary => "boundary",
            Self::NonConvergence => "non_convergence",
            Self::TruncProbTooHigh => "trunc_prob_too_high",
            Self::AdRejected => "ad_rejected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Screens plus AD test, then minimum AIC.
    Aic,
    /// Screens, then minimum integrated quantile score.
    QuantileScore,
}

/// Elimination in the fixed order: boundary, non-convergence, truncation
/// probability, then (AIC mode only) AD rejection.
pub fn elimination_reason(fit: &FitResult, mode: SelectionMode, ad: Option<&AdTest>) -> EliminationReason {
    if fit.at_boundary {
        EliminationReason::Boundary
    } else if !fit.converged || fit.model.is_none() {
        EliminationReason::NonConvergence
    } else if truncation_screen(fit, TRUNC_PROB_LIMIT) {
        EliminationReason::TruncProbTooHigh
    } else if mode == SelectionMode::Aic && ad.is_some_and(|t| t.reject) {
        EliminationReason::AdRejected
    } else {
        EliminationReason::None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaRecord {
    pub family: SeverityFamily,
    pub loglik: f64,
    pub aic: f64,
    pub ad_stat: f64,
    pub ad_pvalue: f64,
    pub trunc_prob: f64,
    pub qs: f64,
    pub eliminated: bool,
    pub elimination_reason: EliminationReason,
    pub rank: u8,
}

impl CriteriaRecord {
    pub fn new(fit: &FitResult, mode: SelectionMode, ad: Option<&AdTest>, qs: Option<f64>) -> Self {
        let reason = elimination_reason(fit, mode, ad);
        Self {
            family: fit.family,
            loglik: fit.loglik,
            aic: aic(fit),
            ad_stat: ad.map_or(f64::NAN, |t| t.statistic),
            ad_pvalue: ad.map_or(f64::NAN, |t| t.p_value),
            trunc_prob: fit.trunc_prob,
            qs: qs.unwrap_or(f64::NAN),
            eliminated: reason != EliminationReason::None,
            elimination_reason: reason,
            rank: ELIMINATED_RANK,
        }
    }
}

/// Rank survivors `1..s` by QS or AIC (ties: fewer parameters, then family
/// order); eliminated candidates, and survivors whose score is NaN, get
/// rank 9. An infinite score ranks last among survivors.
pub fn rank_candidates(records: &mut [CriteriaRecord], mode: SelectionMode) {
    let score = |r: &CriteriaRecord| match mode {
        SelectionMode::Aic => r.aic,
        SelectionMode::QuantileScore => r.qs,
    };
    let mut order: Vec<usize> = (0..records.len()).filter(|&i| !records[i].eliminated && !score(&records[i]).is_nan()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&records[a], &records[b]);
        score(ra)
            .total_cmp(&score(rb))
            .then(ra.family.estimated_param_count().cmp(&rb.family.estimated_param_count()))
            .then(ra.family.index().cmp(&rb.family.index()))
    });
    for r in records.iter_mut() {
        r.rank = ELIMINATED_RANK;
    }
    for (pos, &i) in order.iter().enumerate() {
        records[i].rank = (pos + 1).min(ELIMINATED_RANK as usize) as u8;
    }
}

/// The rank-1 survivor, if any.
pub fn best(records: &[CriteriaRecord]) -> Option<&CriteriaRecord> {
    records.iter().find(|r| r.rank == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn series(v: &[f64]) -> AnnualLossSeries {
        AnnualLossSeries::new(v.to_vec()).unwrap()
    }

    fn record(family: SeverityFamily, qs: f64, eliminated: bool) -> CriteriaRecord {
        CriteriaRecord {
            family,
            loglik: 0.0,
            aic: qs,
            ad_stat: 0.0,
            ad_pvalue: 0.5,
            trunc_prob: 0.1,
            qs,
            eliminated,
            elimination_reason: if eliminated { EliminationReason::Boundary } else { EliminationReason::None },
            rank: 0,
        }
    }

    #[test]
    fn aic_examples() {
        let mut f = FitResult {
            family: SeverityFamily::Lognormal,
            model: None,
            params: vec![],
            loglik: -100.0,
            converged: true,
            at_boundary: false,
            trunc_prob: 0.1,
            n_params: 2,
            n_obs: 10,
        };
        assert_eq!(aic(&f), 204.0);
        f.n_params = 4;
        assert_eq!(aic(&f), 208.0);
        f.converged = false;
        assert!(aic(&f).is_nan());
    }

    #[test]
    fn ad_single_point() {
        let s = modified_ad_from_probs(vec![0.5]);
        assert!((s.value - (0.5 - 1.0 + 2f64.ln())).abs() < 1e-15);
        assert_eq!(s.clamped, 0);
        assert_eq!(modified_ad_from_probs(vec![1.0, 0.2]).clamped, 1);
    }

    #[test]
    fn truncation_screen_examples() {
        let mut f = FitResult {
            family: SeverityFamily::Lognormal,
            model: None,
            params: vec![],
            loglik: 0.0,
            converged: true,
            at_boundary: false,
            trunc_prob: 0.49,
            n_params: 2,
            n_obs: 10,
        };
        assert!(!truncation_screen(&f, 0.5));
        f.trunc_prob = 0.5;
        assert!(truncation_screen(&f, 0.5));
        f.trunc_prob = 0.95;
        assert!(truncation_screen(&f, 0.5));
    }

    #[test]
    fn qs_examples() {
        assert_eq!(quantile_score(10.0, &series(&[10.0]), 0.3), 0.0);
        assert!((quantile_score(12.0, &series(&[10.0]), 0.999) - 0.002).abs() < 1e-15);
        assert!((quantile_score(8.0, &series(&[10.0]), 0.999) - 1.998).abs() < 1e-15);
    }

    #[test]
    fn integrated_qs_shift() {
        let s = series(&[1.0, 2.0, 3.0]);
        let g = QsGrid::default();
        let base = integrated_qs(|a| 10.0 + a, &s, &g).unwrap();
        let shifted = integrated_qs(|a| 12.5 + a, &s, &g).unwrap();
        // ∫(1 - α)dα over the grid, trapezoid-exact for a linear integrand.
        let w = (g.hi - g.lo) - (g.hi * g.hi - g.lo * g.lo) / 2.0;
        assert!((shifted - base - 2.5 * w).abs() < 1e-12);
    }

    #[test]
    fn ranking_examples() {
        let mut r = vec![
            record(SeverityFamily::Lognormal, 0.2, false),
            record(SeverityFamily::Burr, 0.1, false),
            record(SeverityFamily::Weibull, 0.0, true),
        ];
        rank_candidates(&mut r, SelectionMode::QuantileScore);
        assert_eq!(r.iter().map(|x| x.rank).collect::<Vec<_>>(), vec![2, 1, 9]);

        let mut all = vec![record(SeverityFamily::Lognormal, 0.2, true), record(SeverityFamily::Burr, 0.1, true)];
        rank_candidates(&mut all, SelectionMode::Aic);
        assert!(all.iter().all(|x| x.rank == 9));

        // Tie: Burr has 3 parameters, Weibull 2; then LGN beats WBL by order.
        let mut tie = vec![
            record(SeverityFamily::Burr, 1.0, false),
            record(SeverityFamily::Weibull, 1.0, false),
            record(SeverityFamily::Lognormal, 1.0, false),
        ];
        rank_candidates(&mut tie, SelectionMode::QuantileScore);
        assert_eq!(tie.iter().map(|x| x.rank).collect::<Vec<_>>(), vec![3, 2, 1]);
    }

    #[test]
    fn too_few_bootstrap_replicates() {
        let f = FitResult {
            family: SeverityFamily::Lognormal,
            model: None,
            params: vec![],
            loglik: 0.0,
            converged: true,
            at_boundary: false,
            trunc_prob: 0.1,
            n_params: 2,
            n_obs: 10,
        };
        assert_eq!(ad_test_applies(&f, 198), Err(Error::TooFewBootstrapReplicates(198)));
    }

    #[test]
    fn series_aggregation() {
        let s = AnnualLossSeries::aggregate(&[2001, 2001, 2003], &[1.0, 2.0, 5.0], 2001, 2004).unwrap();
        assert_eq!(s.values(), &[3.0, 0.0, 5.0, 0.0]);
        assert!(AnnualLossSeries::aggregate(&[1999], &[1.0], 2001, 2004).is_err());
    }
}
