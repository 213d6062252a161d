//! QQ pairs for a fitted severity against the reported losses.

use lda_core::likelihood::TruncatedSample;
use lda_core::Severity;

use crate::format::Table;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QqPoint {
    pub prob: f64,
    pub empirical: f64,
    pub fitted: f64,
}

/// Sorted losses against the fitted conditional quantiles at `(i - 0.5)/n`.
pub fn qq_points(model: &Severity, sample: &TruncatedSample) -> Vec<QqPoint> {
    let tau = sample.threshold();
    let mut x = sample.losses().to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.into_iter()
        .enumerate()
        .map(|(i, empirical)| {
            let prob = (i as f64 + 0.5) / n;
            let fitted = model.conditional_quantile(prob, tau).unwrap_or(f64::NAN);
            QqPoint { prob, empirical, fitted }
        })
        .collect()
}

/// Largest `|empirical - fitted|` over points with plotting position in
/// `[trim, 1 - trim]`, divided by the empirical spread over that range.
/// Measured on log losses when every value is positive.
pub fn qq_discrepancy(points: &[QqPoint], trim: f64) -> f64 {
    let central: Vec<&QqPoint> = points.iter().filter(|p| p.prob >= trim && p.prob <= 1.0 - trim).collect();
    let log = central.iter().all(|p| p.empirical > 0.0 && p.fitted > 0.0);
    let t = |v: f64| if log { v.ln() } else { v };
    let (Some(first), Some(last)) = (central.first(), central.last()) else { return f64::NAN };
    let scale = t(last.empirical) - t(first.empirical);
    central.iter().map(|p| (t(p.empirical) - t(p.fitted)).abs()).fold(0.0, f64::max) / scale
}

pub fn qq_table(points: &[QqPoint]) -> Table {
    let mut t = Table::new(&["prob", "empirical", "fitted"]);
    for p in points {
        t.push(vec![p.prob.into(), p.empirical.into(), p.fitted.into()]);
    }
    t
}
