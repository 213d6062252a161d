//! The three simulated operational risk categories and their loss data.

use lda_core::frequency::CountSampler;
use lda_core::rng::{substream, SimRng};
use lda_core::severity::{Severity, SeverityFamily};
use rand::Rng;

/// Severity used to generate data: a single family or a two-component
/// mixture where each loss picks its component independently.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Single(Severity),
    Mixture { weight: f64, first: Severity, second: Severity },
}

impl Generator {
    pub fn sample_one(&self, rng: &mut SimRng) -> f64 {
        match self {
            Generator::Single(d) => d.sample_one(rng),
            Generator::Mixture { weight, first, second } => {
                if rng.random::<f64>() < *weight {
                    first.sample_one(rng)
                } else {
                    second.sample_one(rng)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Generator::Single(d) => d.cdf(x),
            Generator::Mixture { weight, first, second } => weight * first.cdf(x) + (1.0 - weight) * second.cdf(x),
        }
    }

    /// Quantile; mixtures are inverted by bisection on `ln x`.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            Generator::Single(d) => d.quantile(p).unwrap_or(f64::NAN),
            Generator::Mixture { first, second, .. } => {
                let a = first.quantile(p).unwrap_or(f64::NAN);
                let b = second.quantile(p).unwrap_or(f64::NAN);
                let (mut lo, mut hi) = (a.min(b).ln(), a.max(b).ln());
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid.exp()) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Generator::Single(d) => format!("{}{:?}", d.family().code(), d.params()),
            Generator::Mixture { weight, first, second } => format!(
                "{weight}*{}{:?}+{}*{}{:?}",
                first.family().code(),
                first.params(),
                1.0 - weight,
                second.family().code(),
                second.params()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrcSpec {
    pub id: u32,
    pub rate: f64,
    pub generator: Generator,
    pub threshold: f64,
    pub true_log_q999: f64,
}

fn burr() -> Severity {
    Severity::from_params(SeverityFamily::Burr, &[0.07, 12.0, 1.1], 0.0).expect("valid Burr")
}

/// ORC 1: Burr(0.07, 12, 1.1); ORC 2: LogSaS(1.06, 0.37, 1.65, 0.97);
/// ORC 3: 0.33 Lognormal(0.7, 0.5) + 0.67 Burr. All with λ = 100 and τ at
/// the 2.5% severity quantile.
pub fn reference_orcs() -> Vec<OrcSpec> {
    let logsas = Severity::from_params(SeverityFamily::LogSaS, &[1.06, 0.37, 1.65, 0.97], 0.0).expect("valid LogSaS");
    let lognormal = Severity::from_params(SeverityFamily::Lognormal, &[0.7, 0.5], 0.0).expect("valid lognormal");
    vec![
        OrcSpec { id: 1, rate: 100.0, generator: Generator::Single(burr()), threshold: 1.026, true_log_q999: 13.774 },
        OrcSpec { id: 2, rate: 100.0, generator: Generator::Single(logsas), threshold: 3.147, true_log_q999: 10.543 },
        OrcSpec {
            id: 3,
            rate: 100.0,
            generator: Generator::Mixture { weight: 0.33, first: lognormal, second: burr() },
            threshold: 0.923,
            true_log_q999: 13.362,
        },
    ]
}

pub fn orc(id: u32) -> Option<OrcSpec> {
    reference_orcs().into_iter().find(|o| o.id == id)
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearLosses {
    /// Zero-based year offset.
    pub year: i64,
    pub all: Vec<f64>,
}

/// Simulated losses of one ORC, before any reporting threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct OrcData {
    pub orc: u32,
    pub years: Vec<YearLosses>,
}

const DATA_DOMAIN: u64 = 0x6461_7461;

/// Poisson counts per year with i.i.d. severities, from the substream
/// `(seed, experiment, orc, replicate)`.
pub fn generate_orc_data(spec: &OrcSpec, years: usize, seed: u64, experiment: u64, replicate: u64) -> anyhow::Result<OrcData> {
    anyhow::ensure!(years >= 1, "need at least one year of losses");
    let mut rng = substream(seed, &[DATA_DOMAIN, experiment, spec.id as u64, replicate]);
    let counts = CountSampler::new(spec.rate)?;
    let years = (0..years as i64)
        .map(|year| {
            let n = counts.sample(&mut rng);
            YearLosses { year, all: (0..n).map(|_| spec.generator.sample_one(&mut rng)).collect() }
        })
        .collect();
    Ok(OrcData { orc: spec.id, years })
}

impl OrcData {
    fn window(&self, years: usize) -> &[YearLosses] {
        &self.years[..years.min(self.years.len())]
    }

    /// Losses strictly above `tau` in the first `years` years.
    pub fn observed(&self, tau: f64, years: usize) -> Vec<f64> {
        self.window(years).iter().flat_map(|y| y.all.iter().copied().filter(|&x| x > tau)).collect()
    }

    /// Number of losses at or below `tau` in the first `years` years.
    pub fn below(&self, tau: f64, years: usize) -> u64 {
        self.window(years).iter().map(|y| y.all.iter().filter(|&&x| x <= tau).count() as u64).sum()
    }

    pub fn total(&self, years: usize) -> usize {
        self.window(years).iter().map(|y| y.all.len()).sum()
    }

    /// Reported counts per year.
    pub fn observed_counts(&self, tau: f64, years: usize) -> Vec<u64> {
        self.window(years).iter().map(|y| y.all.iter().filter(|&&x| x > tau).count() as u64).collect()
    }

    /// Sum of reported losses per year.
    pub fn observed_annual(&self, tau: f64, years: usize) -> Vec<f64> {
        self.window(years).iter().map(|y| y.all.iter().filter(|&&x| x > tau).sum()).collect()
    }
}
