//! Simulation studies on the three reference ORCs.
//!
//! Every experiment is a pure function of its configuration: data, restart
//! jitter, bootstrap draws and annual-loss simulations all come from
//! substreams keyed by `(seed, experiment, orc, replicate, ...)`.

mod aic_ad;
mod censoring;
mod gh_lsas;
pub mod orc;
mod qs_ranking;

use std::path::Path;
use std::str::FromStr;

use anyhow::Context;
use lda_core::annual_loss::SimulationConfig;
use lda_core::frequency::{estimate_rate, scale_rate};
use lda_core::likelihood::{fit_truncated, FitConfig, FitResult, TruncatedSample};
use lda_core::rng::stream_id;
use lda_core::SeverityFamily;
use rayon::prelude::*;
use serde_json::Value;

use crate::format::Table;
use crate::parallel;

pub use aic_ad::{run_aic_ad_study, AicAdConfig};
pub use censoring::{run_censoring_study, CensoringConfig};
pub use gh_lsas::{run_gh_vs_lsas_study, GhLsasConfig};
pub use orc::{generate_orc_data, reference_orcs, Generator, OrcData, OrcSpec};
pub use qs_ranking::{run_qs_ranking_study, QsRankingConfig};

/// Substream tags, one per experiment. The g-and-h comparison reuses the
/// AIC/AD study data.
pub(crate) const EXP_AIC_AD: u64 = 1;
pub(crate) const EXP_CENSORING: u64 = 3;
pub(crate) const EXP_QS: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub tag: String,
    pub seed: u64,
    pub replicates: usize,
    pub tables: Vec<(String, Table)>,
    pub summary: Value,
}

impl ExperimentResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Write `<name>.csv` per table plus `summary.json`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, t) in &self.tables {
            let path = dir.join(format!("{name}.csv"));
            t.write(&path).with_context(|| format!("writing {}", path.display()))?;
        }
        let mut summary = serde_json::to_string_pretty(&self.summary)?;
        summary.push('\n');
        std::fs::write(dir.join("summary.json"), summary)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    AicAd,
    GhVsLsas,
    Censoring,
    QsRanking,
}

impl Experiment {
    pub const NAMES: [&'static str; 4] = ["aic-ad", "gh-vs-lsas", "censoring", "qs-ranking"];
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "aic-ad" => Self::AicAd,
            "gh-vs-lsas" => Self::GhVsLsas,
            "censoring" => Self::Censoring,
            "qs-ranking" => Self::QsRanking,
            other => anyhow::bail!("unknown experiment {other:?}; expected one of {}", Self::NAMES.join(", ")),
        })
    }
}

/// Overrides shared by all experiments; `None` keeps the experiment default.
#[derive(Debug, Clone, Default)]
pub struct StudyOptions {
    pub seed: u64,
    pub sims: Option<usize>,
    pub years: Option<usize>,
    pub draws: Option<usize>,
    pub bootstrap: Option<usize>,
    pub orcs: Option<Vec<u32>>,
    pub restarts: Option<usize>,
    pub reject_nonpositive: Option<bool>,
}

pub fn run(experiment: Experiment, o: &StudyOptions) -> anyhow::Result<ExperimentResult> {
    match experiment {
        Experiment::AicAd => {
            let mut c = AicAdConfig { seed: o.seed, ..AicAdConfig::default() };
            override_opt(&mut c.sims, o.sims);
            override_opt(&mut c.years, o.years);
            override_opt(&mut c.draws, o.draws);
            override_opt(&mut c.bootstrap, o.bootstrap);
            override_opt(&mut c.restarts, o.restarts);
            override_opt(&mut c.orcs, o.orcs.clone());
            run_aic_ad_study(&c)
        }
        Experiment::GhVsLsas => {
            let mut c = GhLsasConfig { seed: o.seed, ..GhLsasConfig::default() };
            override_opt(&mut c.years, o.years);
            override_opt(&mut c.draws, o.draws);
            override_opt(&mut c.restarts, o.restarts);
            override_opt(&mut c.orcs, o.orcs.clone());
            override_opt(&mut c.reject_nonpositive, o.reject_nonpositive);
            if let Some(s) = o.sims {
                c.replicates = (0..s as u64).collect();
            }
            run_gh_vs_lsas_study(&c)
        }
        Experiment::Censoring => {
            let mut c = CensoringConfig { seed: o.seed, ..CensoringConfig::default() };
            override_opt(&mut c.sims, o.sims);
            override_opt(&mut c.years, o.years);
            override_opt(&mut c.restarts, o.restarts);
            run_censoring_study(&c)
        }
        Experiment::QsRanking => {
            let mut c = QsRankingConfig { seed: o.seed, ..QsRankingConfig::default() };
            override_opt(&mut c.sims, o.sims);
            override_opt(&mut c.years, o.years);
            override_opt(&mut c.draws, o.draws);
            override_opt(&mut c.restarts, o.restarts);
            override_opt(&mut c.orcs, o.orcs.clone());
            run_qs_ranking_study(&c)
        }
    }
}

fn override_opt<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

pub(crate) fn specs(ids: &[u32]) -> anyhow::Result<Vec<OrcSpec>> {
    ids.iter().map(|&id| orc::orc(id).with_context(|| format!("no reference ORC {id}"))).collect()
}

pub(crate) fn fit_config(seed: u64, restarts: usize, keys: &[u64]) -> FitConfig {
    FitConfig { seed, stream: stream_id(keys), restarts, ..FitConfig::default() }
}

/// Fit every candidate; a precondition failure becomes an unfitted record.
pub(crate) fn fit_all(families: &[SeverityFamily], sample: &TruncatedSample, config: &FitConfig) -> Vec<FitResult> {
    families
        .par_iter()
        .map(|&f| fit_truncated(f, sample, config).unwrap_or_else(|_| FitResult::unfitted(f, sample.len())))
        .collect()
}

/// Forecast of the annual-loss quantile at `level` from a fitted severity
/// and the reported annual counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub observed_rate: f64,
    pub scaled_rate: f64,
    pub quantile: f64,
    pub rejection_fraction: f64,
}

pub(crate) fn forecast(
    fit: &FitResult,
    counts: &[u64],
    sim: &SimulationConfig,
    level: f64,
) -> anyhow::Result<(Forecast, lda_core::AnnualLossModel)> {
    let model = fit.model.clone().context("fit has no model")?;
    let observed_rate = estimate_rate(counts)?;
    let scaled_rate = scale_rate(observed_rate, fit.trunc_prob)?;
    let alm = parallel::annual_loss_model(scaled_rate, model, sim)?;
    let f = Forecast {
        observed_rate,
        scaled_rate,
        quantile: alm.quantile(level),
        rejection_fraction: alm.rejection.rejection_fraction(),
    };
    Ok((f, alm))
}

/// Quartiles by linear interpolation (type 7).
pub fn quartiles(values: &[f64]) -> [f64; 5] {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        if v.is_empty() {
            return f64::NAN;
        }
        let pos = p * (v.len() - 1) as f64;
        let i = pos.floor() as usize;
        let j = (i + 1).min(v.len() - 1);
        v[i] + (pos - i as f64) * (v[j] - v[i])
    };
    [q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)]
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (m, f64::NAN);
    }
    let var = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

pub(crate) const EXP_EXPORT: u64 = 5;

/// Synthetic reference-ORC data as a loss dataset: ORC ids `ORC<k>`, years
/// `0..years`, losses above each ORC's threshold, and below-threshold counts
/// per year.
pub fn synthetic_dataset(orcs: &[u32], years: usize, seed: u64) -> anyhow::Result<crate::dataset::LossDataset> {
    use crate::dataset::{LossDataset, LossEvent};
    use std::collections::BTreeMap;

    let mut ds = LossDataset { below_counts: Some(BTreeMap::new()), ..LossDataset::default() };
    for spec in specs(orcs)? {
        let id = format!("ORC{}", spec.id);
        let data = generate_orc_data(&spec, years, seed, EXP_EXPORT, 0)?;
        let mut below = BTreeMap::new();
        for y in &data.years {
            let mut n_below = 0;
            for &x in &y.all {
                if x > spec.threshold {
                    ds.events.push(LossEvent { orc_id: id.clone(), year: y.year, amount: x });
                } else {
                    n_below += 1;
                }
            }
            below.insert(y.year, n_below);
        }
        ds.thresholds.insert(id.clone(), spec.threshold);
        ds.below_counts.as_mut().expect("set above").insert(id, below);
    }
    Ok(ds)
}
