//! Yearly re-selection by AIC after boundary, truncation-probability and AD
//! screens, with forecasts of the 99.9% annual-loss quantile.

use lda_core::annual_loss::SimulationConfig;
use lda_core::likelihood::TruncatedSample;
use lda_core::rng::stream_id;
use lda_core::selection::{self, rank_candidates, CriteriaRecord, SelectionMode, DEFAULT_BOOTSTRAP};
use lda_core::SeverityFamily;
use rayon::prelude::*;
use serde_json::json;

use super::{fit_all, fit_config, forecast, generate_orc_data, specs, ExperimentResult, EXP_AIC_AD};
use crate::format::Table;
use crate::parallel;

#[derive(Debug, Clone, PartialEq)]
pub struct AicAdConfig {
    pub seed: u64,
    pub sims: usize,
    pub years: usize,
    /// Years in the first training window; one forecast per window up to
    /// `years`.
    pub first_window: usize,
    pub draws: usize,
    pub bootstrap: usize,
    pub level: f64,
    pub orcs: Vec<u32>,
    pub candidates: Vec<SeverityFamily>,
    pub restarts: usize,
}

impl Default for AicAdConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sims: 10,
            years: 14,
            first_window: 10,
            draws: 250_000,
            bootstrap: DEFAULT_BOOTSTRAP,
            level: 0.95,
            orcs: vec![1, 2, 3],
            candidates: SeverityFamily::ALL.to_vec(),
            restarts: 4,
        }
    }
}

struct Window {
    orc: u32,
    sim: usize,
    train_years: usize,
    records: Vec<CriteriaRecord>,
    /// AD test ran and did not reject, per record.
    ad_accept: Vec<bool>,
    selected: Option<SeverityFamily>,
    log_q999: f64,
}

pub fn run_aic_ad_study(c: &AicAdConfig) -> anyhow::Result<ExperimentResult> {
    anyhow::ensure!(c.first_window >= 1 && c.first_window <= c.years, "first window must lie within the simulated years");
    let specs = specs(&c.orcs)?;
    let jobs: Vec<(usize, usize, usize)> = (0..specs.len())
        .flat_map(|o| (0..c.sims).flat_map(move |s| (c.first_window..=c.years).map(move |t| (o, s, t))))
        .collect();
    let windows: Vec<Window> = jobs
        .into_par_iter()
        .map(|(oi, sim, t)| -> anyhow::Result<Window> {
            let spec = &specs[oi];
            let data = generate_orc_data(spec, c.years, c.seed, EXP_AIC_AD, sim as u64)?;
            let keys = [EXP_AIC_AD, spec.id as u64, sim as u64, t as u64];
            let sample = TruncatedSample::new(data.observed(spec.threshold, t), spec.threshold)?;
            let cfg = fit_config(c.seed, c.restarts, &keys);
            let fits = fit_all(&c.candidates, &sample, &cfg);
            let mut records = Vec::with_capacity(fits.len());
            let mut ad_accept = Vec::with_capacity(fits.len());
            for fit in &fits {
                let ad = parallel::ad_test(fit, &sample, c.level, c.bootstrap, &cfg)?;
                ad_accept.push(!ad.skipped && !ad.reject);
                records.push(CriteriaRecord::new(fit, SelectionMode::Aic, Some(&ad), None));
            }
            rank_candidates(&mut records, SelectionMode::Aic);
            let best = selection::best(&records).map(|r| r.family);
            let mut log_q999 = f64::NAN;
            if let Some(fam) = best {
                let fit = fits.iter().find(|f| f.family == fam).expect("selected fit");
                let sim_cfg = SimulationConfig {
                    draws: c.draws,
                    seed: c.seed,
                    stream: stream_id(&keys),
                    reject_nonpositive: false,
                };
                if let Ok((f, _)) = forecast(fit, &data.observed_counts(spec.threshold, t), &sim_cfg, 0.999) {
                    log_q999 = f.quantile.ln();
                }
            }
            Ok(Window { orc: spec.id, sim, train_years: t, records, ad_accept, selected: best, log_q999 })
        })
        .collect::<anyhow::Result<_>>()?;

    let mut selections = Table::new(&["orc", "sim", "train_years", "selected", "log_q999", "true_log_q999"]);
    let mut candidates = Table::new(&[
        "orc",
        "sim",
        "train_years",
        "family",
        "loglik",
        "aic",
        "ad_stat",
        "ad_pvalue",
        "ad_accept",
        "trunc_prob",
        "eliminated",
        "reason",
        "rank",
    ]);
    for w in &windows {
        let truth = specs.iter().find(|s| s.id == w.orc).map_or(f64::NAN, |s| s.true_log_q999);
        selections.push(vec![
            w.orc.into(),
            w.sim.into(),
            w.train_years.into(),
            w.selected.map_or("none", |f| f.code()).into(),
            w.log_q999.into(),
            truth.into(),
        ]);
        for (r, &acc) in w.records.iter().zip(&w.ad_accept) {
            candidates.push(vec![
                w.orc.into(),
                w.sim.into(),
                w.train_years.into(),
                r.family.code().into(),
                r.loglik.into(),
                r.aic.into(),
                r.ad_stat.into(),
                r.ad_pvalue.into(),
                acc.into(),
                r.trunc_prob.into(),
                r.eliminated.into(),
                r.elimination_reason.as_str().into(),
                r.rank.into(),
            ]);
        }
    }

    // Accept counts per ORC and family.
    let mut accepts = Table::new(&["orc", "family", "accepts", "decisions"]);
    let mut accepts_json = Vec::new();
    for spec in &specs {
        for &fam in &c.candidates {
            let decisions: Vec<bool> = windows
                .iter()
                .filter(|w| w.orc == spec.id)
                .flat_map(|w| w.records.iter().zip(&w.ad_accept).filter(|(r, _)| r.family == fam).map(|(_, &a)| a))
                .collect();
            let n_acc = decisions.iter().filter(|&&a| a).count();
            accepts.push(vec![spec.id.into(), fam.code().into(), n_acc.into(), decisions.len().into()]);
            accepts_json.push(json!({"orc": spec.id, "family": fam.code(), "accepts": n_acc, "decisions": decisions.len()}));
        }
    }

    Ok(ExperimentResult {
        tag: "aic-ad".into(),
        seed: c.seed,
        replicates: c.sims,
        summary: json!({
            "experiment": "aic-ad",
            "seed": c.seed,
            "sims": c.sims,
            "years": c.years,
            "first_window": c.first_window,
            "draws": c.draws,
            "bootstrap": c.bootstrap,
            "level": c.level,
            "restarts": c.restarts,
            "orcs": c.orcs,
            "ad_accepts": accepts_json,
        }),
        tables: vec![("selections".into(), selections), ("candidates".into(), candidates), ("ad_accepts".into(), accepts)],
    })
}
