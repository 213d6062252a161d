//! Rank candidate severities by the quantile score of their annual-loss
//! forecasts against the observed annual losses.

use lda_core::annual_loss::SimulationConfig;
use lda_core::likelihood::TruncatedSample;
use lda_core::rng::stream_id;
use lda_core::selection::{integrated_qs, rank_candidates, AnnualLossSeries, CriteriaRecord, QsGrid, SelectionMode};
use lda_core::SeverityFamily;
use rayon::prelude::*;
use serde_json::json;

use super::{fit_all, fit_config, forecast, generate_orc_data, quartiles, specs, ExperimentResult, EXP_QS};
use crate::format::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct QsRankingConfig {
    pub seed: u64,
    pub sims: usize,
    pub years: usize,
    pub draws: usize,
    pub orcs: Vec<u32>,
    pub candidates: Vec<SeverityFamily>,
    pub grid: QsGrid,
    pub restarts: usize,
}

impl Default for QsRankingConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sims: 100,
            years: 50,
            draws: 250_000,
            orcs: vec![1, 2, 3],
            candidates: SeverityFamily::ALL.to_vec(),
            grid: QsGrid::default(),
            restarts: 4,
        }
    }
}

struct Outcome {
    orc: u32,
    sim: usize,
    records: Vec<CriteriaRecord>,
    tail: Vec<String>,
    scaled_rate: Vec<f64>,
}

pub fn run_qs_ranking_study(c: &QsRankingConfig) -> anyhow::Result<ExperimentResult> {
    let specs = specs(&c.orcs)?;
    let jobs: Vec<(usize, usize)> = (0..specs.len()).flat_map(|o| (0..c.sims).map(move |s| (o, s))).collect();
    let outcomes: Vec<Outcome> = jobs
        .into_par_iter()
        .map(|(oi, sim)| -> anyhow::Result<Outcome> {
            let spec = &specs[oi];
            let keys = [EXP_QS, spec.id as u64, sim as u64];
            let data = generate_orc_data(spec, c.years, c.seed, EXP_QS, sim as u64)?;
            let sample = TruncatedSample::new(data.observed(spec.threshold, c.years), spec.threshold)?;
            let counts = data.observed_counts(spec.threshold, c.years);
            let series = AnnualLossSeries::new(data.observed_annual(spec.threshold, c.years))?;
            let fits = fit_all(&c.candidates, &sample, &fit_config(c.seed, c.restarts, &keys));
            let mut records = Vec::with_capacity(fits.len());
            let mut scaled_rate = Vec::with_capacity(fits.len());
            for fit in &fits {
                let mut rec = CriteriaRecord::new(fit, SelectionMode::QuantileScore, None, None);
                let mut rate = f64::NAN;
                if !rec.eliminated {
                    let sim_cfg = SimulationConfig {
                        draws: c.draws,
                        seed: c.seed,
                        stream: stream_id(&[keys[0], keys[1], keys[2], fit.family.index() as u64]),
                        reject_nonpositive: false,
                    };
                    // A forecast that cannot be simulated (e.g. infinite sums)
                    // scores worst among the survivors.
                    rec.qs = match forecast(fit, &counts, &sim_cfg, 0.999) {
                        Ok((f, alm)) => {
                            rate = f.scaled_rate;
                            integrated_qs(|a| alm.quantile(a), &series, &c.grid)?
                        }
                        Err(_) => f64::INFINITY,
                    };
                }
                scaled_rate.push(rate);
                records.push(rec);
            }
            rank_candidates(&mut records, SelectionMode::QuantileScore);
            let tail = fits.iter().map(|f| f.model.as_ref().map_or("none".into(), |m| format!("{:?}", m.tail_class()))).collect();
            Ok(Outcome { orc: spec.id, sim, records, tail, scaled_rate })
        })
        .collect::<anyhow::Result<_>>()?;

    let mut ranks = Table::new(&[
        "orc", "sim", "family", "rank", "qs", "trunc_prob", "loglik", "eliminated", "reason", "tail_class", "scaled_rate",
    ]);
    for o in &outcomes {
        for ((r, tail), rate) in o.records.iter().zip(&o.tail).zip(&o.scaled_rate) {
            ranks.push(vec![
                o.orc.into(),
                o.sim.into(),
                r.family.code().into(),
                r.rank.into(),
                r.qs.into(),
                r.trunc_prob.into(),
                r.loglik.into(),
                r.eliminated.into(),
                r.elimination_reason.as_str().into(),
                tail.clone().into(),
                (*rate).into(),
            ]);
        }
    }

    let mut summary = Table::new(&["orc", "family", "min", "q1", "median", "q3", "max", "mean", "frac_rank9"]);
    let mut summary_json = Vec::new();
    for spec in &specs {
        for &fam in &c.candidates {
            let r: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.orc == spec.id)
                .flat_map(|o| o.records.iter().filter(|r| r.family == fam).map(|r| r.rank as f64))
                .collect();
            let q = quartiles(&r);
            let mean = r.iter().sum::<f64>() / r.len().max(1) as f64;
            let frac9 = r.iter().filter(|&&v| v == 9.0).count() as f64 / r.len().max(1) as f64;
            summary.push(vec![
                spec.id.into(),
                fam.code().into(),
                q[0].into(),
                q[1].into(),
                q[2].into(),
                q[3].into(),
                q[4].into(),
                mean.into(),
                frac9.into(),
            ]);
            summary_json.push(json!({
                "orc": spec.id, "family": fam.code(), "median_rank": q[2], "mean_rank": mean, "frac_rank9": frac9,
            }));
        }
    }

    Ok(ExperimentResult {
        tag: "qs-ranking".into(),
        seed: c.seed,
        replicates: c.sims,
        summary: json!({
            "experiment": "qs-ranking",
            "seed": c.seed,
            "sims": c.sims,
            "years": c.years,
            "draws": c.draws,
            "restarts": c.restarts,
            "orcs": c.orcs,
            "qs_grid": {"lo": c.grid.lo, "hi": c.grid.hi, "points": c.grid.points},
            "ranks": summary_json,
        }),
        tables: vec![("ranks".into(), ranks), ("rank_summary".into(), summary)],
    })
}
