//! Truncation versus censoring probability estimates for ORC 1 with the
//! Burr family as the only candidate.

use lda_core::likelihood::{fit_censored, fit_truncated, CensoredSample, TruncatedSample};
use lda_core::{FitResult, SeverityFamily};
use rayon::prelude::*;
use serde_json::json;

use super::{fit_config, generate_orc_data, mean_sd, orc, ExperimentResult, EXP_CENSORING};
use crate::format::{Cell, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct CensoringConfig {
    pub seed: u64,
    pub sims: usize,
    pub years: usize,
    pub levels: Vec<f64>,
    pub restarts: usize,
}

impl Default for CensoringConfig {
    fn default() -> Self {
        Self { seed: 0, sims: 2000, years: 14, levels: vec![0.025, 0.05, 0.1, 0.2], restarts: 4 }
    }
}

struct Row {
    sim: usize,
    level: f64,
    tau: f64,
    n_obs: usize,
    n_below: u64,
    truncated: FitResult,
    censored: FitResult,
}

impl Row {
    fn co_converged(&self) -> bool {
        self.truncated.is_usable() && self.censored.is_usable()
    }
}

pub fn run_censoring_study(c: &CensoringConfig) -> anyhow::Result<ExperimentResult> {
    let spec = orc::orc(1).expect("ORC 1");
    let taus: Vec<f64> = c.levels.iter().map(|&p| spec.generator.quantile(p)).collect();
    let per_sim: Vec<Vec<Row>> = (0..c.sims)
        .into_par_iter()
        .map(|sim| -> anyhow::Result<Vec<Row>> {
            let data = generate_orc_data(&spec, c.years, c.seed, EXP_CENSORING, sim as u64)?;
            let mut rows = Vec::new();
            for (li, (&level, &tau)) in c.levels.iter().zip(&taus).enumerate() {
                let observed = data.observed(tau, c.years);
                let n_below = data.below(tau, c.years);
                let cfg = fit_config(c.seed, c.restarts, &[EXP_CENSORING, sim as u64, li as u64]);
                let n_obs = observed.len();
                let (truncated, censored) = match TruncatedSample::new(observed.clone(), tau) {
                    Ok(s) => (
                        fit_truncated(SeverityFamily::Burr, &s, &cfg)?,
                        fit_censored(SeverityFamily::Burr, &CensoredSample::new(observed, n_below, tau)?, &cfg)?,
                    ),
                    Err(_) => (FitResult::unfitted(SeverityFamily::Burr, 0), FitResult::unfitted(SeverityFamily::Burr, 0)),
                };
                rows.push(Row { sim, level, tau, n_obs, n_below, truncated, censored });
            }
            Ok(rows)
        })
        .collect::<anyhow::Result<_>>()?;

    let mut reps = Table::new(&[
        "sim",
        "level",
        "tau",
        "n_observed",
        "n_below",
        "trunc_prob_truncated",
        "converged_truncated",
        "boundary_truncated",
        "trunc_prob_censored",
        "converged_censored",
        "boundary_censored",
        "co_converged",
    ]);
    for r in per_sim.iter().flatten() {
        reps.push(vec![
            r.sim.into(),
            r.level.into(),
            r.tau.into(),
            r.n_obs.into(),
            r.n_below.into(),
            r.truncated.trunc_prob.into(),
            r.truncated.converged.into(),
            r.truncated.at_boundary.into(),
            r.censored.trunc_prob.into(),
            r.censored.converged.into(),
            r.censored.at_boundary.into(),
            r.co_converged().into(),
        ]);
    }

    let mut probs = Table::new(&["level", "mean_truncated", "sd_truncated", "mean_censored", "sd_censored", "co_converged"]);
    let mut summary_rows = Vec::new();
    for &level in &c.levels {
        let ok: Vec<&Row> = per_sim.iter().flatten().filter(|r| r.level == level && r.co_converged()).collect();
        let (mt, st) = mean_sd(&ok.iter().map(|r| r.truncated.trunc_prob).collect::<Vec<_>>());
        let (mc, sc) = mean_sd(&ok.iter().map(|r| r.censored.trunc_prob).collect::<Vec<_>>());
        probs.push(vec![level.into(), mt.into(), st.into(), mc.into(), sc.into(), Cell::from(ok.len())]);
        summary_rows.push(json!({
            "level": level, "mean_truncated": mt, "sd_truncated": st,
            "mean_censored": mc, "sd_censored": sc, "co_converged": ok.len(),
        }));
    }

    Ok(ExperimentResult {
        tag: "censoring".into(),
        seed: c.seed,
        replicates: c.sims,
        summary: json!({
            "experiment": "censoring",
            "seed": c.seed,
            "sims": c.sims,
            "years": c.years,
            "restarts": c.restarts,
            "levels": c.levels,
            "table": summary_rows,
        }),
        tables: vec![("replicates".into(), reps), ("probabilities".into(), probs)],
    })
}
