//! Fit, select, simulate and aggregate, one isolated pipeline per ORC.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use lda_core::annual_loss::{capital_proxy, CapitalReport, SimulationConfig};
use lda_core::frequency::FrequencyEstimate;
use lda_core::likelihood::{fit_censored, fit_truncated, CensoredSample, FitConfig, FitResult, TruncatedSample};
use lda_core::rng::stream_id;
use lda_core::selection::{self, integrated_qs, rank_candidates, AdTest, AnnualLossSeries, CriteriaRecord, SelectionMode};
use lda_core::{AnnualLossModel, SeverityFamily};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Mode, RunConfig};
use crate::dataset::LossDataset;
use crate::format::{Cell, Table};
use crate::parallel;

/// Exit status of a run where some ORC has no surviving candidate.
pub const EXIT_NO_SURVIVOR: i32 = 3;
/// Exit status for invalid input or configuration.
pub const EXIT_VALIDATION: i32 = 2;

const PIPELINE_DOMAIN: u64 = 0x5049_5045;

/// How far to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Fit,
    Select,
    Simulate,
    Capital,
}

/// Levels reported for each simulated annual-loss distribution.
pub const REPORT_LEVELS: [f64; 8] = [0.5, 0.75, 0.9, 0.95, 0.99, 0.995, 0.999, 0.9995];

#[derive(Debug, Clone, PartialEq)]
pub enum OrcStatus {
    Ok,
    /// Fewer reported losses than the configured floor.
    TooFewObservations,
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct OrcReport {
    pub orc: String,
    pub threshold: f64,
    pub n_obs: usize,
    pub censored: bool,
    pub status: OrcStatus,
    pub fits: Vec<FitResult>,
    pub ad: Vec<Option<AdTest>>,
    pub records: Vec<CriteriaRecord>,
    pub selected: Option<SeverityFamily>,
    pub frequency: Option<FrequencyEstimate>,
    pub model: Option<AnnualLossModel>,
}

impl OrcReport {
    fn new(orc: &str, threshold: f64, n_obs: usize, censored: bool) -> Self {
        Self {
            orc: orc.to_owned(),
            threshold,
            n_obs,
            censored,
            status: OrcStatus::Ok,
            fits: Vec::new(),
            ad: Vec::new(),
            records: Vec::new(),
            selected: None,
            frequency: None,
            model: None,
        }
    }

    pub fn survivors(&self) -> usize {
        self.records.iter().filter(|r| !r.eliminated).count()
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub stage: Stage,
    pub orcs: Vec<OrcReport>,
    pub capital: Option<CapitalReport>,
}

impl PipelineOutput {
    /// 0 on success, 3 if any fitted ORC ended with no surviving candidate.
    pub fn exit_code(&self) -> i32 {
        let none_left = self.stage >= Stage::Select
            && self.orcs.iter().any(|o| o.status == OrcStatus::Ok && o.selected.is_none());
        if none_left {
            EXIT_NO_SURVIVOR
        } else {
            0
        }
    }

    pub fn orc(&self, id: &str) -> Option<&OrcReport> {
        self.orcs.iter().find(|o| o.orc == id)
    }

    /// ORC-scoped artifacts under `dir/<orc>/` plus run-level JSON.
    pub fn write(&self, dir: &Path, config: &RunConfig) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for o in &self.orcs {
            let d = dir.join(dir_name(&o.orc));
            std::fs::create_dir_all(&d)?;
            fits_table(o).write(&d.join("fits.csv"))?;
            if self.stage >= Stage::Select {
                selection_table(o).write(&d.join("selection.csv"))?;
            }
            if let (true, Some(m)) = (self.stage >= Stage::Simulate, &o.model) {
                annual_loss_table(m).write(&d.join("annual_loss.csv"))?;
            }
            write_json(&d.join("report.json"), &orc_json(o))?;
        }
        if let Some(c) = &self.capital {
            write_json(&dir.join("capital.json"), &capital_json(c))?;
        }
        let summary = json!({
            "stage": format!("{:?}", self.stage),
            "config": config,
            "exit_code": self.exit_code(),
            "orcs": self.orcs.iter().map(|o| json!({
                "orc": o.orc,
                "status": status_str(&o.status),
                "n_obs": o.n_obs,
                "survivors": o.survivors(),
                "selected": o.selected.map(|f| f.code()),
            })).collect::<Vec<_>>(),
        });
        write_json(&dir.join("summary.json"), &summary)
    }
}

pub fn run_pipeline(data: &LossDataset, config: &RunConfig, stage: Stage) -> anyhow::Result<PipelineOutput> {
    config.validate()?;
    let families = config.families()?;
    let orcs = data.orcs();
    anyhow::ensure!(!orcs.is_empty(), "dataset has no ORCs");
    let reports: Vec<OrcReport> = orcs
        .par_iter()
        .map(|orc| {
            let tau = data.threshold(orc).expect("ORC from threshold table");
            let n = data.losses(orc).len();
            let censored = config.censored && data.censored_available(orc);
            let mut report = OrcReport::new(orc, tau, n, censored);
            if n < config.min_obs {
                report.status = OrcStatus::TooFewObservations;
                return report;
            }
            if let Err(e) = run_orc(data, config, &families, stage, &mut report) {
                report.status = OrcStatus::Failed(format!("{e:#}"));
            }
            report
        })
        .collect();

    let capital = if stage >= Stage::Capital {
        let models: BTreeMap<String, AnnualLossModel> =
            reports.iter().filter_map(|r| r.model.clone().map(|m| (r.orc.clone(), m))).collect();
        if models.is_empty() {
            None
        } else {
            Some(capital_proxy(&models, config.alpha)?)
        }
    } else {
        None
    };
    Ok(PipelineOutput { stage, orcs: reports, capital })
}

fn run_orc(
    data: &LossDataset,
    config: &RunConfig,
    families: &[SeverityFamily],
    stage: Stage,
    report: &mut OrcReport,
) -> anyhow::Result<()> {
    let orc = report.orc.clone();
    let tau = report.threshold;
    let key = orc_key(&orc);
    let sample = TruncatedSample::new(data.losses(&orc), tau)?;
    let fit_cfg = FitConfig {
        seed: config.seed,
        stream: stream_id(&[PIPELINE_DOMAIN, key]),
        restarts: config.restarts,
        ..FitConfig::default()
    };
    let censored = if report.censored {
        Some(CensoredSample::new(sample.losses().to_vec(), data.below_total(&orc).unwrap_or(0), tau)?)
    } else {
        None
    };
    report.fits = families
        .par_iter()
        .map(|&f| {
            let r = match &censored {
                Some(c) => fit_censored(f, c, &fit_cfg),
                None => fit_truncated(f, &sample, &fit_cfg),
            };
            r.unwrap_or_else(|_| FitResult::unfitted(f, sample.len()))
        })
        .collect();

    let mode = config.mode.selection();
    report.ad = if config.mode == Mode::AicAd && stage >= Stage::Select {
        report
            .fits
            .iter()
            .map(|f| parallel::ad_test(f, &sample, config.ad_level, config.bootstrap, &fit_cfg).map(Some))
            .collect::<lda_core::Result<_>>()?
    } else {
        vec![None; report.fits.len()]
    };
    report.records =
        report.fits.iter().zip(&report.ad).map(|(f, ad)| CriteriaRecord::new(f, mode, ad.as_ref(), None)).collect();
    if stage == Stage::Fit {
        return Ok(());
    }

    let counts = data.annual_counts(&orc);
    let sim_cfg = |family: SeverityFamily| SimulationConfig {
        draws: config.draws,
        seed: config.seed,
        stream: stream_id(&[PIPELINE_DOMAIN, key, family.index() as u64]),
        reject_nonpositive: config.reject_nonpositive,
    };
    let simulate = |fit: &FitResult| -> anyhow::Result<(FrequencyEstimate, AnnualLossModel)> {
        let model = fit.model.clone().context("fit has no model")?;
        let freq = FrequencyEstimate::new(&counts, fit.trunc_prob)?;
        let alm = parallel::annual_loss_model(freq.scaled_rate, model, &sim_cfg(fit.family))?;
        Ok((freq, alm))
    };

    let mut models: Vec<Option<(FrequencyEstimate, AnnualLossModel)>> = vec![None; report.fits.len()];
    if mode == SelectionMode::QuantileScore {
        let (years, amounts) = data.years_and_amounts(&orc);
        let (first, last) = data.year_span(&orc).context("no years")?;
        let series = AnnualLossSeries::aggregate(&years, &amounts, first, last)?;
        for (i, fit) in report.fits.iter().enumerate() {
            if report.records[i].eliminated {
                continue;
            }
            report.records[i].qs = match simulate(fit) {
                Ok((freq, alm)) => {
                    let qs = integrated_qs(|a| alm.quantile(a), &series, &config.grid())?;
                    models[i] = Some((freq, alm));
                    qs
                }
                Err(_) => f64::INFINITY,
            };
        }
    }
    rank_candidates(&mut report.records, mode);
    report.selected = selection::best(&report.records).map(|r| r.family);

    if stage >= Stage::Simulate {
        if let Some(fam) = report.selected {
            let i = report.fits.iter().position(|f| f.family == fam).expect("selected fit");
            let (freq, alm) = match models[i].take() {
                Some(m) => m,
                None => simulate(&report.fits[i])?,
            };
            report.frequency = Some(freq);
            report.model = Some(alm);
        }
    }
    Ok(())
}

/// FNV-1a of the ORC id, so substreams do not depend on ORC order.
fn orc_key(orc: &str) -> u64 {
    orc.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn dir_name(orc: &str) -> String {
    orc.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn status_str(s: &OrcStatus) -> String {
    match s {
        OrcStatus::Ok => "ok".into(),
        OrcStatus::TooFewObservations => "too_few_observations".into(),
        OrcStatus::Failed(m) => format!("failed: {m}"),
    }
}

fn write_json(path: &Path, v: &Value) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

/// Non-finite values as strings, since JSON has no NaN.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(crate::format::fmt_f64(v))
    }
}

pub fn fits_table(o: &OrcReport) -> Table {
    let mut t = Table::new(&[
        "family", "loglik", "converged", "at_boundary", "trunc_prob", "n_params", "p1", "p2", "p3", "p4", "p5", "p6",
    ]);
    for f in &o.fits {
        let mut row: Vec<Cell> = vec![
            f.family.code().into(),
            f.loglik.into(),
            f.converged.into(),
            f.at_boundary.into(),
            f.trunc_prob.into(),
            f.n_params.into(),
        ];
        row.extend((0..6).map(|i| Cell::Float(f.params.get(i).copied().unwrap_or(f64::NAN))));
        t.push(row);
    }
    t
}

pub fn selection_table(o: &OrcReport) -> Table {
    let mut t = Table::new(&[
        "family", "aic", "ad_stat", "ad_pvalue", "trunc_prob", "qs", "eliminated", "reason", "rank",
    ]);
    for r in &o.records {
        t.push(vec![
            r.family.code().into(),
            r.aic.into(),
            r.ad_stat.into(),
            r.ad_pvalue.into(),
            r.trunc_prob.into(),
            r.qs.into(),
            r.eliminated.into(),
            r.elimination_reason.as_str().into(),
            r.rank.into(),
        ]);
    }
    t
}

pub fn annual_loss_table(m: &AnnualLossModel) -> Table {
    let mut t = Table::new(&["level", "quantile"]);
    for &p in &REPORT_LEVELS {
        t.push(vec![p.into(), m.quantile(p).into()]);
    }
    t
}

fn orc_json(o: &OrcReport) -> Value {
    json!({
        "orc": o.orc,
        "status": status_str(&o.status),
        "threshold": num(o.threshold),
        "n_obs": o.n_obs,
        "likelihood": if o.censored { "censored" } else { "truncated" },
        "selected": o.selected.map(|f| f.code()),
        "frequency": o.frequency.map(|f| json!({
            "observed_rate": num(f.observed_rate),
            "scaled_rate": num(f.scaled_rate),
            "years": f.years,
        })),
        "candidates": o.records.iter().zip(&o.fits).map(|(r, f)| json!({
            "family": r.family.code(),
            "params": f.params.iter().map(|&p| num(p)).collect::<Vec<_>>(),
            "loglik": num(r.loglik),
            "aic": num(r.aic),
            "ad_stat": num(r.ad_stat),
            "ad_pvalue": num(r.ad_pvalue),
            "trunc_prob": num(r.trunc_prob),
            "qs": num(r.qs),
            "eliminated": r.eliminated,
            "reason": r.elimination_reason.as_str(),
            "rank": r.rank,
        })).collect::<Vec<_>>(),
        "annual_loss": o.model.as_ref().map(|m| json!({
            "draws": m.quantile_fn.len(),
            "rejection_fraction": num(m.rejection.rejection_fraction()),
            "quantiles": REPORT_LEVELS.iter().map(|&p| json!({"level": p, "value": num(m.quantile(p))})).collect::<Vec<_>>(),
        })),
    })
}

pub fn capital_json(c: &CapitalReport) -> Value {
    json!({
        "level": c.level,
        "per_orc": c.per_orc.iter().map(|(k, &v)| (k.clone(), num(v))).collect::<serde_json::Map<_, _>>(),
        "firm_total": num(c.firm_total),
        "clamped": c.clamped,
    })
}
