//! Multi-threaded drivers. Each reproduces its serial counterpart in
//! `lda_core` exactly: work items carry their own substreams and results are
//! collected in index order.

use lda_core::annual_loss::{self, SimulatedLosses, SimulationConfig};
use lda_core::likelihood::{FitConfig, FitResult, TruncatedSample};
use lda_core::rng::SimRng;
use lda_core::selection::{self, AdTest};
use lda_core::{AnnualLossModel, Severity};
use rayon::prelude::*;

pub fn simulate_annual_losses(rate: f64, severity: &Severity, config: &SimulationConfig) -> lda_core::Result<SimulatedLosses> {
    let chunks = (0..config.chunk_count())
        .into_par_iter()
        .map(|c| annual_loss::simulate_chunk(rate, severity, config, c))
        .collect::<lda_core::Result<Vec<_>>>()?;
    Ok(SimulatedLosses::merge(chunks))
}

pub fn simulate_with<F>(rate: f64, draw: F, config: &SimulationConfig) -> lda_core::Result<SimulatedLosses>
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    let chunks = (0..config.chunk_count())
        .into_par_iter()
        .map(|c| annual_loss::simulate_chunk_with(rate, &draw, config, c))
        .collect::<lda_core::Result<Vec<_>>>()?;
    Ok(SimulatedLosses::merge(chunks))
}

pub fn annual_loss_model(rate: f64, severity: Severity, config: &SimulationConfig) -> lda_core::Result<AnnualLossModel> {
    let sim = simulate_annual_losses(rate, &severity, config)?;
    AnnualLossModel::from_simulation(rate, severity, sim)
}

/// Bootstrap AD test with replicates spread over threads.
pub fn ad_test(
    fit: &FitResult,
    sample: &TruncatedSample,
    level: f64,
    bootstrap: usize,
    config: &FitConfig,
) -> lda_core::Result<AdTest> {
    if !selection::ad_test_applies(fit, bootstrap)? {
        return Ok(selection::ad_test_skipped());
    }
    let model = fit.model.as_ref().ok_or(lda_core::Error::NotConverged)?;
    let observed = selection::modified_ad_statistic(model, sample);
    let stats: Vec<Option<f64>> = (0..bootstrap)
        .into_par_iter()
        .map(|b| selection::ad_bootstrap_replicate(fit, sample.threshold(), b, config))
        .collect();
    Ok(AdTest::from_replicates(observed, level, &stats))
}
