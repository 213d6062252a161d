//! Poisson annual frequency, observed above the threshold and scaled back up
//! to all events.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::{Error, Result};

/// Observed and threshold-corrected annual event rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    /// Mean annual count of reported (above-threshold) losses.
    pub observed_rate: f64,
    /// `observed_rate / (1 - F(τ))`.
    pub scaled_rate: f64,
    pub years: usize,
}

impl FrequencyEstimate {
    pub fn new(annual_counts: &[u64], trunc_prob: f64) -> Result<Self> {
        let observed_rate = estimate_rate(annual_counts)?;
        Ok(Self { observed_rate, scaled_rate: scale_rate(observed_rate, trunc_prob)?, years: annual_counts.len() })
    }
}

/// Mean of the annual counts.
pub fn estimate_rate(annual_counts: &[u64]) -> Result<f64> {
    if annual_counts.is_empty() {
        return Err(Error::InvalidInput("no years of counts"));
    }
    Ok(annual_counts.iter().map(|&c| c as f64).sum::<f64>() / annual_counts.len() as f64)
}

/// `λ* = λ̂ / (1 - trunc_prob)`.
pub fn scale_rate(observed_rate: f64, trunc_prob: f64) -> Result<f64> {
    if !(observed_rate >= 0.0 && observed_rate.is_finite()) {
        return Err(Error::InvalidInput("rate must be finite and non-negative"));
    }
    if !(0.0..1.0).contains(&trunc_prob) {
        return Err(Error::ProbabilityOutOfRange(trunc_prob));
    }
    Ok(observed_rate / (1.0 - trunc_prob))
}

/// Draw a Poisson count; a zero rate always gives zero.
pub fn sample_count<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    match Poisson::new(rate) {
        Ok(d) => d.sample(rng) as u64,
        Err(_) => 0,
    }
}

/// Sampler reused across many draws at a fixed rate.
#[derive(Debug, Clone, Copy)]
pub struct CountSampler(Option<Poisson<f64>>);

impl CountSampler {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidInput("rate must be finite and non-negative"));
        }
        if rate == 0.0 {
            return Ok(Self(None));
        }
        Poisson::new(rate).map(|d| Self(Some(d))).map_err(|_| Error::InvalidInput("rate too large"))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.0 {
            Some(d) => d.sample(rng) as u64,
            None => 0,
        }
    }
}
