//! Compound Poisson annual losses and their interpolated quantile function.
//!
//! Draws are produced in fixed-size chunks, chunk `c` of ORC `k` using the
//! substream `(seed, k, c)`. Concatenating chunks in index order gives the
//! same vector whether they were computed serially or in parallel.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::frequency::CountSampler;
use crate::pchip::Pchip;
use crate::rng::{substream, SimRng};
use crate::severity::{RejectionStats, Severity};
use crate::{Error, Result};

/// Annual losses per chunk.
pub const CHUNK_LEN: usize = 4096;

/// Default number of simulated years.
pub const DEFAULT_DRAWS: usize = 250_000;

/// Domain tag mixed into simulation substreams.
const SIM_DOMAIN: u64 = 0x616e_6e75_616c;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub draws: usize,
    pub seed: u64,
    /// ORC key; different ORCs never share a substream.
    pub stream: u64,
    /// Redraw severities that are not positive instead of keeping them.
    pub reject_nonpositive: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { draws: DEFAULT_DRAWS, seed: 0, stream: 0, reject_nonpositive: false }
    }
}

impl SimulationConfig {
    pub fn chunk_count(&self) -> usize {
        self.draws.div_ceil(CHUNK_LEN)
    }

    fn chunk_len(&self, chunk: usize) -> usize {
        CHUNK_LEN.min(self.draws - chunk * CHUNK_LEN)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulatedLosses {
    /// Annual losses in simulation order (not sorted).
    pub losses: Vec<f64>,
    /// Severity redraws; all zero unless rejection is enabled.
    pub rejection: RejectionStats,
}

impl SimulatedLosses {
    /// Concatenate chunk outputs in index order.
    pub fn merge(chunks: impl IntoIterator<Item = SimulatedLosses>) -> Self {
        let mut out = SimulatedLosses::default();
        for c in chunks {
            out.losses.extend_from_slice(&c.losses);
            out.rejection.accepted += c.rejection.accepted;
            out.rejection.rejected += c.rejection.rejected;
        }
        out
    }
}

fn check(rate: f64, config: &SimulationConfig) -> Result<CountSampler> {
    if config.draws == 0 {
        return Err(Error::InvalidInput("need at least one simulated year"));
    }
    CountSampler::new(rate)
}

/// One chunk of annual losses.
pub fn simulate_chunk(rate: f64, severity: &Severity, config: &SimulationConfig, chunk: usize) -> Result<SimulatedLosses> {
    if config.reject_nonpositive && severity.prob_nonpositive() >= 1.0 {
        return Err(Error::InvalidInput("severity has no positive mass"));
    }
    simulate_chunk_with(rate, |rng: &mut SimRng| severity.sample_one(rng), config, chunk)
}

/// [`simulate_chunk`] for an arbitrary severity sampler.
pub fn simulate_chunk_with<F>(rate: f64, draw: F, config: &SimulationConfig, chunk: usize) -> Result<SimulatedLosses>
where
    F: Fn(&mut SimRng) -> f64,
{
    let counts = check(rate, config)?;
    if chunk >= config.chunk_count() {
        return Err(Error::InvalidInput("chunk index out of range"));
    }
    let mut rng = substream(config.seed, &[SIM_DOMAIN, config.stream, chunk as u64]);
    let len = config.chunk_len(chunk);
    let mut out = SimulatedLosses { losses: Vec::with_capacity(len), rejection: RejectionStats::default() };
    for _ in 0..len {
        let n = counts.sample(&mut rng);
        let mut total = 0.0;
        for _ in 0..n {
            let mut x = draw(&mut rng);
            if config.reject_nonpositive {
                while x <= 0.0 {
                    out.rejection.rejected += 1;
                    x = draw(&mut rng);
                }
                out.rejection.accepted += 1;
            }
            total += x;
        }
        out.losses.push(total);
    }
    Ok(out)
}

/// `M` annual losses, each a sum of `N ~ Poisson(rate)` unconditional
/// severity draws.
pub fn simulate_annual_losses(rate: f64, severity: &Severity, config: &SimulationConfig) -> Result<SimulatedLosses> {
    check(rate, config)?;
    let mut chunks = Vec::with_capacity(config.chunk_count());
    for c in 0..config.chunk_count() {
        chunks.push(simulate_chunk(rate, severity, config, c)?);
    }
    Ok(SimulatedLosses::merge(chunks))
}

/// Monotone cubic interpolant of the empirical quantile function through
/// `(i/(M+1), x_(i))`, clamped outside `[1/(M+1), M/(M+1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFn {
    interp: Pchip,
    step: f64,
}

impl QuantileFn {
    pub fn new(mut losses: Vec<f64>) -> Result<Self> {
        if losses.len() < 4 {
            return Err(Error::InvalidInput("need at least four simulated losses"));
        }
        if losses.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("simulated losses must be finite"));
        }
        losses.sort_by(f64::total_cmp);
        let m = losses.len();
        let step = 1.0 / (m as f64 + 1.0);
        let p = (1..=m).map(|i| i as f64 / (m as f64 + 1.0)).collect();
        Ok(Self { interp: Pchip::new(p, losses)?, step })
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.interp.eval_uniform(p, self.step, self.step)
    }

    pub fn sorted_losses(&self) -> &[f64] {
        self.interp.nodes().1
    }

    pub fn len(&self) -> usize {
        self.interp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interp.is_empty()
    }

    /// Range of levels evaluated without clamping.
    pub fn level_range(&self) -> (f64, f64) {
        let x = self.interp.nodes().0;
        (x[0], x[x.len() - 1])
    }
}

/// Simulated annual loss distribution of one ORC.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualLossModel {
    pub scaled_rate: f64,
    pub severity: Severity,
    pub quantile_fn: QuantileFn,
    pub rejection: RejectionStats,
}

impl AnnualLossModel {
    pub fn from_simulation(scaled_rate: f64, severity: Severity, sim: SimulatedLosses) -> Result<Self> {
        Ok(Self { scaled_rate, severity, quantile_fn: QuantileFn::new(sim.losses)?, rejection: sim.rejection })
    }

    /// Simulate serially and build the quantile function.
    pub fn simulate(scaled_rate: f64, severity: Severity, config: &SimulationConfig) -> Result<Self> {
        let sim = simulate_annual_losses(scaled_rate, &severity, config)?;
        Self::from_simulation(scaled_rate, severity, sim)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.quantile_fn.eval(p)
    }

    pub fn simulated_losses(&self) -> &[f64] {
        self.quantile_fn.sorted_losses()
    }
}

/// Sum of per-ORC annual loss quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct CapitalReport {
    pub level: f64,
    pub per_orc: BTreeMap<String, f64>,
    pub firm_total: f64,
    /// ORCs whose quantile function had to clamp `level`.
    pub clamped: Vec<String>,
}

pub fn capital_proxy(models: &BTreeMap<String, AnnualLossModel>, level: f64) -> Result<CapitalReport> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::ProbabilityOutOfRange(level));
    }
    let mut per_orc = BTreeMap::new();
    let mut clamped = Vec::new();
    for (orc, m) in models {
        let (lo, hi) = m.quantile_fn.level_range();
        if level < lo || level > hi {
            clamped.push(orc.clone());
        }
        per_orc.insert(orc.clone(), m.quantile(level));
    }
    let firm_total = per_orc.values().sum();
    Ok(CapitalReport { level, per_orc, firm_total, clamped })
}
