//! Loss-distribution-approach engine for operational risk.
//!
//! The crate fits candidate severity families to losses reported above a
//! threshold (truncated) or with known below-threshold counts (censored),
//! scores them with AIC, a modified Anderson–Darling test, a
//! truncation-probability screen and a quantile score on annual losses, and
//! estimates the annual loss distribution of each operational risk category
//! by compound Poisson simulation.
//!
//! Everything here is `no_std` with `alloc`; file formats, the command line
//! and the parallel drivers live in the `lda` crate.
//!
//! ```
//! use lda_core::severity::{Severity, SeverityFamily};
//!
//! let burr = Severity::from_params(SeverityFamily::Burr, &[0.07, 12.0, 1.1], 0.0).unwrap();
//! let p = burr.cdf(1.1);
//! assert!((p - (1.0 - 2f64.powf(-0.07))).abs() < 1e-15);
//! ```
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod annual_loss;
pub mod frequency;
pub mod likelihood;
pub mod optim;
pub mod pchip;
pub mod rng;
pub mod selection;
pub mod severity;
pub mod special;

pub use annual_loss::{AnnualLossModel, CapitalReport, QuantileFn, SimulationConfig};
pub use frequency::FrequencyEstimate;
pub use likelihood::{CensoredSample, FitConfig, FitResult, TruncatedSample};
pub use selection::{AnnualLossSeries, CriteriaRecord, EliminationReason, SelectionMode};
pub use severity::{Severity, SeverityFamily, TailClass};

use severity::SeverityFamily as Family;

/// Errors raised by the core engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {family:?} parameters: {reason}")]
    InvalidParameter { family: Family, reason: &'static str },
    #[error("wrong number of parameters for {family:?}: expected {expected}, got {got}")]
    ParameterCount { family: Family, expected: usize, got: usize },
    #[error("probability {0} outside the open unit interval")]
    ProbabilityOutOfRange(f64),
    #[error("invalid sample: {0}")]
    InvalidSample(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("bootstrap count {0} is below the minimum of 199")]
    TooFewBootstrapReplicates(usize),
    #[error("fit has not converged")]
    NotConverged,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
