//! Data files, configuration, the per-ORC pipeline, parallel drivers and the
//! simulation studies on top of `lda_core`.

pub mod config;
pub mod dataset;
pub mod format;
pub mod parallel;
pub mod pipeline;
pub mod qq;
pub mod study;
