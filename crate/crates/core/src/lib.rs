//! Information-theoretic analysis of market price series.
//!
//! The pipeline runs from raw CSV prices ([`ingest`]) to returns
//! ([`returns`]), descriptive statistics ([`stats`]), binned Shannon entropy
//! ([`entropy`]) and cumulative entropy spectra with event detection
//! ([`cumentropy`]). [`synth`] generates seeded GBM paths with known shocks
//! for validation.

pub mod cumentropy;
pub mod entropy;
pub mod error;
pub mod ingest;
pub mod returns;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
