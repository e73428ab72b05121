//! Experiment harness for the simulated RIS-assisted anti-tamper radio.
//!
//! Composes the core synthesis/detection/optimizer/adversary blocks into
//! reproducible studies with CSV outputs and JSON manifests: bandwidth
//! sweeps, random-vs-optimized RIS comparisons, configuration-variance
//! profiles, compensation-attack evaluations, and the fan robustness
//! table. Every run directory contains a `manifest.json` from which the
//! run can be replayed byte-identically.

pub mod campaign;
pub mod cli;
pub mod config;
pub mod output;
pub mod profile_store;
pub mod runners;

pub use config::{Profile, ScenarioConfig};
pub use output::RunDir;
