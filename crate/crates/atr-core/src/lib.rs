//! Simulation core for a RIS-assisted anti-tamper radio (ATR).
//!
//! An ATR monitors the radio channel between two antennas inside an
//! enclosure and declares a tamper event when the measured frequency
//! response drifts too far from a provisioned reference. Adding a
//! reconfigurable intelligent surface (RIS) inside the enclosure makes the
//! channel a function of a secret binary configuration word, which hardens
//! the system against signal-injection attacks and lets the channel be
//! tuned for sensitivity and robustness.
//!
//! This crate provides the building blocks of a desk-scale software
//! laboratory for that system:
//!
//! - [`grid`]: frequency grids, complex channel responses, band extraction
//! - [`ris`]: binary RIS configuration words
//! - [`scene`]: parametric enclosure scenes (antennas, scatterers, RIS
//!   panel, needle hole grid, fan rotor)
//! - [`synth`]: first-order ray superposition synthesis of `H(f, t, c)`
//! - [`detection`]: distance metrics, reference provisioning, threshold
//!   calibration, verdicts, and FNR/FPR evaluation
//! - [`optimizer`]: random configurations and the greedy genetic
//!   (per-element marginal) binary optimizer with pluggable cost functions
//! - [`adversary`]: compensation attackers with three knowledge levels
//! - [`io`]: CSV and binary serialization of channel responses
//!
//! Everything is a pure function of explicit inputs and 64-bit seeds;
//! repeated calls are bitwise reproducible.

pub mod adversary;
pub mod detection;
pub mod error;
pub mod grid;
pub mod io;
pub mod optimizer;
pub mod ris;
pub mod scene;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{BandSelection, ChannelResponse, FrequencyGrid};
pub use ris::RisConfig;
pub use scene::{Enclosure, FanRotor, NoiseSpec, RisPanel, SceneSpec, TamperSpec};
pub use synth::{imprint, synthesize, time_series};
