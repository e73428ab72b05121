//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("band [{lo_hz} Hz, {hi_hz} Hz] exceeds grid span [{span_lo_hz} Hz, {span_hi_hz} Hz]")]
    BandOutOfRange {
        lo_hz: f64,
        hi_hz: f64,
        span_lo_hz: f64,
        span_hi_hz: f64,
    },

    #[error("no grid point falls inside band [{lo_hz} Hz, {hi_hz} Hz]")]
    EmptyBand { lo_hz: f64, hi_hz: f64 },

    #[error("frequency grids differ: {0}")]
    GridMismatch(String),

    #[error("RIS config has {got} bits but the panel has {expected} elements")]
    ConfigLengthMismatch { expected: usize, got: usize },

    #[error("hole index {index} out of range (hole grid has {holes} sites)")]
    InvalidHoleIndex { index: usize, holes: usize },

    #[error("non-finite or degenerate geometry: {0}")]
    NonFiniteGeometry(String),

    #[error("reference response is all-zero; normalized deviation undefined")]
    DegenerateReference,

    #[error("no reference provisioned for RIS config {0}")]
    UnknownConfig(String),

    #[error("temporal standard deviation needs at least 2 snapshots, got {got}")]
    InsufficientSnapshots { got: usize },

    #[error("attack guess pool is empty")]
    EmptyGuessPool,

    #[error("ExactConfig strategy needs the true config leaked by the harness")]
    MissingLeakedConfig,

    #[error("scene has no fan rotor but the operation requires one")]
    MissingFan,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Malformed(String),
}
