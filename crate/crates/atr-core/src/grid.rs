//! Frequency grids, complex channel responses, and band extraction.
//!
//! A [`ChannelResponse`] holds complex channel gain samples on a uniform
//! [`FrequencyGrid`]; every measured, synthesized, or derived spectrum in
//! the crate (references, drifts, imprints, noise, compensated responses)
//! lives in this type. Values are Cartesian `f64` pairs: imprint
//! extraction subtracts near-equal responses, which is precision-sensitive.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform frequency grid: `f_k = f_start + k * f_step` for `k < n_points`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    f_start_hz: f64,
    f_step_hz: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub fn new(f_start_hz: f64, f_step_hz: f64, n_points: usize) -> Result<Self> {
        if !f_start_hz.is_finite() || !f_step_hz.is_finite() {
            return Err(Error::Parameter("grid frequencies must be finite".into()));
        }
        if f_step_hz <= 0.0 {
            return Err(Error::Parameter(format!(
                "f_step must be positive, got {f_step_hz}"
            )));
        }
        if n_points == 0 {
            return Err(Error::Parameter("grid needs at least one point".into()));
        }
        Ok(Self {
            f_start_hz,
            f_step_hz,
            n_points,
        })
    }

    /// Instrument-style default: 3–10 GHz in 1 MHz steps (7000 points).
    pub fn wideband_default() -> Self {
        Self {
            f_start_hz: 3.0e9,
            f_step_hz: 1.0e6,
            n_points: 7000,
        }
    }

    pub fn f_start_hz(&self) -> f64 {
        self.f_start_hz
    }

    pub fn f_step_hz(&self) -> f64 {
        self.f_step_hz
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn frequency_hz(&self, k: usize) -> f64 {
        self.f_start_hz + k as f64 * self.f_step_hz
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.frequency_hz(k))
    }

    /// First and last grid frequency.
    pub fn span_hz(&self) -> (f64, f64) {
        (self.frequency_hz(0), self.frequency_hz(self.n_points - 1))
    }

    /// `f_step * (n_points - 1)`.
    pub fn total_bandwidth_hz(&self) -> f64 {
        self.f_step_hz * (self.n_points - 1) as f64
    }

    /// Index range of grid points inside `band`.
    ///
    /// Membership widens the closed band interval by half a grid step with
    /// strict comparisons, so bands whose edges land exactly on grid
    /// points keep those points and bin counts stay deterministic across
    /// platforms. The same half-step tolerance applies to the span check.
    pub fn band_indices(&self, band: &BandSelection) -> Result<std::ops::Range<usize>> {
        let (lo, hi) = band.edges_hz();
        let (span_lo, span_hi) = self.span_hz();
        let tol = self.f_step_hz / 2.0;
        if lo < span_lo - tol || hi > span_hi + tol {
            return Err(Error::BandOutOfRange {
                lo_hz: lo,
                hi_hz: hi,
                span_lo_hz: span_lo,
                span_hi_hz: span_hi,
            });
        }
        let mut first = None;
        let mut last = None;
        for k in 0..self.n_points {
            let f = self.frequency_hz(k);
            if f > lo - tol && f < hi + tol {
                if first.is_none() {
                    first = Some(k);
                }
                last = Some(k);
            }
        }
        match (first, last) {
            (Some(a), Some(b)) => Ok(a..b + 1),
            _ => Err(Error::EmptyBand { lo_hz: lo, hi_hz: hi }),
        }
    }

    /// Sub-grid covering exactly the points `band_indices` selects.
    pub fn band_subgrid(&self, band: &BandSelection) -> Result<FrequencyGrid> {
        let range = self.band_indices(band)?;
        FrequencyGrid::new(
            self.frequency_hz(range.start),
            self.f_step_hz,
            range.len(),
        )
    }

    fn require_same(&self, other: &FrequencyGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self, other
            )));
        }
        Ok(())
    }
}

/// A contiguous sub-band of a parent grid, `center ± bandwidth / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSelection {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
}

impl BandSelection {
    pub fn new(center_hz: f64, bandwidth_hz: f64) -> Result<Self> {
        if !center_hz.is_finite() || !bandwidth_hz.is_finite() || bandwidth_hz < 0.0 {
            return Err(Error::Parameter(format!(
                "invalid band: center {center_hz} Hz, bandwidth {bandwidth_hz} Hz"
            )));
        }
        Ok(Self {
            center_hz,
            bandwidth_hz,
        })
    }

    /// Band covering the entire grid; extraction with it is the identity.
    pub fn full_span(grid: &FrequencyGrid) -> Self {
        let (lo, hi) = grid.span_hz();
        Self {
            center_hz: (lo + hi) / 2.0,
            bandwidth_hz: hi - lo,
        }
    }

    pub fn edges_hz(&self) -> (f64, f64) {
        (
            self.center_hz - self.bandwidth_hz / 2.0,
            self.center_hz + self.bandwidth_hz / 2.0,
        )
    }
}

/// Complex channel frequency response on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelResponse {
    grid: FrequencyGrid,
    samples: Vec<Complex64>,
}

impl ChannelResponse {
    pub fn new(grid: FrequencyGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::Parameter(format!(
                "{} samples on a {}-point grid",
                samples.len(),
                grid.n_points()
            )));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::Parameter(
                "channel response contains non-finite samples".into(),
            ));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Element-wise magnitudes, same length as the sample vector.
    pub fn magnitude_vector(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm()).collect()
    }

    /// Contiguous sub-response whose frequencies fall inside `band`.
    /// The original response is unchanged.
    pub fn extract_band(&self, band: &BandSelection) -> Result<ChannelResponse> {
        let range = self.grid.band_indices(band)?;
        let sub = FrequencyGrid::new(
            self.grid.frequency_hz(range.start),
            self.grid.f_step_hz(),
            range.len(),
        )?;
        Ok(ChannelResponse {
            grid: sub,
            samples: self.samples[range].to_vec(),
        })
    }

    /// Element-wise sum; grids must match.
    pub fn add(&self, other: &ChannelResponse) -> Result<ChannelResponse> {
        self.grid.require_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ChannelResponse {
            grid: self.grid,
            samples,
        })
    }

    /// Element-wise difference; grids must match.
    pub fn sub(&self, other: &ChannelResponse) -> Result<ChannelResponse> {
        self.grid.require_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ChannelResponse {
            grid: self.grid,
            samples,
        })
    }

    pub fn scale(&self, factor: Complex64) -> ChannelResponse {
        ChannelResponse {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * factor).collect(),
        }
    }

    /// Largest sample magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Mean of squared magnitudes over the whole grid.
    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}
