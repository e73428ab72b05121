//! First-order ray superposition synthesis of the enclosure channel.
//!
//! Every propagation path contributes
//! `coeff * gamma / (prod of segment lengths) * exp(-j 2 pi f * total_length / c)`
//! per frequency bin, with `gamma = 1 m` as the unit gain reference.
//! Single-bounce paths: tx->rx line of sight, tx->scatterer->rx,
//! tx->RIS-element->rx (scaled by the element reflection coefficient and
//! the band-pass efficiency profile), tx->needle-point->rx, and
//! tx->blade-tip->rx. When `second_order_coupling` is nonzero, two-bounce
//! paths link each perturbing point (needle, blade tip) with each RIS
//! element in both directions, which is what makes the tamper imprint
//! depend on the secret RIS configuration.
//!
//! The model is linear: responses superpose exactly, and complementing the
//! RIS configuration negates the RIS-dependent part.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{ChannelResponse, FrequencyGrid};
use crate::ris::RisConfig;
use crate::scene::{Enclosure, NoiseSpec, Point3, TamperSpec};
use crate::seed::{self, tags};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Unit path gain constant (meters); absolute scale is irrelevant because
/// every detection decision is relative to references on the same scale.
pub const PATH_GAIN_M: f64 = 1.0;

/// Segments shorter than this are treated as degenerate geometry.
const MIN_SEGMENT_M: f64 = 1.0e-6;

struct Accumulator<'g> {
    grid: &'g FrequencyGrid,
    samples: Vec<Complex64>,
    /// Per-bin RIS efficiency weight and the index range where it is > 0.
    efficiency: Vec<f64>,
    support: std::ops::Range<usize>,
}

impl<'g> Accumulator<'g> {
    fn new(grid: &'g FrequencyGrid, enclosure: &Enclosure) -> Self {
        let efficiency: Vec<f64> = grid
            .frequencies()
            .map(|f| enclosure.ris.efficiency.weight(f))
            .collect();
        let first = efficiency.iter().position(|&w| w > 0.0);
        let support = match first {
            Some(a) => {
                let b = efficiency.iter().rposition(|&w| w > 0.0).unwrap();
                a..b + 1
            }
            None => 0..0,
        };
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            efficiency,
            support,
        }
    }

    fn path_phasors(&self, coeff: Complex64, segments: &[f64], k0: usize) -> Result<(Complex64, Complex64)> {
        let mut spread = 1.0;
        let mut length = 0.0;
        for &d in segments {
            if !d.is_finite() || d < MIN_SEGMENT_M {
                return Err(Error::NonFiniteGeometry(format!(
                    "path segment length {d} m"
                )));
            }
            spread *= d;
            length += d;
        }
        let tau = length / SPEED_OF_LIGHT_M_S;
        let base = coeff * (PATH_GAIN_M / spread);
        let phase0 = -2.0 * std::f64::consts::PI * self.grid.frequency_hz(k0) * tau;
        let dphase = -2.0 * std::f64::consts::PI * self.grid.f_step_hz() * tau;
        Ok((
            base * Complex64::from_polar(1.0, phase0),
            Complex64::from_polar(1.0, dphase),
        ))
    }

    /// Accumulates an unweighted path over the full grid.
    fn add_path(&mut self, coeff: Complex64, segments: &[f64]) -> Result<()> {
        let (mut z, step) = self.path_phasors(coeff, segments, 0)?;
        for s in &mut self.samples {
            *s += z;
            z *= step;
        }
        Ok(())
    }

    /// Accumulates an efficiency-weighted path; bins outside the profile
    /// support are untouched, so out-of-band samples are bitwise
    /// independent of the RIS configuration.
    fn add_weighted_path(&mut self, coeff: Complex64, segments: &[f64]) -> Result<()> {
        if self.support.is_empty() {
            return Ok(());
        }
        let k0 = self.support.start;
        let (mut z, step) = self.path_phasors(coeff, segments, k0)?;
        for k in self.support.clone() {
            self.samples[k] += self.efficiency[k] * z;
            z *= step;
        }
        Ok(())
    }

    fn finish(self, noise: &NoiseSpec) -> Vec<Complex64> {
        let mut samples = self.samples;
        if !noise.is_noiseless() {
            let mean_power =
                samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64;
            let sigma = (mean_power * 10f64.powf(-noise.snr_db / 10.0)).sqrt();
            if sigma > 0.0 {
                let scale = sigma / 2f64.sqrt();
                let mut rng = seed::rng(noise.seed);
                for s in &mut samples {
                    // Box-Muller pair: complex circular Gaussian per bin.
                    let u1: f64 = 1.0 - rng.gen::<f64>();
                    let u2: f64 = rng.gen();
                    let r = (-2.0 * u1.ln()).sqrt();
                    let theta = 2.0 * std::f64::consts::PI * u2;
                    *s += Complex64::from_polar(scale * r, theta);
                }
            }
        }
        samples
    }
}

fn dist(a: &Point3, b: &Point3) -> f64 {
    a.distance(b)
}

/// Synthesizes `H(f, t, c)` on `grid` for the given enclosure, RIS
/// configuration, optional tamper event, time, and noise level.
///
/// Same inputs (including seeds) give bitwise-identical responses.
pub fn synthesize(
    enclosure: &Enclosure,
    grid: &FrequencyGrid,
    config: &RisConfig,
    tamper: Option<&TamperSpec>,
    time_s: f64,
    noise: &NoiseSpec,
) -> Result<ChannelResponse> {
    enclosure.validate()?;
    if config.len() != enclosure.ris.len() {
        return Err(Error::ConfigLengthMismatch {
            expected: enclosure.ris.len(),
            got: config.len(),
        });
    }
    if !time_s.is_finite() {
        return Err(Error::Parameter(format!("non-finite time {time_s}")));
    }

    let mut acc = Accumulator::new(grid, enclosure);
    let tx = &enclosure.tx;
    let rx = &enclosure.rx;

    acc.add_path(Complex64::new(1.0, 0.0), &[dist(tx, rx)])?;

    for s in &enclosure.scatterers {
        acc.add_path(s.amplitude, &[dist(tx, &s.position), dist(&s.position, rx)])?;
    }

    for (l, el) in enclosure.ris.elements.iter().enumerate() {
        let coeff = el.gain * config.reflection_coefficient(l);
        acc.add_weighted_path(coeff, &[dist(tx, &el.position), dist(&el.position, rx)])?;
    }

    let needle_points = match tamper {
        Some(t) => Some((enclosure.needle_points(t)?, t.amplitude)),
        None => None,
    };
    if let Some((points, amplitude)) = &needle_points {
        for q in points {
            acc.add_path(*amplitude, &[dist(tx, q), dist(q, rx)])?;
        }
    }

    let blade_tips = enclosure
        .fan
        .as_ref()
        .map(|f| (f.blade_tips(time_s), f.blade_amplitude));
    if let Some((tips, amplitude)) = &blade_tips {
        for b in tips {
            acc.add_path(*amplitude, &[dist(tx, b), dist(b, rx)])?;
        }
    }

    let kappa = enclosure.second_order_coupling;
    if kappa != 0.0 && !enclosure.ris.is_empty() {
        let mut add_coupling = |points: &[Point3], amplitude: Complex64| -> Result<()> {
            for q in points {
                for (l, el) in enclosure.ris.elements.iter().enumerate() {
                    let coeff = amplitude * el.gain * (kappa * config.reflection_coefficient(l));
                    let p = &el.position;
                    acc.add_weighted_path(coeff, &[dist(tx, q), dist(q, p), dist(p, rx)])?;
                    acc.add_weighted_path(coeff, &[dist(tx, p), dist(p, q), dist(q, rx)])?;
                }
            }
            Ok(())
        };
        if let Some((points, amplitude)) = &needle_points {
            add_coupling(points, *amplitude)?;
        }
        if let Some((tips, amplitude)) = &blade_tips {
            add_coupling(tips, *amplitude)?;
        }
    }

    ChannelResponse::new(*grid, acc.finish(noise))
}

/// Attacker imprint: `synthesize(with tamper) - synthesize(without)`,
/// both noiseless at the same time.
pub fn imprint(
    enclosure: &Enclosure,
    grid: &FrequencyGrid,
    config: &RisConfig,
    tamper: &TamperSpec,
    time_s: f64,
) -> Result<ChannelResponse> {
    let tampered = synthesize(enclosure, grid, config, Some(tamper), time_s, &NoiseSpec::none())?;
    let untampered = synthesize(enclosure, grid, config, None, time_s, &NoiseSpec::none())?;
    tampered.sub(&untampered)
}

/// `n_snapshots` responses at `t_start + k * t_step`; the fan advances
/// with time and noise is redrawn per snapshot from a sub-seed derived
/// from `noise.seed` and `k`.
pub fn time_series(
    enclosure: &Enclosure,
    grid: &FrequencyGrid,
    config: &RisConfig,
    tamper: Option<&TamperSpec>,
    t_start_s: f64,
    t_step_s: f64,
    n_snapshots: usize,
    noise: &NoiseSpec,
) -> Result<Vec<ChannelResponse>> {
    if n_snapshots == 0 {
        return Err(Error::Parameter("n_snapshots must be at least 1".into()));
    }
    (0..n_snapshots)
        .map(|k| {
            let t = t_start_s + k as f64 * t_step_s;
            let snap_noise = noise.with_seed(seed::derive2(noise.seed, tags::SNAPSHOT, k as u64));
            synthesize(enclosure, grid, config, tamper, t, &snap_noise)
        })
        .collect()
}
