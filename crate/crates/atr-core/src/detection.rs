//! Tamper decision pipeline: distance metrics, per-configuration
//! reference provisioning, zero-false-alarm threshold calibration,
//! verdicts, and FNR/FPR evaluation.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BandSelection, ChannelResponse, FrequencyGrid};
use crate::ris::RisConfig;
use crate::scene::{Enclosure, NoiseSpec};
use crate::seed::{self, tags};
use crate::synth::synthesize;

/// Distance metric between a measurement and a reference, both compared
/// on their magnitude vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Mnd,
}

impl Metric {
    pub fn distance(&self, measurement: &ChannelResponse, reference: &ChannelResponse) -> Result<f64> {
        match self {
            Metric::Euclidean => euclidean_distance(measurement, reference),
            Metric::Mnd => mnd(measurement, reference),
        }
    }

    /// Default policy: MND for wideband comparisons (>= 1 GHz), Euclidean
    /// for narrowband ones.
    pub fn for_bandwidth(bandwidth_hz: f64) -> Metric {
        if bandwidth_hz >= 1.0e9 {
            Metric::Mnd
        } else {
            Metric::Euclidean
        }
    }

    /// Formula recorded in output metadata.
    pub fn formula(&self) -> &'static str {
        match self {
            Metric::Euclidean => "sqrt(sum_f (|H(f)| - |H_R(f)|)^2)",
            Metric::Mnd => {
                "mean_f( ||H(f)| - |H_R(f)|| / (|H_R(f)| + eps) ), eps = 1e-12 * max_f |H_R(f)|"
            }
        }
    }
}

/// L2 norm of the difference of magnitude vectors.
pub fn euclidean_distance(a: &ChannelResponse, b: &ChannelResponse) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid(), b.grid())));
    }
    let sum: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| {
            let d = x.norm() - y.norm();
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Mean normalized deviation: mean over bins of
/// `||H| - |H_R|| / (|H_R| + eps)` with `eps = 1e-12 * max |H_R|`.
pub fn mnd(measurement: &ChannelResponse, reference: &ChannelResponse) -> Result<f64> {
    if measurement.grid() != reference.grid() {
        return Err(Error::GridMismatch(format!(
            "{:?} vs {:?}",
            measurement.grid(),
            reference.grid()
        )));
    }
    let max_ref = reference.max_magnitude();
    if max_ref == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let eps = 1e-12 * max_ref;
    let sum: f64 = measurement
        .samples()
        .iter()
        .zip(reference.samples())
        .map(|(m, r)| {
            let rm = r.norm();
            (m.norm() - rm).abs() / (rm + eps)
        })
        .sum();
    Ok(sum / measurement.samples().len() as f64)
}

/// How calibration snapshots are collected during provisioning.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CalibrationSpec {
    /// Untampered snapshots per configuration beyond the reference.
    pub snapshots: usize,
    pub noise: NoiseSpec,
    pub fan_on: bool,
    pub t_start_s: f64,
    pub t_step_s: f64,
    /// Threshold multiplier applied to the calibration maximum.
    pub margin: f64,
}

impl CalibrationSpec {
    pub fn new(snapshots: usize, noise: NoiseSpec, fan_on: bool) -> Self {
        Self {
            snapshots,
            noise,
            fan_on,
            t_start_s: 0.0,
            t_step_s: 5.0e-4,
            margin: 1.0,
        }
    }
}

/// Where a profile's threshold came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileProvenance {
    pub calibration: CalibrationSpec,
    pub max_calibration_distance: f64,
    pub metric_formula: String,
}

/// Reference responses per RIS configuration plus the calibrated
/// threshold. Immutable after provisioning; verdicts always consult the
/// reference matching the measurement's configuration.
#[derive(Clone, Debug)]
pub struct DetectionProfile {
    references: BTreeMap<RisConfig, ChannelResponse>,
    pub band: BandSelection,
    pub metric: Metric,
    pub threshold: f64,
    pub provenance: ProfileProvenance,
}

impl DetectionProfile {
    /// Assembles a profile from pre-collected parts; used by runners that
    /// share wideband measurements across several bands and by profile
    /// deserialization.
    pub fn from_parts(
        references: BTreeMap<RisConfig, ChannelResponse>,
        band: BandSelection,
        metric: Metric,
        threshold: f64,
        provenance: ProfileProvenance,
    ) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::Parameter("profile needs at least one reference".into()));
        }
        if !threshold.is_finite() || threshold < 0.0 {
            return Err(Error::Parameter(format!("bad threshold {threshold}")));
        }
        Ok(Self {
            references,
            band,
            metric,
            threshold,
            provenance,
        })
    }

    pub fn reference(&self, config: &RisConfig) -> Result<&ChannelResponse> {
        self.references
            .get(config)
            .ok_or_else(|| Error::UnknownConfig(config.to_bit_string()))
    }

    pub fn configs(&self) -> impl Iterator<Item = &RisConfig> {
        self.references.keys()
    }

    pub fn references(&self) -> &BTreeMap<RisConfig, ChannelResponse> {
        &self.references
    }
}

/// Tamper verdict; `tampered` iff `distance > threshold` (strict, so the
/// calibration set itself can never alarm).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Verdict {
    pub distance: f64,
    pub threshold: f64,
    pub tampered: bool,
}

fn verdict(distance: f64, threshold: f64) -> Verdict {
    Verdict {
        distance,
        threshold,
        tampered: distance > threshold,
    }
}

/// Records a reference per configuration, collects calibration snapshots,
/// and sets the threshold to the maximum in-band calibration distance over
/// all configurations and snapshots, times `margin`.
pub fn provision(
    enclosure: &Enclosure,
    grid: &FrequencyGrid,
    configs: &[RisConfig],
    band: BandSelection,
    metric: Metric,
    calibration: &CalibrationSpec,
) -> Result<DetectionProfile> {
    if configs.is_empty() {
        return Err(Error::Parameter("provision needs at least one config".into()));
    }
    let distinct: BTreeSet<&RisConfig> = configs.iter().collect();
    if distinct.len() != configs.len() {
        return Err(Error::Parameter("provision configs must be distinct".into()));
    }
    let scene = if calibration.fan_on {
        enclosure.clone()
    } else {
        enclosure.fan_disabled()
    };
    let cal_seed = seed::derive(calibration.noise.seed, tags::CALIBRATION);

    let per_config: Vec<(RisConfig, ChannelResponse, f64)> = configs
        .par_iter()
        .enumerate()
        .map(|(i, config)| -> Result<_> {
            let reference = synthesize(
                &scene,
                grid,
                config,
                None,
                calibration.t_start_s,
                &calibration.noise.with_seed(seed::derive2(cal_seed, i as u64, 0)),
            )?;
            let ref_band = reference.extract_band(&band)?;
            let mut max_distance: f64 = 0.0;
            for k in 1..=calibration.snapshots {
                let snapshot = synthesize(
                    &scene,
                    grid,
                    config,
                    None,
                    calibration.t_start_s + k as f64 * calibration.t_step_s,
                    &calibration
                        .noise
                        .with_seed(seed::derive2(cal_seed, i as u64, k as u64)),
                )?;
                let d = metric.distance(&snapshot.extract_band(&band)?, &ref_band)?;
                max_distance = max_distance.max(d);
            }
            Ok((config.clone(), reference, max_distance))
        })
        .collect::<Result<_>>()?;

    let max_calibration_distance = per_config.iter().map(|(_, _, d)| *d).fold(0.0, f64::max);
    let references = per_config
        .into_iter()
        .map(|(c, r, _)| (c, r))
        .collect::<BTreeMap<_, _>>();

    DetectionProfile::from_parts(
        references,
        band,
        metric,
        max_calibration_distance * calibration.margin,
        ProfileProvenance {
            calibration: *calibration,
            max_calibration_distance,
            metric_formula: metric.formula().to_string(),
        },
    )
}

/// Compares a measurement to the stored reference for its configuration,
/// in-band, and issues a verdict.
pub fn detect(
    profile: &DetectionProfile,
    measurement: &ChannelResponse,
    config: &RisConfig,
) -> Result<Verdict> {
    let reference = profile.reference(config)?;
    let m = measurement.extract_band(&profile.band)?;
    let r = reference.extract_band(&profile.band)?;
    let distance = profile.metric.distance(&m, &r)?;
    Ok(verdict(distance, profile.threshold))
}

/// Trial axes for paired untampered/tampered evaluation.
#[derive(Clone, Debug)]
pub struct TrialSpec {
    pub holes: Vec<usize>,
    pub depth_m: f64,
    pub configs: Vec<RisConfig>,
    pub noise: NoiseSpec,
    pub fan_on: bool,
    pub t_start_s: f64,
    /// Trial times are drawn uniformly from
    /// `[t_start, t_start + time_window]`, addressed by hole and config
    /// content so results are independent of trial ordering.
    pub time_window_s: f64,
}

/// Per-hole false negative fraction, for spatial maps.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HoleFnr {
    pub hole_index: usize,
    pub fnr: f64,
}

/// Aggregated confusion counts and rates.
#[derive(Clone, Debug, Serialize)]
pub struct ConfusionReport {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
    pub fpr: f64,
    pub fnr: f64,
    pub balanced_accuracy: f64,
    pub per_hole_fnr: Vec<HoleFnr>,
}

impl ConfusionReport {
    fn from_outcomes(outcomes: &[(usize, bool, bool)], holes: &[usize]) -> Self {
        let mut tp = 0u64;
        let mut fp = 0u64;
        let mut tn = 0u64;
        let mut fn_ = 0u64;
        for &(_, untampered_alarm, tampered_alarm) in outcomes {
            if untampered_alarm {
                fp += 1;
            } else {
                tn += 1;
            }
            if tampered_alarm {
                tp += 1;
            } else {
                fn_ += 1;
            }
        }
        let fpr = fp as f64 / (fp + tn) as f64;
        let fnr = fn_ as f64 / (fn_ + tp) as f64;
        let per_hole_fnr = holes
            .iter()
            .map(|&h| {
                let (misses, total) = outcomes
                    .iter()
                    .filter(|(hole, _, _)| *hole == h)
                    .fold((0u64, 0u64), |(m, t), (_, _, alarm)| {
                        (m + (!alarm) as u64, t + 1)
                    });
                HoleFnr {
                    hole_index: h,
                    fnr: misses as f64 / total as f64,
                }
            })
            .collect();
        ConfusionReport {
            tp,
            fp,
            tn,
            fn_,
            fpr,
            fnr,
            balanced_accuracy: 1.0 - (fpr + fnr) / 2.0,
            per_hole_fnr,
        }
    }
}

/// Runs paired untampered/tampered measurements per `(hole, config)`,
/// applies [`detect`], and aggregates counts. Counts are invariant under
/// reordering of the trial axes because per-trial randomness is derived
/// from hole ids and config contents.
pub fn evaluate(
    enclosure: &Enclosure,
    grid: &FrequencyGrid,
    profile: &DetectionProfile,
    trials: &TrialSpec,
) -> Result<ConfusionReport> {
    if trials.holes.is_empty() || trials.configs.is_empty() {
        return Err(Error::Parameter("evaluate needs non-empty trial axes".into()));
    }
    let scene = if trials.fan_on {
        enclosure.clone()
    } else {
        enclosure.fan_disabled()
    };
    let eval_seed = seed::derive(trials.noise.seed, tags::EVAL);

    let pairs: Vec<(usize, &RisConfig)> = trials
        .holes
        .iter()
        .flat_map(|&h| trials.configs.iter().map(move |c| (h, c)))
        .collect();

    let outcomes: Vec<(usize, bool, bool)> = pairs
        .par_iter()
        .map(|&(hole, config)| -> Result<(usize, bool, bool)> {
            let trial_seed = seed::derive2(eval_seed, hole as u64, seed::fingerprint_bits(config.bits()));
            let time = trials.t_start_s
                + seed::unit_f64(seed::derive(trial_seed, tags::TRIAL_TIME)) * trials.time_window_s;

            let untampered = synthesize(
                &scene,
                grid,
                config,
                None,
                time,
                &trials.noise.with_seed(seed::derive(trial_seed, 1)),
            )?;
            let v_untampered = detect(profile, &untampered, config)?;

            let tamper = scene.tamper(hole, trials.depth_m)?;
            let tampered = synthesize(
                &scene,
                grid,
                config,
                Some(&tamper),
                time,
                &trials.noise.with_seed(seed::derive(trial_seed, 2)),
            )?;
            let v_tampered = detect(profile, &tampered, config)?;

            Ok((hole, v_untampered.tampered, v_tampered.tampered))
        })
        .collect::<Result<_>>()?;

    Ok(ConfusionReport::from_outcomes(&outcomes, &trials.holes))
}
