//! Signal-injection compensation attacker.
//!
//! The attacker knows the reference channel and can observe tamper
//! imprints inside a replica of the protected enclosure, then injects the
//! negative of an imprint estimate directly into the receiver (unity
//! injection channel, the pessimistic assumption). What the attacker does
//! not know is the secret RIS configuration, so three knowledge levels are
//! modeled: the leaked-configuration baseline, a uniform random guess from
//! a pool, and the average imprint over a pool.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{CalibrationSpec, Metric};
use crate::error::{Error, Result};
use crate::grid::{BandSelection, ChannelResponse, FrequencyGrid};
use crate::ris::RisConfig;
use crate::scene::{Enclosure, NoiseSpec, TamperSpec};
use crate::seed::{self, tags};
use crate::synth::{imprint, synthesize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackStrategy {
    /// The true configuration is leaked to the attacker; models the
    /// no-configuration-secrecy baseline. Only legal in harnesses that
    /// explicitly pass the leak.
    ExactConfig,
    /// Uniform draw from the guess pool, one guess per hole.
    RandomGuess,
    /// Complex mean of the replica imprints over the guess pool.
    AverageImprint,
}

/// Attacker state: strategy, replica scene, configuration guess pool, and
/// the seed for random guesses. The injection channel is fixed at unity.
#[derive(Clone, Debug)]
pub struct AttackPlan {
    pub strategy: AttackStrategy,
    pub replica: Enclosure,
    pub guess_pool: Vec<RisConfig>,
    pub seed: u64,
}

impl AttackPlan {
    pub fn new(
        strategy: AttackStrategy,
        replica: Enclosure,
        guess_pool: Vec<RisConfig>,
        seed: u64,
    ) -> Self {
        Self {
            strategy,
            replica,
            guess_pool,
            seed,
        }
    }

    /// False when the replica's tamper imprint cannot depend on the RIS
    /// configuration (coupling off or no RIS), in which case all
    /// strategies collapse and the configuration secrecy defends nothing.
    /// Runners surface this as a warning.
    pub fn replica_coupling_enabled(&self) -> bool {
        self.replica.second_order_coupling != 0.0 && !self.replica.ris.is_empty()
    }
}

/// Noiseless tamper imprint observed on the attacker's replica for a
/// guessed configuration.
pub fn replica_imprint(
    plan: &AttackPlan,
    grid: &FrequencyGrid,
    tamper: &TamperSpec,
    config_guess: &RisConfig,
) -> Result<ChannelResponse> {
    imprint(&plan.replica, grid, config_guess, tamper, 0.0)
}

/// The injected spectrum: the negative of the attacker's imprint estimate.
///
/// `leaked` carries the true configuration and is required (and only
/// meaningful) for [`AttackStrategy::ExactConfig`].
pub fn compensation_spectrum(
    plan: &AttackPlan,
    grid: &FrequencyGrid,
    tamper: &TamperSpec,
    leaked: Option<&RisConfig>,
) -> Result<ChannelResponse> {
    match plan.strategy {
        AttackStrategy::ExactConfig => {
            let config = leaked.ok_or(Error::MissingLeakedConfig)?;
            Ok(replica_imprint(plan, grid, tamper, config)?.scale(Complex64::new(-1.0, 0.0)))
        }
        AttackStrategy::RandomGuess => {
            if plan.guess_pool.is_empty() {
                return Err(Error::EmptyGuessPool);
            }
            let draw = seed::derive2(
                seed::derive(plan.seed, tags::ATTACK),
                tamper.hole_index as u64,
                0,
            );
            let guess = &plan.guess_pool[(draw % plan.guess_pool.len() as u64) as usize];
            Ok(replica_imprint(plan, grid, tamper, guess)?.scale(Complex64::new(-1.0, 0.0)))
        }
        AttackStrategy::AverageImprint => {
            if plan.guess_pool.is_empty() {
                return Err(Error::EmptyGuessPool);
            }
            let mut mean = ChannelResponse::zeros(*grid);
            for guess in &plan.guess_pool {
                mean = mean.add(&replica_imprint(plan, grid, tamper, guess)?)?;
            }
            let scale = -1.0 / plan.guess_pool.len() as f64;
            Ok(mean.scale(Complex64::new(scale, 0.0)))
        }
    }
}

/// Measurement seen by the ATR receiver under attack: the honest synthesis
/// plus the injected compensation (additive by construction).
#[allow(clippy::too_many_arguments)]
pub fn attacked_measurement(
    enclosure: &Enclosure,
    grid: &FrequencyGrid,
    true_config: &RisConfig,
    tamper: &TamperSpec,
    plan: &AttackPlan,
    time_s: f64,
    noise: &NoiseSpec,
) -> Result<ChannelResponse> {
    let honest = synthesize(enclosure, grid, true_config, Some(tamper), time_s, noise)?;
    let leaked = match plan.strategy {
        AttackStrategy::ExactConfig => Some(true_config),
        _ => None,
    };
    let comp = compensation_spectrum(plan, grid, tamper, leaked)?;
    honest.add(&comp)
}

/// Axis of an attack sweep.
#[derive(Clone, Debug)]
pub enum AttackAxis {
    Bandwidths { fc_hz: f64, bandwidths_hz: Vec<f64> },
    CenterFrequencies { bandwidth_hz: f64, fcs_hz: Vec<f64> },
}

impl AttackAxis {
    fn points(&self) -> Vec<(f64, f64)> {
        match self {
            AttackAxis::Bandwidths { fc_hz, bandwidths_hz } => {
                bandwidths_hz.iter().map(|&bw| (*fc_hz, bw)).collect()
            }
            AttackAxis::CenterFrequencies { bandwidth_hz, fcs_hz } => {
                fcs_hz.iter().map(|&fc| (fc, *bandwidth_hz)).collect()
            }
        }
    }
}

/// Trial axes for attack evaluation.
#[derive(Clone, Debug)]
pub struct AttackTrialSpec {
    pub holes: Vec<usize>,
    pub depth_m: f64,
    pub noise: NoiseSpec,
    pub t_start_s: f64,
    pub time_window_s: f64,
}

/// One attacked trial; `distance_honest` is the same tampered measurement
/// without the injected compensation.
#[derive(Clone, Debug, Serialize)]
pub struct AttackTrialRow {
    pub strategy: AttackStrategy,
    pub fc_hz: f64,
    pub bw_hz: f64,
    pub hole_index: usize,
    pub config_index: usize,
    pub distance_honest: f64,
    pub distance_attacked: f64,
    pub threshold: f64,
    pub evaded: bool,
}

/// Aggregate for one axis point.
#[derive(Clone, Debug, Serialize)]
pub struct AttackSweepPoint {
    pub fc_hz: f64,
    pub bw_hz: f64,
    pub threshold: f64,
    /// Fraction of attacked-tampered trials that evade detection.
    pub fnr_attacked: f64,
    /// Fraction of honest-tampered trials that would have been missed
    /// anyway.
    pub fnr_honest: f64,
    pub rows: Vec<AttackTrialRow>,
}

/// FNR of tampered-and-compensated trials across an axis of bands.
///
/// Wideband measurements are synthesized once per trial and narrowband
/// segments are extracted per axis point; thresholds are re-calibrated per
/// point from shared wideband calibration snapshots. `metric: None`
/// applies the per-bandwidth policy.
#[allow(clippy::too_many_arguments)]
pub fn attack_fnr_sweep(
    enclosure: &Enclosure,
    grid: &FrequencyGrid,
    secret_configs: &[RisConfig],
    metric: Option<Metric>,
    calibration: &CalibrationSpec,
    plan: &AttackPlan,
    axis: &AttackAxis,
    trials: &AttackTrialSpec,
) -> Result<Vec<AttackSweepPoint>> {
    if secret_configs.is_empty() {
        return Err(Error::Parameter("sweep needs at least one secret config".into()));
    }
    if trials.holes.is_empty() {
        return Err(Error::Parameter("sweep needs at least one hole".into()));
    }
    let scene = if calibration.fan_on {
        enclosure.clone()
    } else {
        enclosure.fan_disabled()
    };
    let cal_seed = seed::derive(calibration.noise.seed, tags::CALIBRATION);

    // Wideband calibration set, shared across axis points.
    let calib: Vec<(ChannelResponse, Vec<ChannelResponse>)> = secret_configs
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
            let snapshots = (1..=calibration.snapshots)
                .map(|k| {
                    synthesize(
                        &scene,
                        grid,
                        config,
                        None,
                        calibration.t_start_s + k as f64 * calibration.t_step_s,
                        &calibration
                            .noise
                            .with_seed(seed::derive2(cal_seed, i as u64, k as u64)),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((reference, snapshots))
        })
        .collect::<Result<_>>()?;

    // Wideband honest tampered measurements and compensation spectra.
    let attack_seed = seed::derive(trials.noise.seed, tags::ATTACK);
    struct HoleData {
        hole: usize,
        tamper: TamperSpec,
        honest: Vec<ChannelResponse>,
        comp_shared: Option<ChannelResponse>,
        comp_exact: Vec<Option<ChannelResponse>>,
    }
    let holes: Vec<HoleData> = trials
        .holes
        .par_iter()
        .map(|&hole| -> Result<HoleData> {
            let tamper = scene.tamper(hole, trials.depth_m)?;
            let honest = secret_configs
                .iter()
                .map(|config| {
                    let trial_seed =
                        seed::derive2(attack_seed, hole as u64, seed::fingerprint_bits(config.bits()));
                    let time = trials.t_start_s
                        + seed::unit_f64(seed::derive(trial_seed, tags::TRIAL_TIME))
                            * trials.time_window_s;
                    synthesize(
                        &scene,
                        grid,
                        config,
                        Some(&tamper),
                        time,
                        &trials.noise.with_seed(seed::derive(trial_seed, 2)),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let (comp_shared, comp_exact) = match plan.strategy {
                AttackStrategy::ExactConfig => {
                    let per_config = secret_configs
                        .iter()
                        .map(|config| {
                            compensation_spectrum(plan, grid, &tamper, Some(config)).map(Some)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    (None, per_config)
                }
                _ => {
                    let shared = compensation_spectrum(plan, grid, &tamper, None)?;
                    (Some(shared), vec![None; secret_configs.len()])
                }
            };
            Ok(HoleData {
                hole,
                tamper,
                honest,
                comp_shared,
                comp_exact,
            })
        })
        .collect::<Result<_>>()?;

    // Per axis point: threshold from calibration segments, then verdicts.
    axis.points()
        .into_iter()
        .map(|(fc_hz, bw_hz)| -> Result<AttackSweepPoint> {
            let band = BandSelection::new(fc_hz, bw_hz)?;
            let point_metric = metric.unwrap_or_else(|| Metric::for_bandwidth(bw_hz));
            let mut ref_bands = Vec::with_capacity(calib.len());
            let mut max_cal = 0.0f64;
            for (reference, snapshots) in &calib {
                let ref_band = reference.extract_band(&band)?;
                for snapshot in snapshots {
                    let d = point_metric.distance(&snapshot.extract_band(&band)?, &ref_band)?;
                    max_cal = max_cal.max(d);
                }
                ref_bands.push(ref_band);
            }
            let threshold = max_cal * calibration.margin;

            let mut rows = Vec::with_capacity(holes.len() * secret_configs.len());
            for hd in &holes {
                let _ = &hd.tamper;
                for (ci, _) in secret_configs.iter().enumerate() {
                    let honest = &hd.honest[ci];
                    let comp = hd.comp_exact[ci]
                        .as_ref()
                        .or(hd.comp_shared.as_ref())
                        .expect("compensation prepared per strategy");
                    let attacked = honest.add(comp)?;
                    let d_honest =
                        point_metric.distance(&honest.extract_band(&band)?, &ref_bands[ci])?;
                    let d_attacked =
                        point_metric.distance(&attacked.extract_band(&band)?, &ref_bands[ci])?;
                    rows.push(AttackTrialRow {
                        strategy: plan.strategy,
                        fc_hz,
                        bw_hz,
                        hole_index: hd.hole,
                        config_index: ci,
                        distance_honest: d_honest,
                        distance_attacked: d_attacked,
                        threshold,
                        evaded: d_attacked <= threshold,
                    });
                }
            }
            let n = rows.len() as f64;
            let fnr_attacked = rows.iter().filter(|r| r.evaded).count() as f64 / n;
            let fnr_honest =
                rows.iter().filter(|r| r.distance_honest <= threshold).count() as f64 / n;
            Ok(AttackSweepPoint {
                fc_hz,
                bw_hz,
                threshold,
                fnr_attacked,
                fnr_honest,
                rows,
            })
        })
        .collect()
}

/// Convenience: references per config as a map, for building profiles from
/// sweep data.
pub fn reference_map(
    configs: &[RisConfig],
    references: Vec<ChannelResponse>,
) -> BTreeMap<RisConfig, ChannelResponse> {
    configs.iter().cloned().zip(references).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SceneSpec;

    fn scene() -> (Enclosure, FrequencyGrid) {
        let spec = SceneSpec {
            seed: 11,
            holes: crate::scene::HoleGridSpec {
                rows: 2,
                cols: 2,
                margin_m: 0.08,
            },
            ..SceneSpec::default()
        };
        (
            crate::scene::build_scene(&spec).unwrap(),
            FrequencyGrid::new(4.5e9, 5.0e6, 241).unwrap(),
        )
    }

    #[test]
    fn perfect_replica_reproduces_true_imprint() {
        let (enclosure, grid) = scene();
        let tamper = enclosure.tamper(1, 0.02).unwrap();
        let config = crate::optimizer::random_configs(1, 64, 5).pop().unwrap();
        let plan = AttackPlan::new(
            AttackStrategy::ExactConfig,
            enclosure.clone(),
            vec![],
            0,
        );
        let from_replica = replica_imprint(&plan, &grid, &tamper, &config).unwrap();
        let truth = imprint(&enclosure, &grid, &config, &tamper, 0.0).unwrap();
        assert_eq!(from_replica.samples(), truth.samples());
    }

    #[test]
    fn replica_imprint_zero_depth_is_zero() {
        let (enclosure, grid) = scene();
        let tamper = enclosure.tamper(0, 0.0).unwrap();
        let plan = AttackPlan::new(AttackStrategy::ExactConfig, enclosure, vec![], 0);
        let imp = replica_imprint(&plan, &grid, &tamper, &RisConfig::zeros(64)).unwrap();
        assert_eq!(imp.max_magnitude(), 0.0);
    }

    #[test]
    fn distinct_guesses_differ_in_band_when_coupled() {
        let (enclosure, grid) = scene();
        assert!(enclosure.second_order_coupling > 0.0);
        let tamper = enclosure.tamper(2, 0.02).unwrap();
        let configs = crate::optimizer::random_configs(2, 64, 8);
        let plan = AttackPlan::new(AttackStrategy::ExactConfig, enclosure, vec![], 0);
        let a = replica_imprint(&plan, &grid, &tamper, &configs[0]).unwrap();
        let b = replica_imprint(&plan, &grid, &tamper, &configs[1]).unwrap();
        let diff = a.sub(&b).unwrap().max_magnitude();
        assert!(diff > 0.0, "coupled imprints must depend on the guess");
    }

    #[test]
    fn exact_config_cancels_to_untampered() {
        let (enclosure, grid) = scene();
        let tamper = enclosure.tamper(0, 0.02).unwrap();
        let config = crate::optimizer::random_configs(1, 64, 3).pop().unwrap();
        let plan = AttackPlan::new(
            AttackStrategy::ExactConfig,
            enclosure.clone(),
            vec![],
            0,
        );
        let attacked = attacked_measurement(
            &enclosure,
            &grid,
            &config,
            &tamper,
            &plan,
            0.0,
            &NoiseSpec::none(),
        )
        .unwrap();
        let untampered =
            synthesize(&enclosure, &grid, &config, None, 0.0, &NoiseSpec::none()).unwrap();
        let err = attacked.sub(&untampered).unwrap().max_magnitude();
        let scale = untampered.max_magnitude();
        assert!(err < 1e-12 * scale, "residual {err} vs scale {scale}");
    }

    #[test]
    fn exact_config_requires_leak() {
        let (enclosure, grid) = scene();
        let tamper = enclosure.tamper(0, 0.02).unwrap();
        let plan = AttackPlan::new(AttackStrategy::ExactConfig, enclosure, vec![], 0);
        assert!(matches!(
            compensation_spectrum(&plan, &grid, &tamper, None),
            Err(Error::MissingLeakedConfig)
        ));
    }

    #[test]
    fn average_of_duplicate_pool_equals_random_guess() {
        let (enclosure, grid) = scene();
        let tamper = enclosure.tamper(1, 0.02).unwrap();
        let c = crate::optimizer::random_configs(1, 64, 17).pop().unwrap();
        let avg_plan = AttackPlan::new(
            AttackStrategy::AverageImprint,
            enclosure.clone(),
            vec![c.clone(), c.clone()],
            0,
        );
        let guess_plan = AttackPlan::new(AttackStrategy::RandomGuess, enclosure, vec![c], 0);
        let avg = compensation_spectrum(&avg_plan, &grid, &tamper, None).unwrap();
        let guess = compensation_spectrum(&guess_plan, &grid, &tamper, None).unwrap();
        let diff = avg.sub(&guess).unwrap().max_magnitude();
        assert!(diff < 1e-15 * avg.max_magnitude().max(1e-300));
    }

    #[test]
    fn empty_pool_is_rejected() {
        let (enclosure, grid) = scene();
        let tamper = enclosure.tamper(0, 0.02).unwrap();
        for strategy in [AttackStrategy::RandomGuess, AttackStrategy::AverageImprint] {
            let plan = AttackPlan::new(strategy, enclosure.clone(), vec![], 0);
            assert!(matches!(
                compensation_spectrum(&plan, &grid, &tamper, None),
                Err(Error::EmptyGuessPool)
            ));
        }
    }

    #[test]
    fn complement_pair_average_recovers_uncoupled_imprint() {
        let (enclosure, grid) = scene();
        let tamper = enclosure.tamper(3, 0.02).unwrap();
        let c = crate::optimizer::random_configs(1, 64, 23).pop().unwrap();
        let plan = AttackPlan::new(
            AttackStrategy::AverageImprint,
            enclosure.clone(),
            vec![c.clone(), c.complement()],
            0,
        );
        let comp = compensation_spectrum(&plan, &grid, &tamper, None).unwrap();
        let mean_imprint = comp.scale(Complex64::new(-1.0, 0.0));
        let uncoupled =
            imprint(&enclosure.with_coupling(0.0), &grid, &c, &tamper, 0.0).unwrap();
        let err = mean_imprint.sub(&uncoupled).unwrap().max_magnitude();
        let scale = uncoupled.max_magnitude();
        assert!(err < 1e-10 * scale, "residual {err} vs scale {scale}");
    }

    #[test]
    fn strategies_collapse_without_coupling() {
        let (enclosure, grid) = scene();
        let uncoupled = enclosure.with_coupling(0.0);
        let tamper = uncoupled.tamper(0, 0.02).unwrap();
        let pool = crate::optimizer::random_configs(4, 64, 31);
        let true_config = crate::optimizer::random_configs(1, 64, 77).pop().unwrap();

        let exact = AttackPlan::new(
            AttackStrategy::ExactConfig,
            uncoupled.clone(),
            vec![],
            0,
        );
        let avg = AttackPlan::new(
            AttackStrategy::AverageImprint,
            uncoupled.clone(),
            pool.clone(),
            0,
        );
        let guess = AttackPlan::new(AttackStrategy::RandomGuess, uncoupled.clone(), pool, 0);
        assert!(!avg.replica_coupling_enabled());

        let c_exact = compensation_spectrum(&exact, &grid, &tamper, Some(&true_config)).unwrap();
        let c_avg = compensation_spectrum(&avg, &grid, &tamper, None).unwrap();
        let c_guess = compensation_spectrum(&guess, &grid, &tamper, None).unwrap();
        let scale = c_exact.max_magnitude();
        assert!(c_exact.sub(&c_avg).unwrap().max_magnitude() < 1e-12 * scale);
        assert!(c_exact.sub(&c_guess).unwrap().max_magnitude() < 1e-12 * scale);
    }

    #[test]
    fn attack_is_additive_by_construction() {
        let (enclosure, grid) = scene();
        let tamper = enclosure.tamper(2, 0.02).unwrap();
        let config = crate::optimizer::random_configs(1, 64, 41).pop().unwrap();
        let pool = crate::optimizer::random_configs(3, 64, 43);
        let plan = AttackPlan::new(
            AttackStrategy::AverageImprint,
            enclosure.clone(),
            pool,
            9,
        );
        let noise = NoiseSpec::new(40.0, 50);
        let attacked = attacked_measurement(
            &enclosure, &grid, &config, &tamper, &plan, 0.25, &noise,
        )
        .unwrap();
        let honest =
            synthesize(&enclosure, &grid, &config, Some(&tamper), 0.25, &noise).unwrap();
        let comp = compensation_spectrum(&plan, &grid, &tamper, None).unwrap();
        assert_eq!(attacked.samples(), honest.add(&comp).unwrap().samples());
    }
}
