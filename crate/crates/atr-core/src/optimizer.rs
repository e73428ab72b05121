//! Greedy genetic RIS configuration search.
//!
//! The optimizer keeps a per-element marginal probability of a `1` bit,
//! samples a population from the marginals, keeps the elite fraction,
//! re-estimates the marginals from the elites (clamped so no element
//! freezes), and carries the best configuration seen so far into the next
//! candidate set. Lower cost is better.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{BandSelection, FrequencyGrid};
use crate::ris::RisConfig;
use crate::scene::{Enclosure, NoiseSpec};
use crate::seed::{self, tags};
use crate::synth::{synthesize, time_series};
use rand::Rng;

/// `n` configurations with i.i.d. fair-coin bits; deterministic per seed.
/// Duplicates are possible (and fine) for small `len`.
pub fn random_configs(n: usize, len: usize, seed: u64) -> Vec<RisConfig> {
    let mut rng = seed::rng(seed::derive(seed, tags::CONFIGS));
    (0..n)
        .map(|_| RisConfig::from_bits((0..len).map(|_| rng.gen::<bool>()).collect()))
        .collect()
}

/// A deterministic scalar objective over RIS configurations; lower is
/// better.
pub trait CostFunction: Sync {
    fn evaluate(&self, config: &RisConfig) -> Result<f64>;
    fn description(&self) -> String;
    fn band(&self) -> BandSelection;
}

/// Mean in-band channel magnitude of a single untampered synthesis.
///
/// Synthesizes directly on the band sub-grid (the same bins band
/// extraction on the parent grid selects); with a finite SNR the noise is
/// therefore referenced to in-band mean power.
pub struct MeanAmplitudeCost {
    enclosure: Enclosure,
    subgrid: FrequencyGrid,
    band: BandSelection,
    noise: NoiseSpec,
    time_s: f64,
}

impl MeanAmplitudeCost {
    pub fn new(
        enclosure: Enclosure,
        parent_grid: &FrequencyGrid,
        band: BandSelection,
        noise: NoiseSpec,
        time_s: f64,
    ) -> Result<Self> {
        Ok(Self {
            subgrid: parent_grid.band_subgrid(&band)?,
            enclosure,
            band,
            noise,
            time_s,
        })
    }
}

impl CostFunction for MeanAmplitudeCost {
    fn evaluate(&self, config: &RisConfig) -> Result<f64> {
        let h = synthesize(
            &self.enclosure,
            &self.subgrid,
            config,
            None,
            self.time_s,
            &self.noise,
        )?;
        let mags = h.magnitude_vector();
        Ok(mags.iter().sum::<f64>() / mags.len() as f64)
    }

    fn description(&self) -> String {
        format!(
            "mean in-band |H| over {} bins at {:.4} GHz / {:.1} MHz",
            self.subgrid.n_points(),
            self.band.center_hz / 1e9,
            self.band.bandwidth_hz / 1e6
        )
    }

    fn band(&self) -> BandSelection {
        self.band
    }
}

/// Mean over in-band bins of the sample standard deviation of `|H|` over
/// consecutive snapshots; minimizing it steers the RIS to cancel
/// time-varying contributions such as fan motion.
pub struct TemporalStdCost {
    enclosure: Enclosure,
    subgrid: FrequencyGrid,
    band: BandSelection,
    n_snapshots: usize,
    t_start_s: f64,
    t_step_s: f64,
    noise: NoiseSpec,
}

impl TemporalStdCost {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        enclosure: Enclosure,
        parent_grid: &FrequencyGrid,
        band: BandSelection,
        n_snapshots: usize,
        t_start_s: f64,
        t_step_s: f64,
        noise: NoiseSpec,
    ) -> Result<Self> {
        if n_snapshots < 2 {
            return Err(Error::InsufficientSnapshots { got: n_snapshots });
        }
        Ok(Self {
            subgrid: parent_grid.band_subgrid(&band)?,
            enclosure,
            band,
            n_snapshots,
            t_start_s,
            t_step_s,
            noise,
        })
    }
}

/// Mean over bins of the sample standard deviation (n-1 denominator) of
/// per-snapshot magnitudes. 1-homogeneous: scaling every magnitude scales
/// the result by the same factor.
pub fn mean_temporal_std(snapshot_magnitudes: &[Vec<f64>]) -> f64 {
    let n = snapshot_magnitudes.len();
    let bins = snapshot_magnitudes[0].len();
    let mut acc = 0.0;
    for k in 0..bins {
        let mean = snapshot_magnitudes.iter().map(|m| m[k]).sum::<f64>() / n as f64;
        let var = snapshot_magnitudes
            .iter()
            .map(|m| {
                let d = m[k] - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1) as f64;
        acc += var.sqrt();
    }
    acc / bins as f64
}

impl CostFunction for TemporalStdCost {
    fn evaluate(&self, config: &RisConfig) -> Result<f64> {
        let series = time_series(
            &self.enclosure,
            &self.subgrid,
            config,
            None,
            self.t_start_s,
            self.t_step_s,
            self.n_snapshots,
            &self.noise,
        )?;
        let mags: Vec<Vec<f64>> = series.iter().map(|s| s.magnitude_vector()).collect();
        Ok(mean_temporal_std(&mags))
    }

    fn description(&self) -> String {
        format!(
            "mean in-band std_t(|H|) over {} snapshots at {:.4} GHz / {:.1} MHz",
            self.n_snapshots,
            self.band.center_hz / 1e9,
            self.band.bandwidth_hz / 1e6
        )
    }

    fn band(&self) -> BandSelection {
        self.band
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizerParams {
    pub population: usize,
    pub elite_fraction: f64,
    pub generations: usize,
    /// Marginals are clamped to `[p_min, 1 - p_min]`.
    pub p_min: f64,
    pub seed: u64,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            population: 50,
            elite_fraction: 0.25,
            generations: 60,
            p_min: 0.05,
            seed: 0,
        }
    }
}

/// One trace row per generation; `best_cost` is best-so-far and therefore
/// non-increasing down the trace.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct TraceRow {
    pub generation: usize,
    pub best_cost: f64,
    pub mean_cost: f64,
}

/// Runs the marginal-probability search and returns the best configuration
/// found along with the per-generation trace.
pub fn optimize(
    cost: &dyn CostFunction,
    len: usize,
    params: &OptimizerParams,
) -> Result<(RisConfig, Vec<TraceRow>)> {
    if params.population < 2 {
        return Err(Error::Parameter("population must be at least 2".into()));
    }
    if !(params.elite_fraction > 0.0 && params.elite_fraction < 1.0) {
        return Err(Error::Parameter("elite_fraction must be in (0, 1)".into()));
    }
    if params.generations == 0 {
        return Err(Error::Parameter("generations must be at least 1".into()));
    }
    if !(0.0..0.5).contains(&params.p_min) {
        return Err(Error::Parameter("p_min must be in [0, 0.5)".into()));
    }
    if len == 0 {
        return Err(Error::Parameter("config length must be at least 1".into()));
    }

    let mut rng = seed::rng(seed::derive(params.seed, tags::OPTIMIZER));
    let mut marginals = vec![0.5f64; len];
    let elite_count = ((params.elite_fraction * params.population as f64).round() as usize)
        .clamp(1, params.population);
    let mut best: Option<(f64, RisConfig)> = None;
    let mut trace = Vec::with_capacity(params.generations);

    for generation in 0..params.generations {
        let population: Vec<RisConfig> = (0..params.population)
            .map(|_| {
                RisConfig::from_bits(
                    marginals
                        .iter()
                        .map(|&p| rng.gen::<f64>() < p)
                        .collect(),
                )
            })
            .collect();

        let costs: Vec<f64> = population
            .par_iter()
            .map(|c| cost.evaluate(c))
            .collect::<Result<_>>()?;
        let mean_cost = costs.iter().sum::<f64>() / costs.len() as f64;

        // Candidate set: this generation plus the carried best-so-far.
        let mut candidates: Vec<(f64, &RisConfig)> =
            costs.iter().copied().zip(population.iter()).collect();
        if let Some((bc, bcfg)) = &best {
            candidates.push((*bc, bcfg));
        }
        // Ties break toward the lexicographically smaller bit vector.
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.bits().cmp(b.1.bits())));

        let (top_cost, top_cfg) = candidates[0];
        match &best {
            Some((bc, bcfg)) if (*bc, bcfg.bits()) <= (top_cost, top_cfg.bits()) => {}
            _ => best = Some((top_cost, top_cfg.clone())),
        }

        let elites = &candidates[..elite_count.min(candidates.len())];
        for (l, p) in marginals.iter_mut().enumerate() {
            let ones = elites.iter().filter(|(_, c)| c.bit(l)).count();
            *p = (ones as f64 / elites.len() as f64).clamp(params.p_min, 1.0 - params.p_min);
        }

        trace.push(TraceRow {
            generation,
            best_cost: best.as_ref().unwrap().0,
            mean_cost,
        });
    }

    let (_, config) = best.unwrap();
    Ok((config, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SceneSpec;

    struct OneMax;
    impl CostFunction for OneMax {
        fn evaluate(&self, config: &RisConfig) -> Result<f64> {
            Ok(config.bits().iter().filter(|&&b| b).count() as f64)
        }
        fn description(&self) -> String {
            "count of 1 bits".into()
        }
        fn band(&self) -> BandSelection {
            BandSelection::new(5.0e9, 1.0e6).unwrap()
        }
    }

    struct Constant;
    impl CostFunction for Constant {
        fn evaluate(&self, _: &RisConfig) -> Result<f64> {
            Ok(1.5)
        }
        fn description(&self) -> String {
            "constant".into()
        }
        fn band(&self) -> BandSelection {
            BandSelection::new(5.0e9, 1.0e6).unwrap()
        }
    }

    #[test]
    fn random_configs_are_deterministic_and_fair() {
        let a = random_configs(50, 64, 123);
        let b = random_configs(50, 64, 123);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);

        let single = random_configs(1, 1, 7);
        assert_eq!(single[0].len(), 1);

        // Binomial concentration: per-element fraction of 1s over 10^4
        // draws stays within 0.5 +/- 0.02.
        let many = random_configs(10_000, 64, 99);
        for l in 0..64 {
            let ones = many.iter().filter(|c| c.bit(l)).count() as f64 / 10_000.0;
            assert!((ones - 0.5).abs() < 0.02, "element {l}: {ones}");
        }
    }

    #[test]
    fn constant_cost_gives_flat_trace() {
        let params = OptimizerParams {
            population: 10,
            generations: 5,
            ..Default::default()
        };
        let (config, trace) = optimize(&Constant, 16, &params).unwrap();
        assert_eq!(config.len(), 16);
        for row in &trace {
            assert_eq!(row.best_cost, 1.5);
            assert_eq!(row.mean_cost, 1.5);
        }
    }

    #[test]
    fn one_max_converges_to_all_zeros() {
        let params = OptimizerParams {
            population: 50,
            generations: 30,
            seed: 3,
            ..Default::default()
        };
        let (config, trace) = optimize(&OneMax, 32, &params).unwrap();
        assert_eq!(config, RisConfig::zeros(32));
        for w in trace.windows(2) {
            assert!(w[1].best_cost <= w[0].best_cost, "trace not monotone");
        }
    }

    #[test]
    fn optimize_is_deterministic_per_seed() {
        let params = OptimizerParams {
            population: 20,
            generations: 10,
            seed: 42,
            ..Default::default()
        };
        let (a, ta) = optimize(&OneMax, 24, &params).unwrap();
        let (b, tb) = optimize(&OneMax, 24, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.len(), tb.len());
        for (x, y) in ta.iter().zip(&tb) {
            assert_eq!(x.best_cost, y.best_cost);
            assert_eq!(x.mean_cost, y.mean_cost);
        }
    }

    #[test]
    fn optimize_validates_parameters() {
        let bad = [
            OptimizerParams {
                population: 1,
                ..Default::default()
            },
            OptimizerParams {
                elite_fraction: 0.0,
                ..Default::default()
            },
            OptimizerParams {
                generations: 0,
                ..Default::default()
            },
            OptimizerParams {
                p_min: 0.5,
                ..Default::default()
            },
        ];
        for params in bad {
            assert!(optimize(&OneMax, 8, &params).is_err(), "{params:?}");
        }
    }

    #[test]
    fn mean_amplitude_cost_ignores_config_when_ris_is_inert() {
        let scene = crate::scene::build_scene(&SceneSpec::default())
            .unwrap()
            .with_zero_ris_gain();
        let grid = FrequencyGrid::new(4.5e9, 5.0e6, 241).unwrap();
        let band = BandSelection::new(4.79e9, 20.0e6).unwrap();
        let cost = MeanAmplitudeCost::new(scene, &grid, band, NoiseSpec::none(), 0.0).unwrap();
        let a = cost.evaluate(&RisConfig::zeros(64)).unwrap();
        let b = cost
            .evaluate(&RisConfig::zeros(64).complement())
            .unwrap();
        assert_eq!(a, b);
        // Deterministic on repeat.
        assert_eq!(a, cost.evaluate(&RisConfig::zeros(64)).unwrap());
    }

    #[test]
    fn temporal_std_cost_is_zero_without_fan_or_noise() {
        let scene = crate::scene::build_scene(&SceneSpec::default())
            .unwrap()
            .fan_disabled();
        let grid = FrequencyGrid::new(4.5e9, 5.0e6, 241).unwrap();
        let band = BandSelection::new(5.0e9, 40.0e6).unwrap();
        let cost =
            TemporalStdCost::new(scene, &grid, band, 20, 0.0, 5.0e-4, NoiseSpec::none()).unwrap();
        assert_eq!(cost.evaluate(&RisConfig::zeros(64)).unwrap(), 0.0);
    }

    #[test]
    fn temporal_std_cost_positive_with_fan() {
        let scene = crate::scene::build_scene(&SceneSpec::default()).unwrap();
        assert!(scene.fan.is_some());
        let grid = FrequencyGrid::new(4.5e9, 5.0e6, 241).unwrap();
        let band = BandSelection::new(5.0e9, 40.0e6).unwrap();
        let cost =
            TemporalStdCost::new(scene, &grid, band, 20, 0.0, 5.0e-4, NoiseSpec::none()).unwrap();
        let c = cost.evaluate(&RisConfig::zeros(64)).unwrap();
        assert!(c > 0.0, "fan must modulate the channel, got {c}");
    }

    #[test]
    fn temporal_std_needs_two_snapshots() {
        let scene = crate::scene::build_scene(&SceneSpec::default()).unwrap();
        let grid = FrequencyGrid::new(4.5e9, 5.0e6, 241).unwrap();
        let band = BandSelection::new(5.0e9, 40.0e6).unwrap();
        assert!(matches!(
            TemporalStdCost::new(scene, &grid, band, 1, 0.0, 5.0e-4, NoiseSpec::none()),
            Err(Error::InsufficientSnapshots { got: 1 })
        ));
    }

    #[test]
    fn mean_temporal_std_is_1_homogeneous() {
        let snapshots = vec![
            vec![1.0, 2.0, 0.5],
            vec![1.5, 1.0, 0.25],
            vec![0.5, 3.0, 0.75],
        ];
        let doubled: Vec<Vec<f64>> = snapshots
            .iter()
            .map(|v| v.iter().map(|x| 2.0 * x).collect())
            .collect();
        let base = mean_temporal_std(&snapshots);
        let scaled = mean_temporal_std(&doubled);
        assert!((scaled - 2.0 * base).abs() < 1e-12);
    }
}
