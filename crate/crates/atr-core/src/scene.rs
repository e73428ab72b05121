//! Parametric enclosure scenes.
//!
//! An [`Enclosure`] is pure geometry plus coupling coefficients: antenna
//! positions, static point scatterers, the RIS panel, the needle-insertion
//! hole grid, and an optional fan rotor. [`SceneSpec`] is the serializable
//! recipe a scene is sampled from; [`build_scene`] turns a spec into a
//! concrete enclosure deterministically from its seed.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, tags};

/// Position in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Static point scatterer with a complex scattering coefficient.
#[derive(Clone, Copy, Debug)]
pub struct Scatterer {
    pub position: Point3,
    pub amplitude: Complex64,
}

/// Band-pass efficiency weighting of the RIS, raised cosine:
/// `s(f) = 0.5 * (1 + cos(pi * (f - center) / width))` for
/// `|f - center| <= width`, zero outside. `s(center) = 1`, continuous.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyProfile {
    pub center_hz: f64,
    pub width_hz: f64,
}

impl EfficiencyProfile {
    pub fn weight(&self, f_hz: f64) -> f64 {
        let d = (f_hz - self.center_hz).abs();
        if d >= self.width_hz {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * d / self.width_hz).cos())
        }
    }

    /// Support of the profile: outside these edges `weight` is exactly 0.
    pub fn support_hz(&self) -> (f64, f64) {
        (self.center_hz - self.width_hz, self.center_hz + self.width_hz)
    }
}

/// One RIS unit-cell reflector.
#[derive(Clone, Copy, Debug)]
pub struct RisElement {
    pub position: Point3,
    pub gain: Complex64,
}

/// Planar array of binary-phase reflector elements.
#[derive(Clone, Debug)]
pub struct RisPanel {
    pub elements: Vec<RisElement>,
    pub efficiency: EfficiencyProfile,
}

impl RisPanel {
    /// Panel with no elements; the RIS terms vanish and any zero-length
    /// config is accepted.
    pub fn empty() -> Self {
        Self {
            elements: Vec::new(),
            efficiency: EfficiencyProfile {
                center_hz: 5.0e9,
                width_hz: 0.7e9,
            },
        }
    }

    /// `rows x cols` grid in the x-y plane at height `origin.z`, uniform
    /// element gain.
    pub fn planar_grid(
        origin: Point3,
        rows: usize,
        cols: usize,
        pitch_m: f64,
        gain: Complex64,
        efficiency: EfficiencyProfile,
    ) -> Self {
        let mut elements = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                elements.push(RisElement {
                    position: Point3::new(
                        origin.x + c as f64 * pitch_m,
                        origin.y + r as f64 * pitch_m,
                        origin.z,
                    ),
                    gain,
                });
            }
        }
        Self { elements, efficiency }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Needle insertion site: entry point on the lid plus insertion direction
/// (unit vector).
#[derive(Clone, Copy, Debug)]
pub struct HoleSite {
    pub entry: Point3,
    pub axis: Point3,
}

/// Rotating fan; blade tips act as moving point scatterers in the x-y
/// plane around the hub.
#[derive(Clone, Copy, Debug)]
pub struct FanRotor {
    pub hub: Point3,
    pub blade_count: usize,
    pub blade_radius_m: f64,
    pub angular_rate_rad_s: f64,
    pub blade_amplitude: Complex64,
}

impl FanRotor {
    /// Blade tip positions at time `t`; deterministic in
    /// (hub, radius, rate, t, blade index).
    pub fn blade_tips(&self, time_s: f64) -> Vec<Point3> {
        (0..self.blade_count)
            .map(|b| {
                let angle = self.angular_rate_rad_s * time_s
                    + 2.0 * std::f64::consts::PI * b as f64 / self.blade_count as f64;
                Point3::new(
                    self.hub.x + self.blade_radius_m * angle.cos(),
                    self.hub.y + self.blade_radius_m * angle.sin(),
                    self.hub.z,
                )
            })
            .collect()
    }
}

/// A needle insertion event: which hole, how deep, and the per-point
/// scattering coefficient.
#[derive(Clone, Copy, Debug)]
pub struct TamperSpec {
    pub hole_index: usize,
    pub depth_m: f64,
    pub amplitude: Complex64,
}

/// Additive complex circular Gaussian noise level.
///
/// `snr_db` is relative to the mean squared magnitude of the noiseless
/// response on the synthesized grid; `f64::INFINITY` yields exactly zero
/// noise.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self { snr_db, seed }
    }

    pub fn none() -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            snr_db: self.snr_db,
            seed,
        }
    }
}

/// Geometric scene housing all physical inputs to the channel synthesis.
#[derive(Clone, Debug)]
pub struct Enclosure {
    pub tx: Point3,
    pub rx: Point3,
    pub scatterers: Vec<Scatterer>,
    pub ris: RisPanel,
    pub hole_grid: Vec<HoleSite>,
    pub fan: Option<FanRotor>,
    /// For layout/plot context only; no physics reads it.
    pub box_dims_m: [f64; 3],
    /// Needle discretization step along the insertion axis.
    pub needle_step_m: f64,
    /// Default per-point needle scattering coefficient.
    pub needle_amplitude: Complex64,
    /// Two-bounce coupling coefficient between perturbing scatterers
    /// (needle points, fan blade tips) and RIS elements. Zero disables the
    /// coupling, making the tamper imprint independent of the RIS
    /// configuration.
    pub second_order_coupling: f64,
}

impl Enclosure {
    pub fn validate(&self) -> Result<()> {
        if !self.tx.is_finite() || !self.rx.is_finite() {
            return Err(Error::NonFiniteGeometry("antenna position".into()));
        }
        if self.tx.distance(&self.rx) == 0.0 {
            return Err(Error::NonFiniteGeometry("tx and rx coincide".into()));
        }
        for s in &self.scatterers {
            if !s.position.is_finite() || !s.amplitude.re.is_finite() || !s.amplitude.im.is_finite()
            {
                return Err(Error::NonFiniteGeometry("scatterer".into()));
            }
        }
        for e in &self.ris.elements {
            if !e.position.is_finite() {
                return Err(Error::NonFiniteGeometry("RIS element".into()));
            }
        }
        for h in &self.hole_grid {
            if !h.entry.is_finite() || !h.axis.is_finite() {
                return Err(Error::NonFiniteGeometry("hole site".into()));
            }
        }
        if self.needle_step_m <= 0.0 || !self.needle_step_m.is_finite() {
            return Err(Error::NonFiniteGeometry("needle step".into()));
        }
        if !self.second_order_coupling.is_finite() {
            return Err(Error::NonFiniteGeometry("coupling coefficient".into()));
        }
        Ok(())
    }

    /// Tamper event at a hole using the scene's default needle amplitude.
    pub fn tamper(&self, hole_index: usize, depth_m: f64) -> Result<TamperSpec> {
        if hole_index >= self.hole_grid.len() {
            return Err(Error::InvalidHoleIndex {
                index: hole_index,
                holes: self.hole_grid.len(),
            });
        }
        Ok(TamperSpec {
            hole_index,
            depth_m,
            amplitude: self.needle_amplitude,
        })
    }

    /// Discretized needle: `ceil(depth / step)` points along the insertion
    /// axis, midpoint convention, so depth 0 contributes nothing.
    pub fn needle_points(&self, tamper: &TamperSpec) -> Result<Vec<Point3>> {
        let site = self
            .hole_grid
            .get(tamper.hole_index)
            .ok_or(Error::InvalidHoleIndex {
                index: tamper.hole_index,
                holes: self.hole_grid.len(),
            })?;
        if tamper.depth_m < 0.0 || !tamper.depth_m.is_finite() {
            return Err(Error::Parameter(format!(
                "needle depth must be non-negative, got {}",
                tamper.depth_m
            )));
        }
        let n = (tamper.depth_m / self.needle_step_m).ceil() as usize;
        Ok((0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * tamper.depth_m / n as f64;
                Point3::new(
                    site.entry.x + site.axis.x * t,
                    site.entry.y + site.axis.y * t,
                    site.entry.z + site.axis.z * t,
                )
            })
            .collect())
    }

    /// Clone with the fan removed (fan switched off).
    pub fn fan_disabled(&self) -> Enclosure {
        let mut e = self.clone();
        e.fan = None;
        e
    }

    /// Clone with every RIS element gain set to zero; the RIS becomes
    /// inert and the synthesis equals the static part of the channel.
    pub fn with_zero_ris_gain(&self) -> Enclosure {
        let mut e = self.clone();
        for el in &mut e.ris.elements {
            el.gain = Complex64::new(0.0, 0.0);
        }
        e
    }

    pub fn with_coupling(&self, coefficient: f64) -> Enclosure {
        let mut e = self.clone();
        e.second_order_coupling = coefficient;
        e
    }

    /// Imperfect attacker clone: scatterer amplitudes jittered by a
    /// relative Gaussian factor and positions by `factor * lambda_c` per
    /// axis (lambda at the RIS efficiency center), so `factor -> 1`
    /// decorrelates the replica's phases. `factor = 0` returns an exact
    /// clone.
    pub fn perturbed_clone(&self, factor: f64, seed: u64) -> Enclosure {
        let mut e = self.clone();
        if factor == 0.0 {
            return e;
        }
        let lambda = crate::synth::SPEED_OF_LIGHT_M_S / self.ris.efficiency.center_hz;
        let mut rng = seed::rng(seed::derive(seed, tags::REPLICA));
        for s in &mut e.scatterers {
            let g = gaussian(&mut rng);
            s.amplitude *= 1.0 + factor * g;
            s.position.x += factor * lambda * gaussian(&mut rng);
            s.position.y += factor * lambda * gaussian(&mut rng);
            s.position.z += factor * lambda * gaussian(&mut rng);
        }
        e
    }

    /// Count of single-bounce propagation paths for an untampered,
    /// fan-as-configured synthesis (LoS + scatterers + RIS elements + fan
    /// blades).
    pub fn static_path_count(&self) -> usize {
        1 + self.scatterers.len()
            + self.ris.len()
            + self.fan.as_ref().map_or(0, |f| f.blade_count)
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; one value per call is fine off the hot path.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// RIS panel recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RisSpec {
    pub rows: usize,
    pub cols: usize,
    pub pitch_m: f64,
    pub origin_m: [f64; 3],
    pub element_gain: f64,
    pub efficiency_center_hz: f64,
    pub efficiency_width_hz: f64,
}

impl Default for RisSpec {
    fn default() -> Self {
        Self {
            rows: 8,
            cols: 8,
            pitch_m: 0.024,
            origin_m: [0.04, 0.04, 0.012],
            element_gain: 0.08,
            efficiency_center_hz: 5.0e9,
            efficiency_width_hz: 0.7e9,
        }
    }
}

/// Needle-insertion hole grid on the top lid, insertion axis straight
/// down.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoleGridSpec {
    pub rows: usize,
    pub cols: usize,
    pub margin_m: f64,
}

impl Default for HoleGridSpec {
    fn default() -> Self {
        Self {
            rows: 10,
            cols: 25,
            margin_m: 0.06,
        }
    }
}

/// Fan rotor recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FanSpec {
    pub hub_m: [f64; 3],
    pub blade_count: usize,
    pub blade_radius_m: f64,
    pub angular_rate_rad_s: f64,
    pub blade_amplitude: f64,
}

impl Default for FanSpec {
    fn default() -> Self {
        Self {
            hub_m: [0.215, 0.215, 0.16],
            blade_count: 7,
            blade_radius_m: 0.045,
            angular_rate_rad_s: 220.0,
            blade_amplitude: 0.06,
        }
    }
}

/// Needle discretization and default strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeedleSpec {
    pub step_m: f64,
    /// Per-point scattering coefficient; `None` derives
    /// `0.05 * median(|scatterer amplitude|)` from the sampled scene.
    pub amplitude: Option<f64>,
    pub max_depth_m: f64,
}

impl Default for NeedleSpec {
    fn default() -> Self {
        Self {
            step_m: 0.002,
            amplitude: None,
            max_depth_m: 0.04,
        }
    }
}

/// Serializable recipe for a sampled enclosure scene. Key names carry
/// explicit units (`*_m`, `*_hz`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub seed: u64,
    pub box_dims_m: [f64; 3],
    pub tx_antenna_m: [f64; 3],
    pub rx_antenna_m: [f64; 3],
    pub n_scatterers: usize,
    /// Scatterer |amplitude| is log-uniform over one decade starting here.
    pub scatterer_amp_min: f64,
    /// Scatterers keep at least this clearance from both antennas.
    pub antenna_clearance_m: f64,
    pub ris: RisSpec,
    pub holes: HoleGridSpec,
    pub fan: Option<FanSpec>,
    pub needle: NeedleSpec,
    pub second_order_coupling: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            box_dims_m: [0.43, 0.43, 0.205],
            tx_antenna_m: [0.06, 0.06, 0.06],
            rx_antenna_m: [0.37, 0.36, 0.14],
            n_scatterers: 40,
            scatterer_amp_min: 0.1,
            antenna_clearance_m: 0.02,
            ris: RisSpec::default(),
            holes: HoleGridSpec::default(),
            fan: Some(FanSpec::default()),
            needle: NeedleSpec::default(),
            second_order_coupling: 0.15,
        }
    }
}

/// Samples a concrete enclosure from a spec, deterministically in
/// `spec.seed`.
///
/// Scatterer positions are uniform over the box interior but kept clear of
/// the antennas and below the lid probing corridor (`z` up to
/// `box_z - needle.max_depth - 5 mm`), which bounds the `1/d` spreading
/// terms away from singularities.
pub fn build_scene(spec: &SceneSpec) -> Result<Enclosure> {
    let mut rng = seed::rng(seed::derive(spec.seed, tags::SCENE));
    let [bx, by, bz] = spec.box_dims_m;
    let tx = Point3::from(spec.tx_antenna_m);
    let rx = Point3::from(spec.rx_antenna_m);
    let z_max = (bz - spec.needle.max_depth_m - 0.005).max(0.03);

    let mut scatterers = Vec::with_capacity(spec.n_scatterers);
    let mut amplitudes = Vec::with_capacity(spec.n_scatterers);
    for _ in 0..spec.n_scatterers {
        let position = loop {
            let p = Point3::new(
                rng.gen_range(0.01..bx - 0.01),
                rng.gen_range(0.01..by - 0.01),
                rng.gen_range(0.02..z_max),
            );
            if p.distance(&tx) >= spec.antenna_clearance_m
                && p.distance(&rx) >= spec.antenna_clearance_m
            {
                break p;
            }
        };
        let magnitude = spec.scatterer_amp_min * 10f64.powf(rng.gen::<f64>());
        let phase = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        let amplitude = Complex64::from_polar(magnitude, phase);
        amplitudes.push(magnitude);
        scatterers.push(Scatterer { position, amplitude });
    }

    let needle_amplitude = spec.needle.amplitude.unwrap_or_else(|| {
        let mut mags = amplitudes.clone();
        mags.sort_by(f64::total_cmp);
        let median = if mags.is_empty() {
            spec.scatterer_amp_min
        } else {
            mags[mags.len() / 2]
        };
        0.05 * median
    });

    let ris = RisPanel::planar_grid(
        Point3::from(spec.ris.origin_m),
        spec.ris.rows,
        spec.ris.cols,
        spec.ris.pitch_m,
        Complex64::new(spec.ris.element_gain, 0.0),
        EfficiencyProfile {
            center_hz: spec.ris.efficiency_center_hz,
            width_hz: spec.ris.efficiency_width_hz,
        },
    );

    let mut hole_grid = Vec::with_capacity(spec.holes.rows * spec.holes.cols);
    for r in 0..spec.holes.rows {
        for c in 0..spec.holes.cols {
            let fx = if spec.holes.cols > 1 {
                c as f64 / (spec.holes.cols - 1) as f64
            } else {
                0.5
            };
            let fy = if spec.holes.rows > 1 {
                r as f64 / (spec.holes.rows - 1) as f64
            } else {
                0.5
            };
            hole_grid.push(HoleSite {
                entry: Point3::new(
                    spec.holes.margin_m + fx * (bx - 2.0 * spec.holes.margin_m),
                    spec.holes.margin_m + fy * (by - 2.0 * spec.holes.margin_m),
                    bz,
                ),
                axis: Point3::new(0.0, 0.0, -1.0),
            });
        }
    }

    let fan = spec.fan.as_ref().map(|f| FanRotor {
        hub: Point3::from(f.hub_m),
        blade_count: f.blade_count,
        blade_radius_m: f.blade_radius_m,
        angular_rate_rad_s: f.angular_rate_rad_s,
        blade_amplitude: Complex64::new(f.blade_amplitude, 0.0),
    });

    let enclosure = Enclosure {
        tx,
        rx,
        scatterers,
        ris,
        hole_grid,
        fan,
        box_dims_m: spec.box_dims_m,
        needle_step_m: spec.needle.step_m,
        needle_amplitude: Complex64::new(needle_amplitude, 0.0),
        second_order_coupling: spec.second_order_coupling,
    };
    enclosure.validate()?;
    Ok(enclosure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scene_matches_spec_counts() {
        let spec = SceneSpec::default();
        let scene = build_scene(&spec).unwrap();
        assert_eq!(scene.scatterers.len(), 40);
        assert_eq!(scene.ris.len(), 64);
        assert_eq!(scene.hole_grid.len(), 250);
        assert!(scene.fan.is_some());
    }

    #[test]
    fn scene_sampling_is_deterministic() {
        let spec = SceneSpec {
            seed: 42,
            ..SceneSpec::default()
        };
        let a = build_scene(&spec).unwrap();
        let b = build_scene(&spec).unwrap();
        for (sa, sb) in a.scatterers.iter().zip(&b.scatterers) {
            assert_eq!(sa.position, sb.position);
            assert_eq!(sa.amplitude, sb.amplitude);
        }
    }

    #[test]
    fn needle_points_count_and_zero_depth() {
        let scene = build_scene(&SceneSpec::default()).unwrap();
        let tamper = scene.tamper(0, 0.020).unwrap();
        let points = scene.needle_points(&tamper).unwrap();
        assert_eq!(points.len(), 10); // ceil(0.020 / 0.002)
        // Points run along -z from the entry, inside the depth.
        let entry = scene.hole_grid[0].entry;
        for p in &points {
            assert_eq!(p.x, entry.x);
            assert!(p.z < entry.z && p.z >= entry.z - 0.020);
        }

        let zero = scene.tamper(0, 0.0).unwrap();
        assert!(scene.needle_points(&zero).unwrap().is_empty());
    }

    #[test]
    fn tamper_rejects_bad_hole() {
        let scene = build_scene(&SceneSpec::default()).unwrap();
        assert!(matches!(
            scene.tamper(10_000, 0.02),
            Err(Error::InvalidHoleIndex { .. })
        ));
    }

    #[test]
    fn efficiency_profile_shape() {
        let eff = EfficiencyProfile {
            center_hz: 5.0e9,
            width_hz: 0.7e9,
        };
        assert_eq!(eff.weight(5.0e9), 1.0);
        assert_eq!(eff.weight(5.7e9), 0.0);
        assert_eq!(eff.weight(4.3e9), 0.0);
        assert_eq!(eff.weight(8.0e9), 0.0);
        let w = eff.weight(4.79e9);
        assert!(w > 0.7 && w < 0.9, "w = {w}");
    }

    #[test]
    fn blade_tips_are_deterministic_and_on_circle() {
        let fan = FanRotor {
            hub: Point3::new(0.2, 0.2, 0.15),
            blade_count: 7,
            blade_radius_m: 0.045,
            angular_rate_rad_s: 220.0,
            blade_amplitude: Complex64::new(0.06, 0.0),
        };
        let tips = fan.blade_tips(0.123);
        assert_eq!(tips.len(), 7);
        assert_eq!(tips, fan.blade_tips(0.123));
        for t in &tips {
            let r = ((t.x - 0.2).powi(2) + (t.y - 0.2).powi(2)).sqrt();
            assert!((r - 0.045).abs() < 1e-12);
            assert_eq!(t.z, 0.15);
        }
    }

    #[test]
    fn perturbed_clone_zero_factor_is_exact() {
        let scene = build_scene(&SceneSpec::default()).unwrap();
        let clone = scene.perturbed_clone(0.0, 99);
        for (a, b) in scene.scatterers.iter().zip(&clone.scatterers) {
            assert_eq!(a.position, b.position);
            assert_eq!(a.amplitude, b.amplitude);
        }
        let jittered = scene.perturbed_clone(0.1, 99);
        assert!(scene
            .scatterers
            .iter()
            .zip(&jittered.scatterers)
            .any(|(a, b)| a.position != b.position));
    }

    #[test]
    fn validate_rejects_coincident_antennas() {
        let mut scene = build_scene(&SceneSpec::default()).unwrap();
        scene.rx = scene.tx;
        assert!(matches!(
            scene.validate(),
            Err(Error::NonFiniteGeometry(_))
        ));
    }
}
