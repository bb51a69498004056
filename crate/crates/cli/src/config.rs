use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use shmcam::scenegen::{DisturbanceModel, MarkerStyle, SceneConfig, TagStyle};
use shmcam::signalkit::{DetrendMode, DiffConfig, DiffMethod, WelchConfig, Window};
use shmcam::structsim::{calibrate_to_frequencies, ChirpParams, InitialConditions, SdofModel};
use shmcam::tracker::{Axis, TrackConfig};
use shmcam::uavsim::{AlignGains, AlignmentConfig, SearchDirection, TagPose};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Healthy,
    Damaged,
}

/// Either explicit modal properties or a two-point calibration from measured
/// healthy and damaged frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSection {
    pub mass: Option<f64>,
    pub stiffness: Option<f64>,
    pub calibrate: Option<Calibration>,
    #[serde(default = "default_damping")]
    pub damping_ratio: f64,
    #[serde(default)]
    pub added_mass: f64,
}

fn default_damping() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub f_healthy: f64,
    pub f_damaged: f64,
    pub delta_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Excitation {
    FreeVibration {
        displacement: f64,
        #[serde(default)]
        velocity: f64,
        duration: f64,
    },
    Chirp {
        amplitude: f64,
        f_start: f64,
        f_end: f64,
        sweep_duration: f64,
        duration: f64,
    },
}

impl Excitation {
    pub fn duration(&self) -> f64 {
        match *self {
            Excitation::FreeVibration { duration, .. } | Excitation::Chirp { duration, .. } => duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraSection {
    pub fps: f64,
    pub width: usize,
    pub height: usize,
    pub meters_per_pixel: f64,
    pub marker_center: (f64, f64),
    pub marker_radius: f64,
    pub edge_softness: f64,
    pub foreground: u8,
    pub background: u8,
    /// Draws a stationary reference tag for platform-motion compensation.
    pub reference_tag: bool,
    pub tag_center: (f64, f64),
    pub tag_size: f64,
    pub noise_sigma: f64,
    pub axis: Axis,
}

impl Default for CameraSection {
    fn default() -> Self {
        let s = SceneConfig::default();
        let tag = s.reference_tag.expect("default scene has a tag");
        Self {
            fps: s.fps,
            width: s.width,
            height: s.height,
            meters_per_pixel: s.meters_per_pixel,
            marker_center: s.marker.center,
            marker_radius: s.marker.radius,
            edge_softness: s.marker.edge_softness,
            foreground: s.marker.foreground,
            background: s.marker.background,
            reference_tag: true,
            tag_center: tag.center,
            tag_size: tag.size,
            noise_sigma: s.noise_sigma,
            axis: s.axis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceSection {
    pub drift_sigma: f64,
    pub rotor_amplitude: f64,
    pub rotor_frequency: f64,
    pub jitter_sigma: f64,
}

impl Default for DisturbanceSection {
    fn default() -> Self {
        let d = DisturbanceModel::default();
        Self {
            drift_sigma: d.drift_sigma,
            rotor_amplitude: d.rotor_amplitude,
            rotor_frequency: d.rotor_frequency,
            jitter_sigma: d.jitter_sigma,
        }
    }
}

/// Hover alignment ahead of recording. The drone starts at the standoff
/// point turned `initial_yaw_deg` away from the tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavSection {
    pub initial_yaw_deg: f64,
    pub standoff: f64,
    pub search_rate: f64,
    pub tolerance_px: f64,
    pub pixel_noise: f64,
    /// Hover drift, px per control period.
    pub drift_sigma: f64,
    pub max_search_time: f64,
}

impl Default for UavSection {
    fn default() -> Self {
        let a = AlignmentConfig::default();
        Self {
            initial_yaw_deg: 0.0,
            standoff: a.standoff,
            search_rate: a.search_rate,
            tolerance_px: a.tolerance_px,
            pixel_noise: a.pixel_noise,
            drift_sigma: 0.0,
            max_search_time: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingSection {
    pub search_radius: usize,
    pub min_score: f64,
}

impl Default for TrackingSection {
    fn default() -> Self {
        let t = TrackConfig::default();
        Self { search_radius: t.search_radius, min_score: t.min_score }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisSignal {
    Displacement,
    #[default]
    Acceleration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub signal: AnalysisSignal,
    /// Defaults to a length derived from the record length.
    pub segment_length: Option<usize>,
    pub overlap_fraction: f64,
    pub window: Window,
    pub detrend: DetrendMode,
    /// Defaults to 0.5 Hz up to 90 % of Nyquist.
    pub band: Option<(f64, f64)>,
    pub diff_method: DiffMethod,
    /// Defaults to about 50 ms of samples.
    pub smooth_window: Option<usize>,
    /// Defaults to three times the coarser spectral resolution.
    pub damage_threshold: Option<f64>,
    pub reference_healthy: f64,
    pub reference_damaged: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let w = WelchConfig::new(1024);
        Self {
            signal: AnalysisSignal::default(),
            segment_length: None,
            overlap_fraction: w.overlap_fraction,
            window: w.window,
            detrend: w.detrend,
            band: None,
            diff_method: DiffMethod::default(),
            smooth_window: None,
            damage_threshold: None,
            reference_healthy: 5.09,
            reference_damaged: 4.51,
        }
    }
}

impl AnalysisSection {
    pub fn welch(&self, n: usize) -> WelchConfig {
        let mut w = match self.segment_length {
            Some(len) => WelchConfig::new(len),
            None => WelchConfig::default_for_length(n),
        };
        w.overlap_fraction = self.overlap_fraction;
        w.window = self.window;
        w.detrend = self.detrend;
        w
    }

    pub fn band(&self, fps: f64) -> (f64, f64) {
        self.band.unwrap_or((0.5, 0.9 * fps / 2.0))
    }

    pub fn diff(&self, fps: f64) -> DiffConfig {
        match (self.diff_method, self.smooth_window) {
            (DiffMethod::Central, _) => DiffConfig::central(),
            (DiffMethod::Smoothed, Some(w)) => DiffConfig::smoothed(w),
            (DiffMethod::Smoothed, None) => DiffConfig::for_sample_rate(fps),
        }
    }

    pub fn reference(&self, condition: Condition) -> f64 {
        match condition {
            Condition::Healthy => self.reference_healthy,
            Condition::Damaged => self.reference_damaged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub case_id: String,
    pub condition: Condition,
    /// Label shared by a healthy case and its damaged counterpart. Defaults to
    /// the case id without its leading `H`/`D`.
    pub pair: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub structure: StructureSection,
    pub excitation: Excitation,
    #[serde(default)]
    pub camera: CameraSection,
    pub disturbance: Option<DisturbanceSection>,
    pub uav: Option<UavSection>,
    #[serde(default)]
    pub tracking: TrackingSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn pair_label(&self) -> String {
        self.pair.clone().unwrap_or_else(|| default_pair(&self.case_id))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Validation(format!("case {}: {m}", self.case_id)));
        if self.case_id.is_empty() || self.case_id.contains(['/', '\\']) || self.case_id.starts_with('.') {
            return bad(format!("case id '{}' is not a valid directory name", self.case_id));
        }
        self.model()?;
        let d = self.excitation.duration();
        if !(d > 0.0 && d.is_finite()) {
            return bad(format!("duration must be positive, got {d}"));
        }
        if let Excitation::Chirp { amplitude, f_start, f_end, sweep_duration, .. } = self.excitation {
            let p = ChirpParams { amplitude, f_start, f_end, duration: sweep_duration };
            p.validate().map_err(|e| CliError::Validation(format!("case {}: {e}", self.case_id)))?;
        }
        let scene = self.scene();
        scene.validate().map_err(|e| CliError::Validation(format!("case {}: {e}", self.case_id)))?;
        if let Some(d) = self.disturbance_model() {
            d.validate(self.camera.fps).map_err(|e| CliError::Validation(format!("case {}: {e}", self.case_id)))?;
            if !self.camera.reference_tag {
                return bad("platform disturbance needs a reference tag for compensation".into());
            }
        }
        if self.uav.is_some() {
            self.alignment().validate().map_err(|e| CliError::Validation(format!("case {}: {e}", self.case_id)))?;
        }
        if self.tracking.search_radius < 2 {
            return bad("tracking.search_radius must be at least 2".into());
        }
        let (lo, hi) = self.analysis.band(self.camera.fps);
        if !(lo >= 0.0 && hi > lo && hi <= self.camera.fps / 2.0) {
            return bad(format!("analysis band ({lo}, {hi}) must lie within (0, Nyquist]"));
        }
        Ok(())
    }

    /// Structural model including any added mass.
    pub fn model(&self) -> Result<SdofModel<f64>> {
        let s = &self.structure;
        let err = |e: shmcam::structsim::StructError| CliError::Validation(format!("case {}: {e}", self.case_id));
        let base = match (s.mass, s.stiffness, s.calibrate) {
            (Some(m), Some(k), None) => SdofModel::new(m, k, s.damping_ratio).map_err(err)?,
            (None, None, Some(c)) => {
                let mut m = calibrate_to_frequencies(c.f_healthy, c.f_damaged, c.delta_mass).map_err(err)?;
                m.damping_ratio = s.damping_ratio;
                m.validate().map_err(err)?;
                m
            }
            _ => {
                return Err(CliError::Validation(format!(
                    "case {}: structure needs either mass and stiffness or a calibrate table",
                    self.case_id
                )))
            }
        };
        let m = base.with_added_mass(s.added_mass);
        m.validate().map_err(err)?;
        Ok(m)
    }

    pub fn initial_conditions(&self) -> InitialConditions<f64> {
        match self.excitation {
            Excitation::FreeVibration { displacement, velocity, .. } => InitialConditions { displacement, velocity },
            Excitation::Chirp { .. } => InitialConditions::at_rest(),
        }
    }

    pub fn scene(&self) -> SceneConfig {
        let c = &self.camera;
        SceneConfig {
            width: c.width,
            height: c.height,
            fps: c.fps,
            meters_per_pixel: c.meters_per_pixel,
            marker: MarkerStyle {
                center: c.marker_center,
                radius: c.marker_radius,
                foreground: c.foreground,
                background: c.background,
                edge_softness: c.edge_softness,
            },
            reference_tag: c.reference_tag.then_some(TagStyle { center: c.tag_center, size: c.tag_size }),
            axis: c.axis,
            noise_sigma: c.noise_sigma,
            seed: self.seed,
        }
    }

    pub fn disturbance_model(&self) -> Option<DisturbanceModel> {
        self.disturbance.map(|d| DisturbanceModel {
            drift_sigma: d.drift_sigma,
            rotor_amplitude: d.rotor_amplitude,
            rotor_frequency: d.rotor_frequency,
            jitter_sigma: d.jitter_sigma,
            seed: self.seed.wrapping_add(1),
        })
    }

    pub fn alignment(&self) -> AlignmentConfig {
        let u = self.uav.unwrap_or_default();
        let tag = self.uav_tag();
        AlignmentConfig {
            search_rate: u.search_rate,
            search_direction: SearchDirection::ShortestToward(tag.facing_yaw()),
            gains: AlignGains::default(),
            standoff: u.standoff,
            tolerance_px: u.tolerance_px,
            pixel_noise: u.pixel_noise,
            drift: DisturbanceModel { drift_sigma: u.drift_sigma, seed: self.seed.wrapping_add(3), ..DisturbanceModel::none() },
            seed: self.seed.wrapping_add(2),
            ..AlignmentConfig::default()
        }
    }

    /// The alignment tag sits at the origin facing `+x`.
    pub fn uav_tag(&self) -> TagPose {
        TagPose { position: [0.0, 0.0, 1.5], normal_yaw: 0.0 }
    }

    pub fn track_config(&self) -> TrackConfig {
        TrackConfig { search_radius: self.tracking.search_radius, min_score: self.tracking.min_score }
    }
}

pub fn default_pair(case_id: &str) -> String {
    match case_id.chars().next() {
        Some('H' | 'D' | 'h' | 'd') if case_id.len() > 1 => case_id[1..].to_string(),
        _ => case_id.to_string(),
    }
}

/// A set of scenario files run together, e.g. every healthy/damaged pair of a
/// camera matrix. Paths are relative to the suite file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub cases: Vec<PathBuf>,
}

pub enum Loaded {
    Scenario(Box<ScenarioConfig>),
    Suite(Vec<ScenarioConfig>),
}

/// Loads a scenario or a suite, applying `seed` to every case when given.
pub fn load(path: &Path, seed: Option<u64>) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let value: toml::Table = toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let apply = |mut c: ScenarioConfig| {
        if let Some(s) = seed {
            c.seed = s;
        }
        c
    };
    if value.contains_key("cases") {
        let suite: SuiteConfig =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let cases = suite
            .cases
            .iter()
            .map(|p| ScenarioConfig::load(&dir.join(p)).map(apply))
            .collect::<Result<Vec<_>>>()?;
        let mut ids: Vec<&str> = cases.iter().map(|c| c.case_id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::Validation(format!("duplicate case id {} in {}", w[0], path.display())));
        }
        Ok(Loaded::Suite(cases))
    } else {
        ScenarioConfig::load(path).map(|c| Loaded::Scenario(Box::new(apply(c))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BASELINE: &str = r#"
case_id = "HSC2"
condition = "healthy"
seed = 7

[structure]
calibrate = { f_healthy = 5.09, f_damaged = 4.51, delta_mass = 0.240 }

[excitation]
kind = "free_vibration"
displacement = 0.012
duration = 20.0
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ScenarioConfig::parse(BASELINE).unwrap();
        assert_eq!(c.camera.fps, 60.0);
        assert_eq!(c.pair_label(), "SC2");
        assert!((shmcam::structsim::natural_frequency(&c.model().unwrap()) - 5.09).abs() < 1e-9);
        assert_eq!(c.analysis.band(60.0), (0.5, 27.0));
    }

    #[test]
    fn round_trips_and_hash_is_stable() {
        let c = ScenarioConfig::parse(BASELINE).unwrap();
        let again = ScenarioConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        let mut other = c.clone();
        other.seed += 1;
        assert_ne!(c.hash(), other.hash());
    }

    #[test]
    fn rotor_above_nyquist_rejected() {
        let text = format!("{BASELINE}\n[camera]\nfps = 30.0\n\n[disturbance]\nrotor_frequency = 20.0\nrotor_amplitude = 1.0\n");
        let err = ScenarioConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("Nyquist"), "{err}");
    }

    #[test]
    fn structure_needs_one_definition() {
        let text = BASELINE.replace(
            "calibrate = { f_healthy = 5.09, f_damaged = 4.51, delta_mass = 0.240 }",
            "mass = 1.0",
        );
        assert!(matches!(ScenarioConfig::parse(&text), Err(CliError::Validation(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{BASELINE}\n[tracking]\nradius = 3\n");
        assert!(ScenarioConfig::parse(&text).is_err());
    }

    #[test]
    fn pair_defaults() {
        assert_eq!(default_pair("HAC1"), "AC1");
        assert_eq!(default_pair("DAC1"), "AC1");
        assert_eq!(default_pair("X1"), "X1");
    }
}
