use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{AlignmentConfig, TagPose, UavState};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TagObservation {
    pub visible: bool,
    /// rad, positive to the left of the optical axis.
    pub bearing: f64,
    /// rad, positive above the optical axis.
    pub elevation: f64,
    pub range: f64,
    /// Tag centre minus image centre, px (`u` right, `v` down).
    pub pixel_offset: (f64, f64),
    /// Camera position in the tag frame from the pose estimate, m: along the
    /// tag normal, along its face, and height above the tag centre.
    pub normal_offset: f64,
    pub lateral_offset: f64,
    pub vertical_offset: f64,
}

impl TagObservation {
    pub fn not_visible() -> Self {
        Self::default()
    }

    pub fn pixel_radius(&self) -> f64 {
        self.pixel_offset.0.hypot(self.pixel_offset.1)
    }
}

/// Pinhole view of the tag centre, with Gaussian pixel noise drawn from
/// `noise_seed` when the config asks for it.
pub fn observe_tag(state: &UavState, tag: &TagPose, cfg: &AlignmentConfig, noise_seed: u64) -> TagObservation {
    let mut obs = project(state, tag, cfg);
    if obs.visible && cfg.pixel_noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let normal = Normal::new(0.0, cfg.pixel_noise).expect("validated noise");
        let f = cfg.focal_px();
        let du = obs.pixel_offset.0 + normal.sample(&mut rng);
        let dv = obs.pixel_offset.1 + normal.sample(&mut rng);
        obs.pixel_offset = (du, dv);
        obs.bearing = (-du / f).atan();
        obs.elevation = (-dv / f).atan();
    }
    obs
}

/// Noise-free projection.
pub(crate) fn project(state: &UavState, tag: &TagPose, cfg: &AlignmentConfig) -> TagObservation {
    let d = [
        tag.position[0] - state.position[0],
        tag.position[1] - state.position[1],
        tag.position[2] - state.position[2],
    ];
    let (fw, lf) = (state.forward(), state.left());
    let d_f = d[0] * fw[0] + d[1] * fw[1];
    let d_l = d[0] * lf[0] + d[1] * lf[1];
    let range = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if d_f <= 0.0 || range > cfg.max_range {
        return TagObservation::not_visible();
    }
    let bearing = d_l.atan2(d_f);
    let elevation = d[2].atan2(d_f);
    if bearing.abs() > cfg.fov / 2.0 || elevation.abs() > cfg.vertical_fov() / 2.0 {
        return TagObservation::not_visible();
    }
    let f = cfg.focal_px();
    let rel = [-d[0], -d[1]];
    let (n, t) = (tag.normal(), tag.tangent());
    TagObservation {
        visible: true,
        bearing,
        elevation,
        range,
        pixel_offset: (-f * d_l / d_f, -f * d[2] / d_f),
        normal_offset: rel[0] * n[0] + rel[1] * n[1],
        lateral_offset: rel[0] * t[0] + rel[1] * t[1],
        vertical_offset: -d[2],
    }
}
