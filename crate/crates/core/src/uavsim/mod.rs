//! Kinematic simulation of a camera drone that finds a fiducial tag by
//! yawing, centres it, then hovers without tag-based corrections while drift
//! accumulates.
//!
//! World frame: `x`, `y` horizontal, `z` up; yaw is measured counter-clockwise
//! from `+x`. Bearings are positive when the tag lies to the left of the
//! optical axis, so the image offset `du` has the opposite sign.

mod machine;
mod observe;
mod run;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenegen::DisturbanceModel;

pub use machine::{alignment_step, Command};
pub use observe::{observe_tag, TagObservation};
pub use run::{run_alignment, settling_bound, write_trajectory_csv, AlignmentRun, TrajectorySample};

#[derive(Debug, Error)]
pub enum UavError {
    #[error("invalid alignment config: {0}")]
    InvalidConfig(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("alignment timeout: hold not reached within {max_time} s")]
    AlignmentTimeout { max_time: f64, trajectory: Box<Vec<TrajectorySample>> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = UavError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Search,
    Align,
    Hold,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Search => "search",
            Phase::Align => "align",
            Phase::Hold => "hold",
        }
    }

    /// Self-loops plus search to align, align to hold and hold to align.
    pub fn can_follow(self, prev: Phase) -> bool {
        use Phase::*;
        matches!((prev, self), (Search, Search) | (Search, Align) | (Align, Align) | (Align, Hold) | (Hold, Hold) | (Hold, Align))
    }
}

impl std::str::FromStr for Phase {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "search" => Ok(Phase::Search),
            "align" => Ok(Phase::Align),
            "hold" => Ok(Phase::Hold),
            other => Err(format!("unknown phase '{other}'")),
        }
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub position: [f64; 3],
    pub yaw: f64,
    pub phase: Phase,
    pub time: f64,
    /// Consecutive in-band steps seen while aligning.
    pub in_band_steps: u32,
    /// Bearing of the most recent sighting, used to turn back toward a tag
    /// that slipped out of view.
    pub last_bearing: Option<f64>,
}

impl UavState {
    pub fn new(position: [f64; 3], yaw: f64) -> Result<Self> {
        if position.iter().any(|p| !p.is_finite()) || !yaw.is_finite() {
            return Err(UavError::InvalidState("non-finite pose".into()));
        }
        if position[2] <= 0.0 {
            return Err(UavError::InvalidState(format!("altitude must be positive, got {}", position[2])));
        }
        Ok(Self { position, yaw: wrap_angle(yaw), phase: Phase::Search, time: 0.0, in_band_steps: 0, last_bearing: None })
    }

    pub fn forward(&self) -> [f64; 2] {
        [self.yaw.cos(), self.yaw.sin()]
    }

    pub fn left(&self) -> [f64; 2] {
        [-self.yaw.sin(), self.yaw.cos()]
    }
}

/// Tag centre in world coordinates and the heading of its outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TagPose {
    pub position: [f64; 3],
    pub normal_yaw: f64,
}

impl TagPose {
    pub fn normal(&self) -> [f64; 2] {
        [self.normal_yaw.cos(), self.normal_yaw.sin()]
    }

    /// In-plane direction along the tag face, to the left of the normal.
    pub fn tangent(&self) -> [f64; 2] {
        [-self.normal_yaw.sin(), self.normal_yaw.cos()]
    }

    /// Hover point on the tag normal at `standoff`.
    pub fn standoff_point(&self, standoff: f64) -> [f64; 3] {
        let n = self.normal();
        [self.position[0] + standoff * n[0], self.position[1] + standoff * n[1], self.position[2]]
    }

    /// Yaw that points the camera straight at the tag from the normal.
    pub fn facing_yaw(&self) -> f64 {
        wrap_angle(self.normal_yaw + PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignGains {
    pub lateral: f64,
    pub yaw: f64,
    pub range: f64,
}

impl Default for AlignGains {
    fn default() -> Self {
        Self { lateral: 0.8, yaw: 1.0, range: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SearchDirection {
    #[default]
    CounterClockwise,
    Clockwise,
    /// Turn whichever way is shorter toward an expected heading, e.g. the
    /// direction the tag was in at takeoff.
    ShortestToward(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignmentConfig {
    /// Horizontal field of view, rad.
    pub fov: f64,
    pub image_width: usize,
    pub image_height: usize,
    /// rad/s
    pub search_rate: f64,
    pub search_direction: SearchDirection,
    pub gains: AlignGains,
    pub standoff: f64,
    /// Detection limit, m.
    pub max_range: f64,
    pub tolerance_px: f64,
    pub tolerance_range: f64,
    pub hold_steps: u32,
    /// Exit band as a multiple of `tolerance_px`.
    pub exit_factor: f64,
    pub period: f64,
    /// Gaussian pixel noise on tag detections.
    pub pixel_noise: f64,
    /// Only `drift_sigma` (px per control period) and `seed` apply here;
    /// rotor and jitter terms are frame-rate effects added when rendering.
    pub drift: DisturbanceModel,
    pub seed: u64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            fov: 60f64.to_radians(),
            image_width: 1280,
            image_height: 720,
            search_rate: 0.5,
            search_direction: SearchDirection::default(),
            gains: AlignGains::default(),
            standoff: 1.5,
            max_range: 10.0,
            tolerance_px: 15.0,
            tolerance_range: 0.1,
            hold_steps: 10,
            exit_factor: 3.0,
            period: 0.05,
            pixel_noise: 0.0,
            drift: DisturbanceModel::none(),
            seed: 0,
        }
    }
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(UavError::InvalidConfig(m));
        if !(self.fov > 0.0 && self.fov < PI) {
            return bad(format!("fov must lie in (0, pi), got {}", self.fov));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return bad("image size must be positive".into());
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return bad(format!("control period must be positive, got {}", self.period));
        }
        for (name, g) in [("lateral", self.gains.lateral), ("yaw", self.gains.yaw), ("range", self.gains.range)] {
            if !(g > 0.0) {
                return bad(format!("{name} gain must be positive, got {g}"));
            }
            if g * self.period > 1.0 {
                return bad(format!("{name} gain {g} overshoots at period {} s", self.period));
            }
        }
        if !(self.search_rate > 0.0) {
            return bad(format!("search rate must be positive, got {}", self.search_rate));
        }
        if self.search_rate * self.period > self.fov / 2.0 {
            return bad("search step exceeds half the field of view; the tag could be skipped".into());
        }
        if !(self.standoff > 0.0 && self.max_range > self.standoff) {
            return bad("need 0 < standoff < max_range".into());
        }
        if !(self.tolerance_px > 0.0 && self.tolerance_range > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.hold_steps == 0 {
            return bad("hold_steps must be at least 1".into());
        }
        if !(self.exit_factor >= 1.0) {
            return bad(format!("exit factor must be at least 1, got {}", self.exit_factor));
        }
        if !(self.pixel_noise >= 0.0 && self.drift.drift_sigma >= 0.0) {
            return bad("noise levels must be non-negative".into());
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        self.image_width as f64 / 2.0 / (self.fov / 2.0).tan()
    }

    pub fn vertical_fov(&self) -> f64 {
        2.0 * ((self.fov / 2.0).tan() * self.image_height as f64 / self.image_width as f64).atan()
    }

    pub fn exit_band_px(&self) -> f64 {
        self.exit_factor * self.tolerance_px
    }
}
