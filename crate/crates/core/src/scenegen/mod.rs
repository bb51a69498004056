//! Synthetic grayscale video of a marker on the vibrating structure and a
//! stationary reference tag, seen from a possibly unsteady camera, with exact
//! ground truth.

mod config;
mod disturbance;
mod render;

use thiserror::Error;

use crate::signalkit::SignalError;
use crate::tracker::TrackError;

pub use config::{MarkerStyle, SceneConfig, TagStyle};
pub use disturbance::{inject_platform_disturbance, CameraOffset, DisturbanceModel};
pub use render::{render_frames, render_with_offset, write_ground_truth_csv, GroundTruth};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene: {0}")]
    InvalidConfig(String),
    #[error("invalid disturbance: {0}")]
    InvalidDisturbance(String),
    #[error("marker leaves the frame at frame {frame}")]
    MarkerOutOfFrame { frame: usize },
    #[error("reference tag leaves the frame at frame {frame}")]
    TagOutOfFrame { frame: usize },
    #[error("motion sampled at {motion} Hz but the camera runs at {fps} fps")]
    RateMismatch { motion: f64, fps: f64 },
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SceneError> = std::result::Result<T, E>;
