//! Marker displacement extraction from grayscale frame sequences by
//! zero-normalized cross-correlation with sub-pixel peak refinement.

mod calibrate;
mod frame;
mod io;
mod ncc;
mod pgm;
mod track;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signalkit::SignalError;

pub use calibrate::{calibrate_trace, scale_from_marker, CalibrationScale};
pub use frame::{Frame, FrameSequence, Rect};
pub use io::{load_frames, read_trace_csv, save_frames, write_trace_csv, Manifest};
pub use ncc::{ncc, CorrelationSurface};
pub use pgm::{decode_pgm, encode_pgm};
pub use track::{compensate_reference, track_marker, PixelTrace, Template, TrackConfig};

/// Image axis a displacement is read along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    #[default]
    Horizontal,
    Vertical,
}

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("missing frame file {0}")]
    MissingFrame(String),
    #[error("dimension mismatch at frame {index}: expected {expected:?}, found {found:?}")]
    DimensionMismatch { index: usize, expected: (usize, usize), found: (usize, usize) },
    #[error("unsupported format in {path}: {reason}")]
    UnsupportedFormat { path: String, reason: String },
    #[error("bad manifest {path}: {reason}")]
    Manifest { path: String, reason: String },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("untrackable template: intensity is constant over the patch")]
    UntrackableTemplate,
    #[error("track lost at frame {frame} (peak score {score:.3})")]
    TrackLost { frame: usize, score: f64 },
    #[error("search radius exhausted at frame {frame}")]
    SearchRadiusExhausted { frame: usize },
    #[error("trace length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed trace csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = TrackError> = std::result::Result<T, E>;
