//! Single-degree-of-freedom model of the frame prototype: chirp base
//! excitation, implicit time integration, closed-form free vibration and
//! added-mass damage.

mod analytic;
mod chirp;
mod model;
mod newmark;

use thiserror::Error;

use crate::signalkit::SignalError;

pub use analytic::free_vibration_analytic;
pub use chirp::{chirp_excitation, ChirpParams};
pub use model::{calibrate_to_frequencies, natural_frequency, InitialConditions, SdofModel};
pub use newmark::{newmark_response, Response};

#[derive(Debug, Error)]
pub enum StructError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid chirp: {0}")]
    InvalidChirp(String),
    #[error("sample rate {sample_rate} Hz must exceed {required} Hz")]
    SampleRateTooLow { sample_rate: f64, required: f64 },
    #[error("added mass cannot raise frequency: healthy {f_healthy} Hz must exceed damaged {f_damaged} Hz")]
    FrequencyOrder { f_healthy: f64, f_damaged: f64 },
    #[error("damping ratio {0} is not underdamped")]
    NotUnderdamped(f64),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

pub type Result<T, E = StructError> = std::result::Result<T, E>;
