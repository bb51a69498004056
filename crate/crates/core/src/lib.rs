//! Non-contact vibration measurement and frequency-shift damage detection.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`structsim`] integrates a single-degree-of-freedom model of a frame
//!    structure under base excitation or free vibration.
//! 2. [`scenegen`] renders that motion as a synthetic grayscale video of a
//!    marker on the structure next to a stationary reference tag, optionally
//!    shaken by a hovering camera platform.
//! 3. [`uavsim`] simulates the tag search, alignment and hover-hold logic
//!    that produces the platform's camera trajectory.
//! 4. [`tracker`] recovers the marker motion by normalized cross-correlation
//!    with sub-pixel refinement, and removes platform motion using the
//!    reference tag.
//! 5. [`signalkit`] turns displacement into a power spectral density, picks
//!    the fundamental frequency and scores the shift caused by damage.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the common `f64` instantiations.

// Negated comparisons are used deliberately so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod scalar;
pub mod scenegen;
pub mod signalkit;
pub mod structsim;
pub mod tracker;
pub mod uavsim;

pub use scalar::Real;

pub type TimeSeriesF64 = signalkit::TimeSeries<f64>;
pub type TimeSeriesF32 = signalkit::TimeSeries<f32>;
pub type SpectrumF64 = signalkit::Spectrum<f64>;
pub type SpectrumF32 = signalkit::Spectrum<f32>;
pub type ModalEstimateF64 = signalkit::ModalEstimate<f64>;
pub type ModalEstimateF32 = signalkit::ModalEstimate<f32>;
pub type DamageAssessmentF64 = signalkit::DamageAssessment<f64>;
pub type SdofModelF64 = structsim::SdofModel<f64>;
pub type SdofModelF32 = structsim::SdofModel<f32>;
pub type PixelTraceF64 = tracker::PixelTrace<f64>;
pub type PixelTraceF32 = tracker::PixelTrace<f32>;
