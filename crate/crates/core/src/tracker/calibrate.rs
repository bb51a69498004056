use serde::{Deserialize, Serialize};

use super::{Axis, PixelTrace, Result, TrackError};
use crate::scalar::Real;
use crate::signalkit::{TimeSeries, Unit};

/// Pixel-to-length conversion along one image axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationScale<T = f64> {
    pub meters_per_pixel: T,
    pub axis: Axis,
}

impl<T: Real> CalibrationScale<T> {
    pub fn new(meters_per_pixel: T, axis: Axis) -> Result<Self> {
        if !(meters_per_pixel > T::zero() && meters_per_pixel.is_finite()) {
            return Err(TrackError::InvalidInput(format!("meters_per_pixel must be positive, got {meters_per_pixel}")));
        }
        Ok(Self { meters_per_pixel, axis })
    }
}

/// Scale from a feature of known physical size measured in the image.
pub fn scale_from_marker<T: Real>(known_size_m: T, measured_size_px: T, axis: Axis) -> Result<CalibrationScale<T>> {
    if !(known_size_m > T::zero() && measured_size_px > T::zero()) {
        return Err(TrackError::InvalidInput(format!(
            "marker sizes must be positive, got {known_size_m} m and {measured_size_px} px"
        )));
    }
    CalibrationScale::new(known_size_m / measured_size_px, axis)
}

/// Physical displacement along the scale's axis, sampled at `fps`.
pub fn calibrate_trace<T: Real>(trace: &PixelTrace<T>, scale: &CalibrationScale<T>, fps: T) -> Result<TimeSeries<T>> {
    CalibrationScale::new(scale.meters_per_pixel, scale.axis)?;
    let samples = trace.axis(scale.axis).iter().map(|&p| p * scale.meters_per_pixel).collect();
    Ok(TimeSeries::new(samples, fps, Unit::METERS)?)
}
