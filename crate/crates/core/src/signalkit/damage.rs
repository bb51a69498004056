use serde::{Deserialize, Serialize};

use super::{ModalEstimate, Result, SignalError};
use crate::scalar::Real;

/// `100 * |f - f_ref| / f_ref`.
pub fn percent_error<T: Real>(f: T, f_ref: T) -> Result<T> {
    if !(f_ref > T::zero() && f_ref.is_finite()) {
        return Err(SignalError::BadReference(f_ref.as_f64()));
    }
    if !f.is_finite() {
        return Err(SignalError::InvalidConfig(format!("frequency must be finite, got {f}")));
    }
    Ok(T::lit(100.0) * ((f - f_ref) / f_ref).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    /// Contact accelerometer measurement.
    #[default]
    ContactSensor,
    /// Numerical model prediction.
    FeModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference<T = f64> {
    pub source: ReferenceSource,
    pub healthy: T,
    pub damaged: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamageAssessment<T = f64> {
    pub f_healthy: T,
    pub f_damaged: T,
    /// `f_healthy - f_damaged`; positive when the added mass lowered the frequency.
    pub shift: T,
    pub percent_error_healthy: T,
    pub percent_error_damaged: T,
    pub reference: Reference<T>,
    pub threshold: T,
    pub damage_detected: bool,
}

/// Compares healthy and damaged estimates against contact-sensor references,
/// flagging damage when the shift exceeds three times the coarser spectral
/// resolution of the two estimates.
pub fn assess_damage<T: Real>(
    healthy: &ModalEstimate<T>,
    damaged: &ModalEstimate<T>,
    reference_healthy: T,
    reference_damaged: T,
) -> Result<DamageAssessment<T>> {
    let threshold = T::lit(3.0) * healthy.resolution.max(damaged.resolution);
    let reference = Reference { source: ReferenceSource::ContactSensor, healthy: reference_healthy, damaged: reference_damaged };
    assess_damage_with_threshold(healthy, damaged, reference, threshold)
}

pub fn assess_damage_with_threshold<T: Real>(
    healthy: &ModalEstimate<T>,
    damaged: &ModalEstimate<T>,
    reference: Reference<T>,
    threshold: T,
) -> Result<DamageAssessment<T>> {
    for (name, f) in [("healthy", healthy.frequency), ("damaged", damaged.frequency)] {
        if !(f > T::zero() && f.is_finite()) {
            return Err(SignalError::InvalidConfig(format!("{name} frequency must be positive, got {f}")));
        }
    }
    if !(threshold >= T::zero() && threshold.is_finite()) {
        return Err(SignalError::InvalidConfig(format!("threshold must be non-negative, got {threshold}")));
    }
    let shift = healthy.frequency - damaged.frequency;
    Ok(DamageAssessment {
        f_healthy: healthy.frequency,
        f_damaged: damaged.frequency,
        shift,
        percent_error_healthy: percent_error(healthy.frequency, reference.healthy)?,
        percent_error_damaged: percent_error(damaged.frequency, reference.damaged)?,
        reference,
        threshold,
        damage_detected: shift > threshold,
    })
}
