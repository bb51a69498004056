use super::{InitialConditions, Result, SdofModel, StructError};
use crate::scalar::Real;
use crate::signalkit::{TimeSeries, Unit};

/// Closed-form underdamped free vibration
/// `e^(-ζωt) [u0 cos(ω_d t) + (v0 + ζω u0) / ω_d sin(ω_d t)]`.
pub fn free_vibration_analytic<T: Real>(
    m: &SdofModel<T>,
    ic: &InitialConditions<T>,
    sample_rate: T,
    duration: T,
) -> Result<TimeSeries<T>> {
    if !(m.damping_ratio < T::one()) {
        return Err(StructError::NotUnderdamped(m.damping_ratio.as_f64()));
    }
    m.validate()?;
    if !(sample_rate > T::zero() && duration > T::zero()) {
        return Err(StructError::InvalidModel("sample rate and duration must be positive".into()));
    }
    let zeta = m.damping_ratio;
    let w = m.angular_frequency();
    let wd = w * (T::one() - zeta * zeta).sqrt();
    let (u0, v0) = (ic.displacement, ic.velocity);
    let b = (v0 + zeta * w * u0) / wd;
    let n = (duration * sample_rate).round().to_usize().unwrap_or(0) + 1;
    Ok(TimeSeries::from_fn(n, sample_rate, Unit::METERS, |t| {
        (-zeta * w * t).exp() * (u0 * (wd * t).cos() + b * (wd * t).sin())
    })?)
}
