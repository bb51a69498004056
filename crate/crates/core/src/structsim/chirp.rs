use serde::{Deserialize, Serialize};

use super::{Result, StructError};
use crate::scalar::Real;
use crate::signalkit::{TimeSeries, Unit};

/// Linear sweep `A sin(2π (f_a + (f_b - f_a) t / (2T)) t)` of base acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpParams<T = f64> {
    /// Peak base acceleration, m/s².
    pub amplitude: T,
    pub f_start: T,
    pub f_end: T,
    /// Sweep duration T, s.
    pub duration: T,
}

impl<T: Real> ChirpParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > T::zero() && self.duration.is_finite()) {
            return Err(StructError::InvalidChirp("sweep duration must be positive".into()));
        }
        if !(self.f_start >= T::zero() && self.f_end >= T::zero() && self.f_start.is_finite() && self.f_end.is_finite()) {
            return Err(StructError::InvalidChirp("frequencies must be non-negative".into()));
        }
        if !self.amplitude.is_finite() {
            return Err(StructError::InvalidChirp("amplitude must be finite".into()));
        }
        Ok(())
    }

    /// Phase derivative over 2π, Hz.
    pub fn instantaneous_frequency(&self, t: T) -> T {
        self.f_start + (self.f_end - self.f_start) * t / self.duration
    }

    pub fn value(&self, t: T) -> T {
        let sweep = (self.f_end - self.f_start) / (T::lit(2.0) * self.duration);
        self.amplitude * (T::TAU() * (self.f_start + sweep * t) * t).sin()
    }
}

/// Samples the sweep at `k / sample_rate` for `t` in `[0, duration]`.
pub fn chirp_excitation<T: Real>(p: &ChirpParams<T>, sample_rate: T, duration: T) -> Result<TimeSeries<T>> {
    p.validate()?;
    let required = T::lit(2.0) * p.f_start.max(p.f_end);
    if !(sample_rate > required) {
        return Err(StructError::SampleRateTooLow { sample_rate: sample_rate.as_f64(), required: required.as_f64() });
    }
    if !(duration > T::zero() && duration.is_finite()) {
        return Err(StructError::InvalidChirp("record duration must be positive".into()));
    }
    let n = (duration * sample_rate).round().to_usize().unwrap_or(0) + 1;
    Ok(TimeSeries::from_fn(n, sample_rate, Unit::METERS_PER_SECOND_SQUARED, |t| p.value(t))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_crossings(x: &TimeSeries<f64>) -> Vec<f64> {
        let s = x.samples();
        let dt = x.dt();
        s.windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1] && (w[0] <= 0.0) != (w[1] <= 0.0))
            .map(|(i, w)| (i as f64 + w[0] / (w[0] - w[1])) * dt)
            .collect()
    }

    #[test]
    fn starts_at_zero() {
        let p = ChirpParams { amplitude: 3.0, f_start: 2.0, f_end: 7.0, duration: 4.0 };
        let x = chirp_excitation(&p, 100.0, 4.0).unwrap();
        assert_eq!(x.samples()[0], 0.0);
    }

    #[test]
    fn degenerate_chirp_is_sine() {
        let p = ChirpParams { amplitude: 2.5, f_start: 5.0, f_end: 5.0, duration: 10.0 };
        let x = chirp_excitation(&p, 200.0, 10.0).unwrap();
        for (t, v) in x.times().zip(x.samples()) {
            assert!((v - 2.5 * (std::f64::consts::TAU * 5.0 * t).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn final_frequency_from_zero_crossings() {
        let p = ChirpParams { amplitude: 1.0, f_start: 1.0, f_end: 10.0, duration: 30.0 };
        let x = chirp_excitation(&p, 1000.0, 30.5).unwrap();
        let zc = zero_crossings(&x);
        let i = zc.iter().position(|&t| t > 30.0).unwrap();
        let spacing = zc[i] - zc[i - 1];
        let f = 1.0 / (2.0 * spacing);
        assert!((f - 10.0).abs() / 10.0 < 0.02, "{f}");
        assert!((p.instantaneous_frequency(30.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn instantaneous_frequency_is_affine() {
        let p = ChirpParams::<f64> { amplitude: 1.0, f_start: 2.0, f_end: 8.0, duration: 12.0 };
        let slope = (p.f_end - p.f_start) / p.duration;
        for t in [0.0, 1.0, 3.7, 12.0] {
            assert!((p.instantaneous_frequency(t) - (2.0 + slope * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn nyquist_violation_rejected() {
        let p = ChirpParams { amplitude: 1.0, f_start: 1.0, f_end: 30.0, duration: 5.0 };
        assert!(matches!(chirp_excitation(&p, 50.0, 5.0), Err(StructError::SampleRateTooLow { .. })));
    }
}
