use serde::{Deserialize, Serialize};

use super::{Result, SignalError, Spectrum};
use crate::scalar::Real;

/// Identified fundamental frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalEstimate<T = f64> {
    pub frequency: T,
    pub peak_power: T,
    pub resolution: T,
    pub band: (T, T),
}

/// Dominant PSD peak inside `band`, refined by a three-point parabola through
/// the log-power of the peak bin and its neighbours.
pub fn find_fundamental<T: Real>(s: &Spectrum<T>, band: (T, T)) -> Result<ModalEstimate<T>> {
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(SignalError::EmptyBand { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let freqs = s.frequencies();
    let psd = s.psd();
    let mut best: Option<(usize, T)> = None;
    for (k, (&f, &p)) in freqs.iter().zip(psd).enumerate() {
        if f < lo || f > hi {
            continue;
        }
        // Strict comparison keeps the lowest-frequency bin on ties.
        match best {
            Some((_, bp)) if p <= bp => {}
            _ => best = Some((k, p)),
        }
    }
    let (k, peak) = best.ok_or(SignalError::EmptyBand { lo: lo.as_f64(), hi: hi.as_f64() })?;
    if peak <= T::zero() {
        return Err(SignalError::NoPeak { lo: lo.as_f64(), hi: hi.as_f64() });
    }

    let offset = if k > 0 && k + 1 < psd.len() {
        parabolic_offset(psd[k - 1], psd[k], psd[k + 1])
    } else {
        T::zero()
    };
    let frequency = (freqs[k] + offset * s.resolution()).max(lo).min(hi);
    Ok(ModalEstimate { frequency, peak_power: peak, resolution: s.resolution(), band })
}

/// Vertex offset in bins, within [-0.5, 0.5]. Falls back to linear power when
/// a neighbour is zero and the logarithm is undefined.
fn parabolic_offset<T: Real>(left: T, centre: T, right: T) -> T {
    let (a, b, c) = if left > T::zero() && right > T::zero() {
        (left.ln(), centre.ln(), right.ln())
    } else {
        (left, centre, right)
    };
    let denom = a - T::lit(2.0) * b + c;
    if denom.abs() <= T::epsilon() * b.abs().max(T::one()) {
        return T::zero();
    }
    let half = T::lit(0.5);
    (half * (a - c) / denom).max(-half).min(half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalkit::{welch_psd, TimeSeries, Unit, WelchConfig};
    use std::f64::consts::PI;

    fn two_sines() -> Spectrum<f64> {
        let x = TimeSeries::from_fn(3600, 60.0, Unit::METERS, |t| {
            (2.0 * PI * 5.0 * t).sin() + 0.3 * (2.0 * PI * 12.0 * t).sin()
        })
        .unwrap();
        welch_psd(&x, &WelchConfig::new(1024)).unwrap()
    }

    #[test]
    fn unit_sine_refined_within_half_bin() {
        let x = TimeSeries::from_fn(3600, 60.0, Unit::METERS, |t| (2.0 * PI * 5.0 * t).sin()).unwrap();
        let s = welch_psd(&x, &WelchConfig::new(1024)).unwrap();
        let est = find_fundamental(&s, (1.0, 15.0)).unwrap();
        assert!((est.frequency - 5.0).abs() <= s.resolution() / 2.0, "{}", est.frequency);
        assert!(est.band.0 <= est.frequency && est.frequency <= est.band.1);
    }

    #[test]
    fn dominant_and_band_restricted_peaks() {
        let s = two_sines();
        let full = find_fundamental(&s, (1.0, 15.0)).unwrap();
        assert!((full.frequency - 5.0).abs() < s.resolution());
        let upper = find_fundamental(&s, (8.0, 15.0)).unwrap();
        assert!((upper.frequency - 12.0).abs() < s.resolution());
    }

    #[test]
    fn empty_and_zero_bands() {
        let s = two_sines();
        assert!(matches!(find_fundamental(&s, (5.0, 5.0)), Err(SignalError::EmptyBand { .. })));
        assert!(matches!(find_fundamental(&s, (40.0, 50.0)), Err(SignalError::EmptyBand { .. })));
        let zero = Spectrum::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0; 4], Unit::METERS).unwrap();
        assert!(matches!(find_fundamental(&zero, (0.5, 3.0)), Err(SignalError::NoPeak { .. })));
    }

    #[test]
    fn ties_prefer_lower_frequency() {
        let s = Spectrum::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 1.0, 0.0, 1.0, 0.0], Unit::METERS).unwrap();
        let est = find_fundamental(&s, (0.5, 4.0)).unwrap();
        assert_eq!(est.frequency, 1.0);
    }
}
