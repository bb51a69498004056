use serde::{Deserialize, Serialize};

use super::{Result, SignalError, TimeSeries};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiffMethod {
    Central,
    #[default]
    Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffConfig {
    pub method: DiffMethod,
    /// Moving-average length in samples (odd); only used by `Smoothed`.
    pub smooth_window: usize,
}

impl DiffConfig {
    pub fn central() -> Self {
        Self { method: DiffMethod::Central, smooth_window: 1 }
    }

    pub fn smoothed(smooth_window: usize) -> Self {
        Self { method: DiffMethod::Smoothed, smooth_window }
    }

    /// Smoothed difference with a 50 ms moving average (3 samples at 60 Hz),
    /// rounded to the nearest odd length. The first null of the prefilter
    /// then sits at 20 Hz regardless of the sample rate.
    pub fn for_sample_rate(sample_rate: f64) -> Self {
        let raw = (sample_rate * 0.05).round().max(1.0) as usize;
        let window = if raw.is_multiple_of(2) { raw + 1 } else { raw };
        Self::smoothed(window)
    }
}

/// First time derivative. Interior points use the central difference and the
/// two endpoints use second-order one-sided differences, so affine signals are
/// differentiated exactly.
pub fn differentiate<T: Real>(x: &TimeSeries<T>, cfg: DiffConfig) -> Result<TimeSeries<T>> {
    let n = x.len();
    if n < 3 {
        return Err(SignalError::TooShort { needed: 3, got: n });
    }
    let smoothed;
    let input: &[T] = match cfg.method {
        DiffMethod::Central => x.samples(),
        DiffMethod::Smoothed => {
            let w = cfg.smooth_window;
            if w == 0 || w.is_multiple_of(2) {
                return Err(SignalError::InvalidConfig(format!("smooth_window must be odd and >= 1, got {w}")));
            }
            if w > n {
                return Err(SignalError::InvalidConfig(format!(
                    "smooth_window {w} exceeds signal length {n}"
                )));
            }
            smoothed = moving_average(x.samples(), w);
            &smoothed
        }
    };
    let half_dt_inv = x.sample_rate() / T::lit(2.0);
    let mut out = Vec::with_capacity(n);
    out.push((T::lit(-3.0) * input[0] + T::lit(4.0) * input[1] - input[2]) * half_dt_inv);
    out.extend(input.windows(3).map(|w| (w[2] - w[0]) * half_dt_inv));
    out.push((T::lit(3.0) * input[n - 1] - T::lit(4.0) * input[n - 2] + input[n - 3]) * half_dt_inv);
    Ok(x.with_samples(out, x.unit().derivative()))
}

/// Centred moving average whose window shrinks symmetrically near the ends,
/// which keeps affine signals unchanged.
fn moving_average<T: Real>(xs: &[T], window: usize) -> Vec<T> {
    let n = xs.len();
    let half = window / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(T::zero());
    for &v in xs {
        let last = *prefix.last().unwrap();
        prefix.push(last + v);
    }
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let (lo, hi) = (i - h, i + h + 1);
            (prefix[hi] - prefix[lo]) / T::count(hi - lo)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalkit::Unit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    fn rel_rms_interior(est: &[f64], truth: &[f64], skip: usize) -> f64 {
        let n = est.len();
        let (mut e, mut r) = (0.0, 0.0);
        for i in skip..n - skip {
            e += (est[i] - truth[i]).powi(2);
            r += truth[i].powi(2);
        }
        (e / r).sqrt()
    }

    #[test]
    fn exact_on_linear() {
        let x = TimeSeries::<f64>::from_fn(200, 100.0, Unit::METERS, |t| t).unwrap();
        let d = differentiate(&x, DiffConfig::central()).unwrap();
        assert!(d.samples().iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert_eq!(d.unit(), Unit::METERS_PER_SECOND);
        assert_eq!(d.sample_rate(), 100.0);
    }

    #[test]
    fn smoothed_is_exact_on_affine() {
        let x = TimeSeries::<f64>::from_fn(300, 60.0, Unit::METERS, |t| 2.0 - 0.7 * t).unwrap();
        let d = differentiate(&x, DiffConfig::smoothed(11)).unwrap();
        assert!(d.samples().iter().all(|v| (v + 0.7).abs() < 1e-9 * 0.7 + 1e-12));
    }

    #[test]
    fn sine_matches_analytic_derivative() {
        let fs = 500.0;
        let w = 2.0 * PI * 5.0;
        let x = TimeSeries::<f64>::from_fn(2500, fs, Unit::METERS, |t| (w * t).sin()).unwrap();
        let truth: Vec<f64> = x.times().map(|t| w * (w * t).cos()).collect();
        let d = differentiate(&x, DiffConfig::central()).unwrap();
        assert!(rel_rms_interior(d.samples(), &truth, 1) < 1e-3);
    }

    #[test]
    fn smoothed_suppresses_noise() {
        let fs = 500.0;
        let w = 2.0 * PI * 5.0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let samples: Vec<f64> = (0..2500).map(|k| (w * k as f64 / fs).sin() + noise.sample(&mut rng)).collect();
        let x = TimeSeries::new(samples, fs, Unit::METERS).unwrap();
        let truth: Vec<f64> = x.times().map(|t| w * (w * t).cos()).collect();
        let d = differentiate(&x, DiffConfig::smoothed(11)).unwrap();
        let err = rel_rms_interior(d.samples(), &truth, 5);
        assert!(err < 0.05, "relative rms error {err}");
    }

    #[test]
    fn window_larger_than_signal_rejected() {
        let x = TimeSeries::<f64>::from_fn(5, 10.0, Unit::METERS, |t| t).unwrap();
        assert!(matches!(differentiate(&x, DiffConfig::smoothed(7)), Err(SignalError::InvalidConfig(_))));
        assert!(matches!(differentiate(&x, DiffConfig::smoothed(4)), Err(SignalError::InvalidConfig(_))));
    }

    #[test]
    fn too_short_rejected() {
        let x = TimeSeries::new(vec![0.0, 1.0], 10.0, Unit::METERS).unwrap();
        assert!(matches!(differentiate(&x, DiffConfig::central()), Err(SignalError::TooShort { .. })));
    }

    #[test]
    fn default_window_scales_with_rate() {
        assert_eq!(DiffConfig::for_sample_rate(60.0).smooth_window, 3);
        assert_eq!(DiffConfig::for_sample_rate(30.0).smooth_window, 3);
        assert_eq!(DiffConfig::for_sample_rate(120.0).smooth_window, 7);
        assert_eq!(DiffConfig::for_sample_rate(500.0).smooth_window, 25);
    }
}
