use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::detrend::{detrend_in_place, DetrendMode};
use super::{Result, SignalError, TimeSeries, Unit};
use crate::scalar::Real;

/// Segment taper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Hann,
    Hamming,
    Rectangular,
}

impl Window {
    /// Periodic (DFT-even) window coefficients.
    pub fn coefficients<T: Real>(self, len: usize) -> Vec<T> {
        let n = T::count(len);
        (0..len)
            .map(|i| {
                let phase = T::TAU() * T::count(i) / n;
                match self {
                    Window::Hann => T::lit(0.5) - T::lit(0.5) * phase.cos(),
                    Window::Hamming => T::lit(0.54) - T::lit(0.46) * phase.cos(),
                    Window::Rectangular => T::one(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_length: usize,
    pub overlap_fraction: f64,
    pub window: Window,
    pub detrend: DetrendMode,
}

impl WelchConfig {
    pub fn new(segment_length: usize) -> Self {
        Self { segment_length, overlap_fraction: 0.5, window: Window::Hann, detrend: DetrendMode::Linear }
    }

    /// Hann, 50 % overlap, linear detrend, and a segment length equal to the
    /// largest power of two not above `n / 4`, raised to 256 when the signal
    /// is long enough.
    pub fn default_for_length(n: usize) -> Self {
        let pow2_floor = |m: usize| if m == 0 { 0 } else { 1usize << (usize::BITS - 1 - m.leading_zeros()) };
        let mut len = pow2_floor(n / 4);
        if len < 256 {
            len = pow2_floor(n).min(256);
        }
        Self::new(len.max(8))
    }

    fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(SignalError::TooShort { needed: self.segment_length.max(1), got: 0 });
        }
        if self.segment_length < 8 {
            return Err(SignalError::InvalidConfig(format!(
                "segment_length must be >= 8, got {}",
                self.segment_length
            )));
        }
        if self.segment_length > n {
            return Err(SignalError::InvalidConfig(format!(
                "segment_length {} exceeds signal length {n}",
                self.segment_length
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(SignalError::InvalidConfig(format!(
                "overlap_fraction must be in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        Ok(())
    }

    fn step(&self) -> usize {
        ((self.segment_length as f64 * (1.0 - self.overlap_fraction)).round() as usize).max(1)
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T = f64> {
    frequencies: Vec<T>,
    psd: Vec<T>,
    resolution: T,
    unit: Unit,
}

impl<T: Real> Spectrum<T> {
    /// Validates and wraps externally produced spectral data.
    pub fn new(frequencies: Vec<T>, psd: Vec<T>, unit: Unit) -> Result<Self> {
        if frequencies.len() != psd.len() {
            return Err(SignalError::InvalidConfig("frequency and psd lengths differ".into()));
        }
        if frequencies.len() < 2 {
            return Err(SignalError::TooShort { needed: 2, got: frequencies.len() });
        }
        if frequencies[0] < T::zero() || frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SignalError::InvalidConfig("frequencies must start at >= 0 and increase strictly".into()));
        }
        if let Some(i) = psd.iter().position(|p| !p.is_finite() || *p < T::zero()) {
            return Err(SignalError::InvalidConfig(format!("psd[{i}] is negative or non-finite")));
        }
        let resolution = frequencies[1] - frequencies[0];
        Ok(Self { frequencies, psd, resolution, unit })
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    pub fn psd(&self) -> &[T] {
        &self.psd
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    /// Unit of the underlying signal; psd is in unit²/Hz.
    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.psd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psd.is_empty()
    }

    /// Rectangle-rule integral of the psd over frequency.
    pub fn total_power(&self) -> T {
        self.psd.iter().copied().sum::<T>() * self.resolution
    }
}

/// Welch-averaged periodogram, scaled as a one-sided density so that the
/// integral over frequency equals the signal variance.
pub fn welch_psd<T: Real>(x: &TimeSeries<T>, cfg: &WelchConfig) -> Result<Spectrum<T>> {
    let n = x.len();
    cfg.validate(n)?;
    let len = cfg.segment_length;
    let step = cfg.step();
    let fs = x.sample_rate();

    let window: Vec<T> = cfg.window.coefficients(len);
    let window_power: T = window.iter().map(|&w| w * w).sum();
    let fft = FftPlanner::<T>::new().plan_fft_forward(len);

    let bins = len / 2 + 1;
    let mut acc = vec![T::zero(); bins];
    let mut segment = vec![T::zero(); len];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
    let mut count = 0usize;
    let mut start = 0usize;
    while start + len <= n {
        segment.copy_from_slice(&x.samples()[start..start + len]);
        detrend_in_place(&mut segment, cfg.detrend);
        for ((b, &s), &w) in buf.iter_mut().zip(&segment).zip(&window) {
            *b = Complex::new(s * w, T::zero());
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf[..bins]) {
            *a = *a + c.norm_sqr();
        }
        count += 1;
        start += step;
    }

    let scale = T::one() / (fs * window_power * T::count(count));
    let nyquist_bin = if len.is_multiple_of(2) { Some(len / 2) } else { None };
    let psd: Vec<T> = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || Some(k) == nyquist_bin { T::one() } else { T::lit(2.0) };
            p * scale * one_sided
        })
        .collect();
    let resolution = fs / T::count(len);
    let frequencies = (0..bins).map(|k| T::count(k) * resolution).collect();
    Ok(Spectrum { frequencies, psd, resolution, unit: x.unit() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    /// Direct O(N²) DFT periodogram of one Hann-windowed segment.
    fn dft_periodogram(xs: &[f64], fs: f64) -> Vec<f64> {
        let n = xs.len();
        let w: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect();
        let wp: f64 = w.iter().map(|v| v * v).sum();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, (&x, &wi)) in xs.iter().zip(&w).enumerate() {
                    let a = -2.0 * PI * (k * i) as f64 / n as f64;
                    re += x * wi * a.cos();
                    im += x * wi * a.sin();
                }
                let p = (re * re + im * im) / (fs * wp);
                if k == 0 || k == n / 2 { p } else { 2.0 * p }
            })
            .collect()
    }

    fn sine(freq: f64, amp: f64, fs: f64, secs: f64) -> TimeSeries<f64> {
        TimeSeries::from_fn((fs * secs) as usize, fs, Unit::METERS, |t| amp * (2.0 * PI * freq * t).sin()).unwrap()
    }

    #[test]
    fn matches_direct_dft_single_segment() {
        let x = sine(5.0, 1.0, 60.0, 64.0 / 60.0 * 4.0);
        let xs = &x.samples()[..256];
        let single = TimeSeries::new(xs.to_vec(), 60.0, Unit::METERS).unwrap();
        let cfg = WelchConfig { detrend: DetrendMode::None, ..WelchConfig::new(256) };
        let s = welch_psd(&single, &cfg).unwrap();
        let oracle = dft_periodogram(xs, 60.0);
        for (a, b) in s.psd().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn zero_signal_zero_psd() {
        let x = TimeSeries::new(vec![0.0; 512], 100.0, Unit::METERS).unwrap();
        let s = welch_psd(&x, &WelchConfig::new(64)).unwrap();
        assert!(s.psd().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn unit_sine_parseval_and_peak() {
        let x = sine(5.0, 1.0, 60.0, 60.0);
        let s = welch_psd(&x, &WelchConfig::new(1024)).unwrap();
        assert!((s.resolution() - 60.0 / 1024.0).abs() < 1e-12);
        let (k, _) = s.psd().iter().enumerate().fold((0, 0.0), |a, (i, &p)| if p > a.1 { (i, p) } else { a });
        assert!((s.frequencies()[k] - 5.0).abs() <= s.resolution());
        assert!((s.total_power() - 0.5).abs() / 0.5 < 0.02, "power {}", s.total_power());
    }

    #[test]
    fn white_noise_level() {
        let fs = 100.0;
        let mut means = Vec::new();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, 1.0).unwrap();
            let xs: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
            let x = TimeSeries::new(xs, fs, Unit::UNITLESS).unwrap();
            let s = welch_psd(&x, &WelchConfig::new(512)).unwrap();
            let interior = &s.psd()[1..s.len() - 1];
            means.push(interior.iter().sum::<f64>() / interior.len() as f64);
        }
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        assert!((mean - 0.02).abs() / 0.02 < 0.10, "mean level {mean}");
    }

    #[test]
    fn rejects_bad_configs() {
        let x = sine(5.0, 1.0, 60.0, 2.0);
        assert!(welch_psd(&x, &WelchConfig::new(4096)).is_err());
        assert!(welch_psd(&x, &WelchConfig::new(4)).is_err());
        let cfg = WelchConfig { overlap_fraction: 1.0, ..WelchConfig::new(32) };
        assert!(welch_psd(&x, &cfg).is_err());
    }

    #[test]
    fn default_segment_length() {
        assert_eq!(WelchConfig::default_for_length(3600).segment_length, 512);
        assert_eq!(WelchConfig::default_for_length(900).segment_length, 256);
        assert_eq!(WelchConfig::default_for_length(16384).segment_length, 4096);
        assert_eq!(WelchConfig::default_for_length(100).segment_length, 64);
    }
}
