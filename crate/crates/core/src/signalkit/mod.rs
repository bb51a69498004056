//! Time-series conditioning, spectral estimation, fundamental-frequency
//! identification and frequency-shift damage metrics.

mod damage;
mod detrend;
mod differentiate;
mod io;
mod peak;
mod welch;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use damage::{assess_damage, assess_damage_with_threshold, percent_error, DamageAssessment, Reference, ReferenceSource};
pub use detrend::{detrend, DetrendMode};
pub use differentiate::{differentiate, DiffConfig, DiffMethod};
pub use io::{read_spectrum_csv, read_timeseries_csv, write_spectrum_csv, write_timeseries_csv};
pub use peak::{find_fundamental, ModalEstimate};
pub use welch::{welch_psd, Spectrum, WelchConfig, Window};

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("time series needs at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("sample rate must be positive and finite, got {0}")]
    BadSampleRate(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("frequency band ({lo}, {hi}) Hz does not cover any spectral bin")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("no spectral peak: psd is zero everywhere in ({lo}, {hi}) Hz")]
    NoPeak { lo: f64, hi: f64 },
    #[error("reference frequency must be positive, got {0}")]
    BadReference(f64),
    #[error("malformed csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SignalError> = std::result::Result<T, E>;

/// Physical quantity carried by a series before any time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BaseUnit {
    Meters,
    Pixels,
    #[default]
    Unitless,
}

/// `base / s^derivative_order`, e.g. m/s² is `Meters` with order 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Unit {
    pub base: BaseUnit,
    pub derivative_order: u8,
}

impl Unit {
    pub const METERS: Unit = Unit { base: BaseUnit::Meters, derivative_order: 0 };
    pub const METERS_PER_SECOND: Unit = Unit { base: BaseUnit::Meters, derivative_order: 1 };
    pub const METERS_PER_SECOND_SQUARED: Unit = Unit { base: BaseUnit::Meters, derivative_order: 2 };
    pub const PIXELS: Unit = Unit { base: BaseUnit::Pixels, derivative_order: 0 };
    pub const UNITLESS: Unit = Unit { base: BaseUnit::Unitless, derivative_order: 0 };

    pub fn derivative(self) -> Unit {
        Unit { base: self.base, derivative_order: self.derivative_order + 1 }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.base {
            BaseUnit::Meters => "m",
            BaseUnit::Pixels => "px",
            BaseUnit::Unitless => "1",
        };
        match self.derivative_order {
            0 => write!(f, "{base}"),
            1 => write!(f, "{base}/s"),
            n => write!(f, "{base}/s^{n}"),
        }
    }
}

/// Uniformly sampled real-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T = f64> {
    samples: Vec<T>,
    sample_rate: T,
    t0: T,
    unit: Unit,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(samples: Vec<T>, sample_rate: T, unit: Unit) -> Result<Self> {
        Self::with_start(samples, sample_rate, T::zero(), unit)
    }

    pub fn with_start(samples: Vec<T>, sample_rate: T, t0: T, unit: Unit) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > T::zero()) {
            return Err(SignalError::BadSampleRate(sample_rate.as_f64()));
        }
        if !t0.is_finite() {
            return Err(SignalError::InvalidConfig("t0 must be finite".into()));
        }
        if samples.len() < 2 {
            return Err(SignalError::TooShort { needed: 2, got: samples.len() });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite(i));
        }
        Ok(Self { samples, sample_rate, t0, unit })
    }

    /// Samples `f(t)` at `t = k / sample_rate` for `k` in `0..n`.
    pub fn from_fn(n: usize, sample_rate: T, unit: Unit, f: impl Fn(T) -> T) -> Result<Self> {
        let dt = T::one() / sample_rate;
        let samples = (0..n).map(|k| f(T::count(k) * dt)).collect();
        Self::new(samples, sample_rate, unit)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn dt(&self) -> T {
        T::one() / self.sample_rate
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + T::count(k) / self.sample_rate
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    pub fn mean(&self) -> T {
        self.samples.iter().copied().sum::<T>() / T::count(self.len())
    }

    pub fn rms(&self) -> T {
        (self.samples.iter().map(|&v| v * v).sum::<T>() / T::count(self.len())).sqrt()
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.samples.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::count(self.len())
    }

    /// Same timing, new values. Used by operations that preserve length.
    pub(crate) fn with_samples(&self, samples: Vec<T>, unit: Unit) -> Self {
        debug_assert_eq!(samples.len(), self.samples.len());
        Self { samples, sample_rate: self.sample_rate, t0: self.t0, unit }
    }

    /// Multiplies every sample by `c`.
    pub fn scaled(&self, c: T) -> Self {
        self.with_samples(self.samples.iter().map(|&v| v * c).collect(), self.unit)
    }

    /// Keeps every `factor`-th sample.
    pub fn decimate(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(SignalError::InvalidConfig("decimation factor must be >= 1".into()));
        }
        let samples = self.samples.iter().step_by(factor).copied().collect();
        Self::with_start(samples, self.sample_rate / T::count(factor), self.t0, self.unit)
    }
}
