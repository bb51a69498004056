use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Result, SceneError};
use crate::signalkit::{TimeSeries, Unit};
use crate::tracker::Axis;

/// Image-plane camera motion of a hovering platform, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceModel {
    /// Random-walk step per frame, px.
    pub drift_sigma: f64,
    pub rotor_amplitude: f64,
    /// Hz; must stay below the frame-rate Nyquist limit.
    pub rotor_frequency: f64,
    /// White positional noise per frame, px.
    pub jitter_sigma: f64,
    pub seed: u64,
}

impl Default for DisturbanceModel {
    fn default() -> Self {
        Self { drift_sigma: 0.0, rotor_amplitude: 0.0, rotor_frequency: 14.0, jitter_sigma: 0.0, seed: 0 }
    }
}

impl DisturbanceModel {
    pub fn none() -> Self {
        Self { rotor_frequency: 0.0, ..Self::default() }
    }

    pub fn validate(&self, fps: f64) -> Result<()> {
        let bad = |msg: String| Err(SceneError::InvalidDisturbance(msg));
        for (name, v) in [
            ("drift_sigma", self.drift_sigma),
            ("rotor_amplitude", self.rotor_amplitude),
            ("rotor_frequency", self.rotor_frequency),
            ("jitter_sigma", self.jitter_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.rotor_frequency >= fps / 2.0 {
            return bad(format!(
                "rotor frequency {} Hz is at or above the Nyquist limit {} Hz of {} fps",
                self.rotor_frequency,
                fps / 2.0,
                fps
            ));
        }
        Ok(())
    }
}

/// Per-frame camera offset, px. Positive `u` moves scene content right,
/// positive `v` moves it down.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraOffset {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub rate: f64,
}

impl CameraOffset {
    pub fn zeros(n: usize, rate: f64) -> Self {
        Self { u: vec![0.0; n], v: vec![0.0; n], rate }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn along(&self, axis: Axis) -> Result<TimeSeries<f64>> {
        let xs = match axis {
            Axis::Horizontal => self.u.clone(),
            Axis::Vertical => self.v.clone(),
        };
        Ok(TimeSeries::new(xs, self.rate, Unit::PIXELS)?)
    }

    /// Element-wise sum; lengths and rates must agree.
    pub fn plus(&self, other: &CameraOffset) -> Result<CameraOffset> {
        if self.len() != other.len() || (self.rate - other.rate).abs() > 1e-9 * self.rate {
            return Err(SceneError::InvalidDisturbance("camera offsets differ in length or rate".into()));
        }
        Ok(CameraOffset {
            u: self.u.iter().zip(&other.u).map(|(a, b)| a + b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect(),
            rate: self.rate,
        })
    }

    /// Linear interpolation onto `n` samples at `rate`, holding the last
    /// value past the end.
    pub fn resample(&self, rate: f64, n: usize) -> CameraOffset {
        let interp = |xs: &[f64], t: f64| -> f64 {
            if xs.is_empty() {
                return 0.0;
            }
            let pos = t * self.rate;
            let i = pos.floor() as usize;
            if i + 1 >= xs.len() {
                return *xs.last().unwrap();
            }
            let frac = pos - i as f64;
            xs[i] * (1.0 - frac) + xs[i + 1] * frac
        };
        let times = (0..n).map(|k| k as f64 / rate);
        CameraOffset {
            u: times.clone().map(|t| interp(&self.u, t)).collect(),
            v: times.map(|t| interp(&self.v, t)).collect(),
            rate,
        }
    }
}

/// `random walk(σ_drift) + A sin(2π f t + φ) + white jitter` on each image
/// axis, with independent seeded phases and noise per axis.
pub fn inject_platform_disturbance(n_frames: usize, fps: f64, d: &DisturbanceModel) -> Result<CameraOffset> {
    d.validate(fps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
    let phase_u = rng.random::<f64>() * std::f64::consts::TAU;
    let phase_v = rng.random::<f64>() * std::f64::consts::TAU;
    let step = Normal::new(0.0, d.drift_sigma).map_err(|e| SceneError::InvalidDisturbance(e.to_string()))?;
    let jitter = Normal::new(0.0, d.jitter_sigma).map_err(|e| SceneError::InvalidDisturbance(e.to_string()))?;

    let mut out = CameraOffset::zeros(n_frames, fps);
    let (mut walk_u, mut walk_v) = (0.0, 0.0);
    for k in 0..n_frames {
        if k > 0 {
            walk_u += step.sample(&mut rng);
            walk_v += step.sample(&mut rng);
        }
        let wt = std::f64::consts::TAU * d.rotor_frequency * k as f64 / fps;
        out.u[k] = walk_u + d.rotor_amplitude * (wt + phase_u).sin() + jitter.sample(&mut rng);
        out.v[k] = walk_v + d.rotor_amplitude * (wt + phase_v).sin() + jitter.sample(&mut rng);
    }
    Ok(out)
}
