use serde::{Deserialize, Serialize};

use super::{Result, SignalError, TimeSeries};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DetrendMode {
    None,
    Mean,
    #[default]
    Linear,
}

/// Removes the mean or the least-squares line from a series.
pub fn detrend<T: Real>(x: &TimeSeries<T>, mode: DetrendMode) -> Result<TimeSeries<T>> {
    if x.len() < 2 {
        return Err(SignalError::TooShort { needed: 2, got: x.len() });
    }
    if let Some(i) = x.samples().iter().position(|v| !v.is_finite()) {
        return Err(SignalError::NonFinite(i));
    }
    let mut out = x.samples().to_vec();
    detrend_in_place(&mut out, mode);
    Ok(x.with_samples(out, x.unit()))
}

pub(crate) fn detrend_in_place<T: Real>(xs: &mut [T], mode: DetrendMode) {
    let n = xs.len();
    if n == 0 {
        return;
    }
    match mode {
        DetrendMode::None => {}
        DetrendMode::Mean => {
            let m = xs.iter().copied().sum::<T>() / T::count(n);
            xs.iter_mut().for_each(|v| *v = *v - m);
        }
        DetrendMode::Linear => {
            // Centred abscissa keeps the normal equations diagonal.
            let centre = T::count(n - 1) / T::lit(2.0);
            let mean = xs.iter().copied().sum::<T>() / T::count(n);
            let (mut sxy, mut sxx) = (T::zero(), T::zero());
            for (i, &v) in xs.iter().enumerate() {
                let t = T::count(i) - centre;
                sxy = sxy + t * (v - mean);
                sxx = sxx + t * t;
            }
            let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
            for (i, v) in xs.iter_mut().enumerate() {
                *v = *v - mean - slope * (T::count(i) - centre);
            }
        }
    }
}
