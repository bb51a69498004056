use serde::{Deserialize, Serialize};

use super::{Result, StructError};
use crate::scalar::Real;

/// Effective modal mass, stiffness and damping of the first sway mode.
/// Damage is modelled as a proof mass added to the roof.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdofModel<T = f64> {
    /// kg
    pub mass: T,
    /// N/m
    pub stiffness: T,
    pub damping_ratio: T,
    /// kg
    #[serde(default)]
    pub added_mass: T,
}

impl<T: Real> SdofModel<T> {
    pub fn new(mass: T, stiffness: T, damping_ratio: T) -> Result<Self> {
        let m = Self { mass, stiffness, damping_ratio, added_mass: T::zero() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(StructError::InvalidModel(what.to_string()));
        if !(self.mass > T::zero() && self.mass.is_finite()) {
            return bad("mass must be positive");
        }
        if !(self.stiffness > T::zero() && self.stiffness.is_finite()) {
            return bad("stiffness must be positive");
        }
        if !(self.damping_ratio >= T::zero() && self.damping_ratio < T::one()) {
            return bad("damping ratio must lie in [0, 1)");
        }
        if !(self.added_mass >= T::zero() && self.added_mass.is_finite()) {
            return bad("added mass must be non-negative");
        }
        Ok(())
    }

    pub fn with_added_mass(self, added_mass: T) -> Self {
        Self { added_mass, ..self }
    }

    pub fn total_mass(&self) -> T {
        self.mass + self.added_mass
    }

    /// rad/s
    pub fn angular_frequency(&self) -> T {
        (self.stiffness / self.total_mass()).sqrt()
    }

    /// Viscous coefficient `2 ζ sqrt(k M)`, N·s/m.
    pub fn damping_coefficient(&self) -> T {
        T::lit(2.0) * self.damping_ratio * (self.stiffness * self.total_mass()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct InitialConditions<T = f64> {
    /// m
    pub displacement: T,
    /// m/s
    pub velocity: T,
}

impl<T: Real> InitialConditions<T> {
    pub fn at_rest() -> Self {
        Self { displacement: T::zero(), velocity: T::zero() }
    }

    pub fn displaced(displacement: T) -> Self {
        Self { displacement, velocity: T::zero() }
    }
}

/// Undamped natural frequency in Hz, including any added mass.
pub fn natural_frequency<T: Real>(m: &SdofModel<T>) -> T {
    m.angular_frequency() / T::TAU()
}

/// Solves for the mass and stiffness that reproduce a healthy frequency and,
/// once `delta_m` is added, a damaged one. Damping is left at zero.
pub fn calibrate_to_frequencies<T: Real>(f_healthy: T, f_damaged: T, delta_m: T) -> Result<SdofModel<T>> {
    if !(f_damaged > T::zero() && f_damaged.is_finite() && f_healthy.is_finite()) {
        return Err(StructError::InvalidModel(format!("frequencies must be positive, got {f_healthy}/{f_damaged}")));
    }
    if !(f_healthy > f_damaged) {
        return Err(StructError::FrequencyOrder { f_healthy: f_healthy.as_f64(), f_damaged: f_damaged.as_f64() });
    }
    if !(delta_m > T::zero() && delta_m.is_finite()) {
        return Err(StructError::InvalidModel(format!("added mass must be positive, got {delta_m}")));
    }
    let ratio = f_healthy / f_damaged;
    let mass = delta_m / (ratio * ratio - T::one());
    let omega = T::TAU() * f_healthy;
    let stiffness = mass * omega * omega;
    SdofModel::new(mass, stiffness, T::zero())
}
