use super::{natural_frequency, InitialConditions, Result, SdofModel, StructError};
use crate::scalar::Real;
use crate::signalkit::{TimeSeries, Unit};

/// Relative displacement, velocity and acceleration histories.
#[derive(Debug, Clone, PartialEq)]
pub struct Response<T = f64> {
    pub displacement: TimeSeries<T>,
    pub velocity: TimeSeries<T>,
    pub acceleration: TimeSeries<T>,
}

/// Integrates `M ü + c u̇ + k u = -M a_b(t)` in coordinates relative to the
/// base, with `M = mass + added_mass`, using the constant-average-acceleration
/// Newmark scheme (γ = 1/2, β = 1/4).
pub fn newmark_response<T: Real>(
    m: &SdofModel<T>,
    base_accel: &TimeSeries<T>,
    ic: &InitialConditions<T>,
) -> Result<Response<T>> {
    m.validate()?;
    let fs = base_accel.sample_rate();
    let required = T::lit(20.0) * natural_frequency(m);
    if fs < required {
        return Err(StructError::SampleRateTooLow { sample_rate: fs.as_f64(), required: required.as_f64() });
    }
    if !(ic.displacement.is_finite() && ic.velocity.is_finite()) {
        return Err(StructError::InvalidModel("initial conditions must be finite".into()));
    }

    let mass = m.total_mass();
    let c = m.damping_coefficient();
    let k = m.stiffness;
    let dt = base_accel.dt();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let k_eff = k + two * c / dt + four * mass / (dt * dt);

    let n = base_accel.len();
    let force = |i: usize| -mass * base_accel.samples()[i];
    let (mut u, mut v) = (ic.displacement, ic.velocity);
    let mut a = (force(0) - c * v - k * u) / mass;
    let (mut us, mut vs, mut as_) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    us.push(u);
    vs.push(v);
    as_.push(a);
    for i in 1..n {
        let p_eff = force(i) + mass * (four * u / (dt * dt) + four * v / dt + a) + c * (two * u / dt + v);
        let u_next = p_eff / k_eff;
        let v_next = two * (u_next - u) / dt - v;
        let a_next = four * (u_next - u) / (dt * dt) - four * v / dt - a;
        u = u_next;
        v = v_next;
        a = a_next;
        us.push(u);
        vs.push(v);
        as_.push(a);
    }
    let t0 = base_accel.t0();
    Ok(Response {
        displacement: TimeSeries::with_start(us, fs, t0, Unit::METERS)?,
        velocity: TimeSeries::with_start(vs, fs, t0, Unit::METERS_PER_SECOND)?,
        acceleration: TimeSeries::with_start(as_, fs, t0, Unit::METERS_PER_SECOND_SQUARED)?,
    })
}
