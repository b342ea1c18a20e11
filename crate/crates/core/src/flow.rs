//! Autonomous flows, the spike time `delta` and the hybrid (reset) flow.

use crate::error::{Error, Result};
use crate::integrate::{integrate, integrate_to_threshold, Advance, Tolerances};
use crate::model::{SystemParams, VectorFieldSpec, HYPOTHESIS_GRID, RESET_VALUE};

/// Numerical settings for every flow evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Numerics {
    pub tol: Tolerances,
    /// Integrate the linear family numerically instead of using its closed form.
    pub force_numeric: bool,
}

impl Numerics {
    pub fn numeric() -> Self {
        Numerics { force_numeric: true, ..Default::default() }
    }

    fn closed_form(&self, field: &VectorFieldSpec) -> Option<(f64, f64)> {
        match *field {
            VectorFieldSpec::Linear { a, b } if !self.force_numeric => Some((a, b)),
            _ => None,
        }
    }
}

fn linear_flow(a: f64, b: f64, amp: f64, x0: f64, t: f64) -> f64 {
    let c = b + amp;
    if a == 0.0 {
        return x0 + c * t;
    }
    let x_star = -c / a;
    x0 + (x0 - x_star) * (a * t).exp_m1()
}

fn linear_hit_time(a: f64, b: f64, amp: f64, x0: f64, theta: f64) -> Option<f64> {
    if x0 >= theta {
        return Some(0.0);
    }
    let c = b + amp;
    if a * x0 + c <= 0.0 {
        return None;
    }
    if a == 0.0 {
        return Some((theta - x0) / c);
    }
    if a < 0.0 && a * theta + c <= 0.0 {
        return None;
    }
    let x_star = -c / a;
    Some(((theta - x0) / (x0 - x_star)).ln_1p() / a)
}

/// `phi(t; x0; A)` with explicit numerics. Negative `t` integrates backward.
pub fn flow_with(field: &VectorFieldSpec, amp: f64, x0: f64, t: f64, num: &Numerics) -> Result<f64> {
    if t == 0.0 {
        return Ok(x0);
    }
    match num.closed_form(field) {
        Some((a, b)) => Ok(linear_flow(a, b, amp, x0, t)),
        None => integrate(|x| field.f(x) + amp, x0, t, &num.tol),
    }
}

/// `phi(t; x0; A)`, the autonomous flow of `f + A` without threshold handling.
pub fn flow_autonomous(field: &VectorFieldSpec, amp: f64, x0: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    flow_with(field, amp, x0, t, &Numerics::default())
}

/// Flows `f + A` from `x0` until `theta` is reached or `duration` elapses.
pub fn advance(
    field: &VectorFieldSpec,
    amp: f64,
    x0: f64,
    duration: f64,
    theta: f64,
    num: &Numerics,
) -> Result<Advance> {
    match num.closed_form(field) {
        Some((a, b)) => Ok(match linear_hit_time(a, b, amp, x0, theta) {
            Some(t) if t <= duration => Advance::Hit(t),
            _ => Advance::Reached(linear_flow(a, b, amp, x0, duration)),
        }),
        None => integrate_to_threshold(|x| field.f(x) + amp, x0, duration, theta, &num.tol),
    }
}

/// Minimum of `f + A` over a grid of `[0, theta]` including both ends.
fn min_drive(field: &VectorFieldSpec, amp: f64, theta: f64) -> f64 {
    (0..=HYPOTHESIS_GRID)
        .map(|i| field.f(theta * i as f64 / HYPOTHESIS_GRID as f64) + amp)
        .fold(f64::INFINITY, f64::min)
}

/// Time for the trajectory from the reset value to reach `theta` under
/// `f + A`, or `None` when it never does.
pub fn spike_time_delta_with(
    field: &VectorFieldSpec,
    amp: f64,
    theta: f64,
    num: &Numerics,
) -> Result<Option<f64>> {
    if let Some((a, b)) = num.closed_form(field) {
        return Ok(linear_hit_time(a, b, amp, RESET_VALUE, theta));
    }
    let m = min_drive(field, amp, theta);
    if !(m > 0.0) {
        return Ok(None);
    }
    // the crossing takes at most theta / min(f + A)
    let horizon = 2.0 * theta / m + 1.0;
    match advance(field, amp, RESET_VALUE, horizon, theta, num)? {
        Advance::Hit(t) => Ok(Some(t)),
        Advance::Reached(_) => Ok(None),
    }
}

/// [`spike_time_delta_with`] at default numerics.
pub fn spike_time_delta(field: &VectorFieldSpec, amp: f64, theta: f64) -> Result<Option<f64>> {
    spike_time_delta_with(field, amp, theta, &Numerics::default())
}

/// Piecewise trajectory of the hybrid system.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HybridTrajectory {
    /// `(t, x)` pairs, strictly increasing in `t`. A reset appears as `(t_spike, 0)`.
    pub samples: Vec<(f64, f64)>,
    pub spike_times: Vec<f64>,
    /// Times `kT + dT` and `kT` where the input switched.
    pub switch_times: Vec<f64>,
}

impl HybridTrajectory {
    fn push(&mut self, t: f64, x: f64) {
        match self.samples.last_mut() {
            Some(last) if t <= last.0 => {
                if t == last.0 {
                    last.1 = x;
                }
            }
            _ => self.samples.push((t, x)),
        }
    }
}

/// Integrates the hybrid system from `x0` at `t = 0` to `t_end`, sampling
/// every `T / 100` as well as at switches and resets.
pub fn hybrid_flow(system: &SystemParams, x0: f64, t_end: f64) -> Result<HybridTrajectory> {
    hybrid_flow_with(system, x0, t_end, 100, &Numerics::default())
}

/// [`hybrid_flow`] with explicit sampling density and numerics. With
/// `samples_per_period == 0` only switch and reset instants are sampled.
pub fn hybrid_flow_with(
    system: &SystemParams,
    x0: f64,
    t_end: f64,
    samples_per_period: usize,
    num: &Numerics,
) -> Result<HybridTrajectory> {
    system.validate()?;
    let theta = system.theta;
    if !(0.0..theta).contains(&x0) {
        return Err(Error::InvalidParameter(format!("x0={x0} outside [0, theta)")));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter("t_end must be > 0".into()));
    }
    let field = system.field;
    let fr = system.forcing;
    let period = fr.t;
    let dt = if samples_per_period > 0 { period / samples_per_period as f64 } else { f64::INFINITY };

    let mut out = HybridTrajectory::default();
    out.samples.push((0.0, x0));
    let mut x = x0;
    let mut k: u64 = 0;
    loop {
        let base = k as f64 * period;
        if base >= t_end {
            break;
        }
        // (start, end, amplitude) of the two phases of period k
        let phases = [
            (base, base + fr.on_duration(), fr.a),
            (base + fr.on_duration(), base + period, 0.0),
        ];
        for (i, &(start, end, amp)) in phases.iter().enumerate() {
            if end <= start {
                continue;
            }
            let stop = end.min(t_end);
            let mut t = start;
            // sample grid points are multiples of dt
            let mut g = if dt.is_finite() { (start / dt).floor() as u64 + 1 } else { u64::MAX };
            while t < stop {
                let next_grid = if dt.is_finite() { g as f64 * dt } else { f64::INFINITY };
                let target = next_grid.min(stop);
                match advance(&field, amp, x, target - t, theta, num)? {
                    Advance::Hit(tau) => {
                        let ts = t + tau;
                        if let Some(&last) = out.spike_times.last() {
                            if ts <= last {
                                return Err(Error::IntegrationFailure { t: ts, h: 0.0 });
                            }
                        }
                        out.spike_times.push(ts);
                        x = RESET_VALUE;
                        t = ts;
                        out.push(t, x);
                        while dt.is_finite() && (g as f64 * dt) <= t {
                            g += 1;
                        }
                    }
                    Advance::Reached(y) => {
                        x = y;
                        t = target;
                        out.push(t, x);
                        if target == next_grid {
                            g += 1;
                        }
                    }
                }
            }
            // the input only switches when the other phase has positive length
            let other = phases[1 - i];
            if end <= t_end && other.1 > other.0 {
                out.switch_times.push(end);
            }
            if end >= t_end {
                return Ok(out);
            }
        }
        k += 1;
    }
    Ok(out)
}
