//! Scalar Dormand–Prince 5(4) integrator with threshold-event localization.
//!
//! Only autonomous scalar right-hand sides are needed here: within a forcing
//! phase the input is constant, so each phase is an autonomous flow.

use crate::error::{Error, Result};

/// Step-control and event tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Width of the final time bracket around a threshold crossing.
    pub event_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-10, atol: 1e-12, event_tol: 1e-12 }
    }
}

/// Result of integrating toward a threshold over a bounded duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Advance {
    /// The threshold was reached at this elapsed time (never past the duration).
    Hit(f64),
    /// The duration elapsed first; this is the final state.
    Reached(f64),
}

const MAX_STEPS: usize = 10_000_000;

// Dormand–Prince coefficients
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One DP5 step of signed size `h`; returns (y, f(y), local error estimate).
#[inline]
fn dp_step<F: Fn(f64) -> f64>(rhs: &F, x: f64, k1: f64, h: f64) -> (f64, f64, f64) {
    let k2 = rhs(x + h * (A21 * k1));
    let k3 = rhs(x + h * (A31 * k1 + A32 * k2));
    let k4 = rhs(x + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = rhs(x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = rhs(x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let y = x + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = rhs(y);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    (y, k7, err)
}

fn initial_step<F: Fn(f64) -> f64>(rhs: &F, x0: f64, f0: f64, dir: f64, tol: &Tolerances) -> f64 {
    let sc = tol.atol + tol.rtol * x0.abs();
    let d0 = x0.abs() / sc;
    let d1 = f0.abs() / sc;
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let f1 = rhs(x0 + dir * h0 * f0);
    let d2 = (f1 - f0).abs() / sc / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
    (100.0 * h0).min(h1)
}

fn drive<F: Fn(f64) -> f64>(
    rhs: &F,
    x0: f64,
    duration: f64,
    threshold: Option<f64>,
    tol: &Tolerances,
) -> Result<Advance> {
    if let Some(th) = threshold {
        if x0 >= th {
            return Ok(Advance::Hit(0.0));
        }
    }
    if duration == 0.0 {
        return Ok(Advance::Reached(x0));
    }
    let dir = duration.signum();
    let total = duration.abs();
    let mut t = 0.0;
    let mut x = x0;
    let mut k1 = rhs(x);
    if !k1.is_finite() {
        return Err(Error::IntegrationFailure { t: 0.0, h: 0.0 });
    }
    let mut h = initial_step(rhs, x, k1, dir, tol).min(total);
    for _ in 0..MAX_STEPS {
        let last = t + h >= total;
        if last {
            h = total - t;
        }
        let (y, k7, err) = dp_step(rhs, x, k1, dir * h);
        let sc = tol.atol + tol.rtol * x.abs().max(y.abs());
        let e = if y.is_finite() && err.is_finite() { err.abs() / sc } else { f64::INFINITY };
        if e <= 1.0 {
            if let Some(th) = threshold {
                if y >= th {
                    let tau = localize(rhs, x, k1, h, dir, th, tol.event_tol);
                    return Ok(Advance::Hit((t + tau).min(total)));
                }
            }
            if last {
                return Ok(Advance::Reached(y));
            }
            t += h;
            x = y;
            k1 = k7;
            let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h <= 1e-15 * t.max(1.0) {
            return Err(Error::IntegrationFailure { t: dir * t, h });
        }
    }
    Err(Error::IntegrationFailure { t: dir * t, h })
}

/// Bisects the crossing inside an accepted step by re-stepping from its
/// start with shorter sizes. Returns the earliest offset known to be at or
/// past the threshold.
fn localize<F: Fn(f64) -> f64>(
    rhs: &F,
    x: f64,
    k1: f64,
    h: f64,
    dir: f64,
    th: f64,
    event_tol: f64,
) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > event_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (ym, _, _) = dp_step(rhs, x, k1, dir * mid);
        if ym >= th {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Integrates `x' = rhs(x)` over a signed duration.
pub fn integrate<F: Fn(f64) -> f64>(rhs: F, x0: f64, duration: f64, tol: &Tolerances) -> Result<f64> {
    match drive(&rhs, x0, duration, None, tol)? {
        Advance::Reached(x) => Ok(x),
        Advance::Hit(_) => unreachable!("no threshold given"),
    }
}

/// Integrates forward until `x >= threshold` or `duration` elapses. A
/// crossing that lands exactly on the end of the interval counts as a hit.
pub fn integrate_to_threshold<F: Fn(f64) -> f64>(
    rhs: F,
    x0: f64,
    duration: f64,
    threshold: f64,
    tol: &Tolerances,
) -> Result<Advance> {
    if duration < 0.0 {
        return Err(Error::InvalidParameter("negative duration".into()));
    }
    drive(&rhs, x0, duration, Some(threshold), tol)
}
