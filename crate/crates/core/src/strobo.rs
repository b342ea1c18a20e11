//! The time-T stroboscopic map, its spike-count partition and discontinuity.

use crate::error::{Error, Result};
use crate::flow::{advance, flow_with, spike_time_delta_with, Numerics};
use crate::integrate::Advance;
use crate::model::{SystemParams, RESET_VALUE};

/// Bisection tolerance for the boundary `Sigma_n`.
pub const SIGMA_TOL: f64 = 1e-11;
/// Step size below which fixed-point iteration is considered converged.
pub const FP_STEP_TOL: f64 = 1e-12;
/// Maximum residual `|s(x) - x|` accepted for a fixed point.
pub const FP_RESIDUAL_TOL: f64 = 1e-10;
/// Iteration cap for fixed-point search.
pub const FP_MAX_ITER: usize = 10_000;
/// Distance to the boundary under which a point counts as a border candidate.
pub const BORDER_TOL: f64 = 1e-9;

/// One evaluation of the stroboscopic map.
#[derive(Debug, Clone, PartialEq)]
pub struct StroboResult {
    pub x_t: f64,
    pub spikes: u32,
    pub spike_times: Vec<f64>,
}

/// Boundary value, lateral images and normal-form offsets at `Sigma_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOffsets {
    pub n: u32,
    pub sigma: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    pub mu_l: f64,
    pub mu_r: f64,
}

impl GapOffsets {
    /// Both offsets positive: the boundary lies inside an adding window.
    pub fn in_adding_window(&self) -> bool {
        self.mu_l > 0.0 && self.mu_r > 0.0
    }
}

/// A fixed point of the map on branch `S_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub x_bar: f64,
    pub branch_n: u32,
    pub multiplier: f64,
}

/// The stroboscopic map of one system, with `delta` and the lateral values
/// precomputed.
#[derive(Debug, Clone)]
pub struct StroboMap {
    system: SystemParams,
    num: Numerics,
    delta_on: Option<f64>,
    delta_off: Option<f64>,
    s_minus: f64,
    s_plus: f64,
}

impl StroboMap {
    pub fn new(system: &SystemParams) -> Result<Self> {
        Self::with_numerics(system, Numerics::default())
    }

    pub fn with_numerics(system: &SystemParams, num: Numerics) -> Result<Self> {
        system.validate()?;
        let field = system.field;
        let theta = system.theta;
        let fr = system.forcing;
        let delta_on = if fr.d > 0.0 { spike_time_delta_with(&field, fr.a, theta, &num)? } else { None };
        let delta_off = if fr.d < 1.0 { spike_time_delta_with(&field, 0.0, theta, &num)? } else { None };
        let off = fr.off_duration();
        let s_minus = flow_with(&field, 0.0, theta, off, &num)?;
        let s_plus = flow_with(&field, 0.0, RESET_VALUE, off, &num)?;
        Ok(StroboMap { system: *system, num, delta_on, delta_off, s_minus, s_plus })
    }

    pub fn system(&self) -> &SystemParams {
        &self.system
    }

    pub fn numerics(&self) -> &Numerics {
        &self.num
    }

    pub fn theta(&self) -> f64 {
        self.system.theta
    }

    /// `delta(A)` for the on-phase amplitude.
    pub fn delta(&self) -> Option<f64> {
        self.delta_on
    }

    /// `(s_minus, s_plus)`: the off-phase images of `theta` and of the reset value.
    pub fn lateral_values(&self) -> (f64, f64) {
        (self.s_minus, self.s_plus)
    }

    /// Flows one constant-input phase with resets. Spikes after the first one
    /// follow the chain `t1 + j*delta`, so the count agrees with the boundary
    /// equation used in [`StroboMap::sigma`].
    fn run_phase(
        &self,
        x0: f64,
        amp: f64,
        duration: f64,
        delta: Option<f64>,
        t0: f64,
        mut times: Option<&mut Vec<f64>>,
    ) -> Result<(f64, u32)> {
        if duration <= 0.0 {
            return Ok((x0, 0));
        }
        let field = &self.system.field;
        let theta = self.system.theta;
        let t1 = match advance(field, amp, x0, duration, theta, &self.num)? {
            Advance::Reached(y) => return Ok((y, 0)),
            Advance::Hit(t1) => t1,
        };
        let mut count: u64 = 1;
        if let Some(v) = times.as_deref_mut() {
            v.push(t0 + t1);
        }
        let mut last = t1;
        if let Some(del) = delta {
            let k = chain_length(t1, del, duration);
            if let Some(v) = times.as_deref_mut() {
                v.extend((1..=k).map(|j| t0 + t1 + j as f64 * del));
            }
            count += k;
            last = t1 + k as f64 * del;
        }
        loop {
            let rem = duration - last;
            if rem <= 0.0 {
                return Ok((RESET_VALUE, to_u32(count)?));
            }
            match advance(field, amp, RESET_VALUE, rem, theta, &self.num)? {
                Advance::Reached(y) => return Ok((y, to_u32(count)?)),
                Advance::Hit(t) => {
                    count += 1;
                    last += t;
                    if let Some(v) = times.as_deref_mut() {
                        v.push(t0 + last);
                    }
                }
            }
        }
    }

    fn evaluate(&self, x0: f64, mut times: Option<&mut Vec<f64>>) -> Result<(f64, u32)> {
        let theta = self.system.theta;
        if !(x0 >= 0.0 && x0 < theta) {
            return Err(Error::InvalidParameter(format!("x0={x0} outside [0, theta)")));
        }
        let fr = self.system.forcing;
        if fr.d <= 0.0 {
            return self.run_phase(x0, 0.0, fr.t, self.delta_off, 0.0, times);
        }
        if fr.d >= 1.0 {
            return self.run_phase(x0, fr.a, fr.t, self.delta_on, 0.0, times);
        }
        let on = fr.on_duration();
        let (x1, n1) = self.run_phase(x0, fr.a, on, self.delta_on, 0.0, times.as_deref_mut())?;
        let (x2, n2) = self.run_phase(x1, 0.0, fr.t - on, self.delta_off, on, times)?;
        Ok((x2, n1 + n2))
    }

    /// `s(x0)` with its spike times.
    pub fn apply(&self, x0: f64) -> Result<StroboResult> {
        let mut times = Vec::new();
        let (x_t, spikes) = self.evaluate(x0, Some(&mut times))?;
        Ok(StroboResult { x_t, spikes, spike_times: times })
    }

    /// `s(x0)` and the spike count, without recording times.
    #[inline]
    pub fn step(&self, x0: f64) -> Result<(f64, u32)> {
        self.evaluate(x0, None)
    }

    pub fn spike_count(&self, x0: f64) -> Result<u32> {
        Ok(self.step(x0)?.1)
    }

    /// Whether the on-phase from `x` produces at least `n` spikes.
    fn reaches(&self, x: f64, n: u32, delta: f64) -> Result<bool> {
        let fr = self.system.forcing;
        let on = fr.on_duration();
        match advance(&self.system.field, fr.a, x, on, self.system.theta, &self.num)? {
            Advance::Reached(_) => Ok(false),
            Advance::Hit(t1) => Ok(t1 + (n - 1) as f64 * delta <= on),
        }
    }

    /// Boundary `Sigma_n` between `S_{n-1}` and `S_n`: the initial condition
    /// whose n-th spike lands exactly at `t = dT`.
    pub fn sigma(&self, n: u32) -> Result<Option<f64>> {
        if n == 0 {
            return Err(Error::InvalidParameter("boundary index must be >= 1".into()));
        }
        let fr = self.system.forcing;
        if fr.d <= 0.0 {
            return Ok(None);
        }
        let delta = self.delta_on.ok_or(Error::NoSpikeRegime { amplitude: fr.a })?;
        let on = fr.on_duration();
        let t_n = on - (n - 1) as f64 * delta;
        if t_n <= 0.0 {
            return Ok(None);
        }
        if self.reaches(RESET_VALUE, n, delta)? {
            // the chain from the reset value already fits: Sigma_n <= 0, and
            // equals 0 only when the last spike grazes dT
            let graze = (n as f64 * delta - on).abs() <= 1e-12 * on.max(1.0);
            return Ok(if graze { Some(RESET_VALUE) } else { None });
        }
        let (mut lo, mut hi) = (RESET_VALUE, self.system.theta);
        while hi - lo > SIGMA_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.reaches(mid, n, delta)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(if hi < self.system.theta { Some(hi) } else { None })
    }

    /// The single boundary present in `[0, theta)`, if any, as `(n, Sigma_n)`.
    pub fn active_boundary(&self) -> Result<Option<(u32, f64)>> {
        let fr = self.system.forcing;
        let Some(delta) = self.delta_on.filter(|_| fr.d > 0.0) else {
            return Ok(None);
        };
        let ratio = fr.on_duration() / delta;
        if ratio > u32::MAX as f64 / 2.0 {
            return Err(Error::InvalidParameter("too many spikes per period".into()));
        }
        let c = ratio.ceil().max(1.0) as u32;
        for n in [c, c + 1, c.saturating_sub(1).max(1)] {
            if let Some(s) = self.sigma(n)? {
                return Ok(Some((n, s)));
            }
        }
        Ok(None)
    }

    pub fn gap_offsets(&self, n: u32) -> Result<GapOffsets> {
        let sigma = self.sigma(n)?.ok_or(Error::BoundaryAbsent { n })?;
        Ok(GapOffsets {
            n,
            sigma,
            s_minus: self.s_minus,
            s_plus: self.s_plus,
            mu_l: self.s_minus - sigma,
            mu_r: sigma - self.s_plus,
        })
    }

    /// Finite-difference slope of the map at `x`, kept on the branch of `x`.
    pub fn slope(&self, x: f64, h: f64) -> Result<f64> {
        let theta = self.system.theta;
        let (fx, n) = self.step(x)?;
        let side = |y: f64| -> Result<Option<f64>> {
            if !(0.0..theta).contains(&y) {
                return Ok(None);
            }
            let (fy, m) = self.step(y)?;
            Ok((m == n).then_some(fy))
        };
        match (side(x - h)?, side(x + h)?) {
            (Some(a), Some(b)) => Ok((b - a) / (2.0 * h)),
            (None, Some(b)) => Ok((b - fx) / h),
            (Some(a), None) => Ok((fx - a) / h),
            (None, None) => Err(Error::InvalidParameter(format!("no branch neighbourhood at x={x}"))),
        }
    }

    /// Iterates to a fixed point from the seeds `0`, `theta/2`, `theta - eps`.
    pub fn fixed_point(&self) -> Result<Option<FixedPoint>> {
        self.fixed_point_with_tol(FP_RESIDUAL_TOL)
    }

    /// [`StroboMap::fixed_point`] with an explicit residual tolerance.
    pub fn fixed_point_with_tol(&self, residual_tol: f64) -> Result<Option<FixedPoint>> {
        let theta = self.system.theta;
        let seeds = [RESET_VALUE, 0.5 * theta, theta * (1.0 - 1e-9)];
        let boundary = self.active_boundary()?;
        for &seed in &seeds {
            let mut x = seed;
            let mut converged = false;
            for _ in 0..FP_MAX_ITER {
                let (y, _) = self.step(x)?;
                let done = (y - x).abs() <= FP_STEP_TOL;
                x = y;
                if done {
                    converged = true;
                    break;
                }
            }
            if !converged {
                continue;
            }
            let (img, n) = self.step(x)?;
            if (img - x).abs() > residual_tol || self.spike_count(img)? != n {
                continue;
            }
            if let Some((_, s)) = boundary {
                // a boundary sitting on the reset value is not a discontinuity
                // inside the state space
                if s > RESET_VALUE && (x - s).abs() <= BORDER_TOL {
                    return Ok(None);
                }
            }
            let multiplier = self.slope(x, 1e-6 * theta)?;
            return Ok(Some(FixedPoint { x_bar: x, branch_n: n, multiplier }));
        }
        Ok(None)
    }
}

fn to_u32(c: u64) -> Result<u32> {
    u32::try_from(c).map_err(|_| Error::InvalidParameter("spike count overflow".into()))
}

/// Largest `k` with `t1 + k*delta <= duration`.
fn chain_length(t1: f64, delta: f64, duration: f64) -> u64 {
    let mut k = ((duration - t1) / delta).floor().max(0.0) as u64;
    while t1 + (k + 1) as f64 * delta <= duration {
        k += 1;
    }
    while k > 0 && t1 + k as f64 * delta > duration {
        k -= 1;
    }
    k
}

/// One evaluation of the map at default numerics.
pub fn strobo_map(system: &SystemParams, x0: f64) -> Result<StroboResult> {
    StroboMap::new(system)?.apply(x0)
}

pub fn spike_count(system: &SystemParams, x0: f64) -> Result<u32> {
    StroboMap::new(system)?.spike_count(x0)
}

pub fn sigma_boundary(system: &SystemParams, n: u32) -> Result<Option<f64>> {
    StroboMap::new(system)?.sigma(n)
}

/// `(s_minus, s_plus)`. These never depend on the amplitude.
pub fn lateral_values(system: &SystemParams) -> Result<(f64, f64)> {
    let num = Numerics::default();
    let off = system.forcing.off_duration();
    let s_minus = flow_with(&system.field, 0.0, system.theta, off, &num)?;
    let s_plus = flow_with(&system.field, 0.0, RESET_VALUE, off, &num)?;
    Ok((s_minus, s_plus))
}

pub fn gap_offsets(system: &SystemParams, n: u32) -> Result<GapOffsets> {
    StroboMap::new(system)?.gap_offsets(n)
}

pub fn fixed_point(system: &SystemParams) -> Result<Option<FixedPoint>> {
    StroboMap::new(system)?.fixed_point()
}
