//! Border-collision curves in the `(d, A)` plane, their ordering, and the
//! 1D scan / 2D sweep drivers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{spike_time_delta_with, Numerics};
use crate::model::{SystemParams, HYPOTHESIS_GRID};
use crate::strobo::StroboMap;
use crate::symbolic::{summarize, DetectOptions, OrbitSummary};

/// Upper end of the amplitude search.
pub const A_MAX: f64 = 1e6;
/// Relative bisection tolerance on `A` for every curve.
pub const CURVE_TOL: f64 = 1e-12;
/// Relative offset applied to scan endpoints so they sit inside the
/// neighbouring fixed-point regions rather than on the collision itself.
pub const ENDPOINT_NUDGE: f64 = 1e-8;

/// Which implicit condition defines a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    /// Left collision of the subthreshold fixed point: `Sigma_1 = s_minus`.
    A0,
    /// Left collision of `x_n`: `Sigma_{n+1} = s_minus`.
    AnL(u32),
    /// Right collision of `x_n`: `Sigma_n = s_plus`.
    AnR(u32),
    /// Continuity value: `Sigma_n = 0`, equivalently `n delta(A) = dT`.
    AnC(u32),
}

impl CurveKind {
    /// Index of the boundary the condition is written on.
    pub fn boundary(&self) -> u32 {
        match *self {
            CurveKind::A0 => 1,
            CurveKind::AnL(n) => n + 1,
            CurveKind::AnR(n) | CurveKind::AnC(n) => n,
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveKind::A0 => write!(f, "A0"),
            CurveKind::AnL(n) => write!(f, "A{n}L"),
            CurveKind::AnR(n) => write!(f, "A{n}R"),
            CurveKind::AnC(n) => write!(f, "A{n}C"),
        }
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad curve name `{s}`"));
        if s == "A0" {
            return Ok(CurveKind::A0);
        }
        let body = s.strip_prefix('A').ok_or_else(bad)?;
        let (num, tag) = body.split_at(body.len().saturating_sub(1));
        let n: u32 = num.parse().map_err(|_| bad())?;
        match (tag, n) {
            (_, 0) => Err(bad()),
            ("L", n) => Ok(CurveKind::AnL(n)),
            ("R", n) => Ok(CurveKind::AnR(n)),
            ("C", n) => Ok(CurveKind::AnC(n)),
            _ => Err(bad()),
        }
    }
}

/// Amplitude below which the trajectory from 0 cannot reach `theta`.
fn amplitude_floor(template: &SystemParams) -> f64 {
    let theta = template.theta;
    let min_f = (0..=HYPOTHESIS_GRID)
        .map(|i| template.field.f(theta * i as f64 / HYPOTHESIS_GRID as f64))
        .fold(f64::INFINITY, f64::min);
    (-min_f).max(0.0)
}

/// Bisection on a predicate that is true at `lo` and false at `hi`.
fn bisect_pred(mut lo: f64, mut hi: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<(f64, f64)> {
    while hi - lo > CURVE_TOL * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Solves the curves of one system template at one duty cycle.
#[derive(Debug, Clone)]
pub struct CurveSolver {
    template: SystemParams,
    num: Numerics,
    a_floor: f64,
}

impl CurveSolver {
    pub fn new(template: &SystemParams, d: f64) -> Result<Self> {
        Self::with_numerics(template, d, Numerics::default())
    }

    pub fn with_numerics(template: &SystemParams, d: f64, num: Numerics) -> Result<Self> {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::InvalidParameter(format!("curves need d in (0,1], got {d}")));
        }
        let template = template.with_duty(d);
        template.validate()?;
        Ok(CurveSolver { a_floor: amplitude_floor(&template), template, num })
    }

    fn on(&self) -> f64 {
        self.template.forcing.on_duration()
    }

    fn delta(&self, a: f64) -> Result<Option<f64>> {
        spike_time_delta_with(&self.template.field, a, self.template.theta, &self.num)
    }

    /// `A^C_n`: the largest amplitude with `n delta(A) >= dT`. For `n = 0`
    /// this is the spiking floor.
    pub fn continuity(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Ok(self.a_floor);
        }
        let target = self.on() / n as f64;
        let fits = |a: f64| -> Result<bool> { Ok(self.delta(a)?.is_none_or(|d| d >= target)) };
        let lo = self.a_floor;
        let mut hi = lo + 1e-3 * lo.max(1.0);
        while fits(hi)? {
            if hi > A_MAX {
                return Err(Error::NoRoot { kind: CurveKind::AnC(n).to_string(), d: self.template.forcing.d });
            }
            hi = lo + 2.0 * (hi - lo);
        }
        Ok(bisect_pred(lo, hi, fits)?.0)
    }

    /// `Sigma_m(A)` extended by `theta` below its existence interval and by
    /// `0` above it, so it is monotone on the whole axis.
    fn sigma_clamped(&self, a: f64, m: u32) -> Result<f64> {
        let theta = self.template.theta;
        let Some(delta) = self.delta(a)? else { return Ok(theta) };
        let t_m = self.on() - (m - 1) as f64 * delta;
        if t_m <= 0.0 {
            return Ok(theta);
        }
        if t_m > delta {
            return Ok(0.0);
        }
        let map = StroboMap::with_numerics(&self.template.with_amplitude(a), self.num)?;
        Ok(match map.sigma(m)? {
            Some(s) => s,
            None if t_m < 0.5 * delta => theta,
            None => 0.0,
        })
    }

    /// Amplitude on the curve `kind`.
    pub fn solve(&self, kind: CurveKind) -> Result<f64> {
        let m = kind.boundary();
        if let CurveKind::AnC(n) = kind {
            if n == 0 {
                return Err(Error::InvalidParameter("A0C is not a curve".into()));
            }
            return self.continuity(n);
        }
        if let CurveKind::AnR(0) = kind {
            return Err(Error::InvalidParameter("A0R is not a curve".into()));
        }
        let map = StroboMap::with_numerics(&self.template, self.num)?;
        let (s_minus, s_plus) = map.lateral_values();
        let target = match kind {
            CurveKind::A0 | CurveKind::AnL(_) => s_minus,
            _ => s_plus,
        };
        let no_root = || Error::NoRoot { kind: kind.to_string(), d: self.template.forcing.d };
        let lo = self.continuity(m - 1)?;
        let hi = self.continuity(m).map_err(|_| no_root())?;
        let above = |a: f64| -> Result<bool> { Ok(self.sigma_clamped(a, m)? > target) };
        if !above(lo)? || above(hi)? {
            return Err(no_root());
        }
        let (l, h) = bisect_pred(lo, hi, above)?;
        Ok(0.5 * (l + h))
    }
}

/// Amplitude on a curve at duty cycle `d`.
pub fn solve_curve(template: &SystemParams, kind: CurveKind, d: f64) -> Result<f64> {
    CurveSolver::new(template, d)?.solve(kind)
}

/// The sequence `A0 < A1R < A1L < ... < AnR < AnL` up to `n_max`.
pub fn curve_sequence(n_max: u32) -> Vec<CurveKind> {
    let mut v = vec![CurveKind::A0];
    for n in 1..=n_max {
        v.push(CurveKind::AnR(n));
        v.push(CurveKind::AnL(n));
    }
    v
}

/// Duty cycles over which `A0(d)` must grow as `d` shrinks.
pub const A0_TREND_DUTIES: [f64; 4] = [0.3, 0.2, 0.1, 0.05];

/// Solves the curve sequence at `d`, checks strict ordering, and checks the
/// growth of `A0` as the duty cycle decreases.
pub fn verify_ordering(template: &SystemParams, d: f64, n_max: u32) -> Result<Vec<(CurveKind, f64)>> {
    let solver = CurveSolver::new(template, d)?;
    let mut out = Vec::new();
    for kind in curve_sequence(n_max) {
        out.push((kind, solver.solve(kind)?));
    }
    for w in out.windows(2) {
        if !(w[0].1 < w[1].1) {
            return Err(Error::OrderingViolation {
                d,
                detail: format!("{}={} is not below {}={}", w[0].0, w[0].1, w[1].0, w[1].1),
            });
        }
    }
    let trend: Vec<f64> = A0_TREND_DUTIES
        .iter()
        .map(|&dd| solve_curve(template, CurveKind::A0, dd))
        .collect::<Result<_>>()?;
    if !trend.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::OrderingViolation {
            d,
            detail: format!("A0 does not grow as d decreases: {trend:?}"),
        });
    }
    Ok(out)
}

/// Scan endpoints across adding window `n` at fixed `d`, as `(1/A)` values,
/// nudged into the bounding fixed-point regions.
pub fn window_segment(template: &SystemParams, n: u32, d: f64) -> Result<(f64, f64)> {
    let solver = CurveSolver::new(template, d)?;
    let left = if n == 0 { CurveKind::A0 } else { CurveKind::AnL(n) };
    let a_lo = solver.solve(left)? * (1.0 - ENDPOINT_NUDGE);
    let a_hi = solver.solve(CurveKind::AnR(n + 1))? * (1.0 + ENDPOINT_NUDGE);
    Ok((1.0 / a_lo, 1.0 / a_hi))
}

/// Options shared by scans and sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub detect: DetectOptions,
    /// Write words relative to spike counts `{n, n+1}` of this window.
    pub window: Option<u32>,
    /// Initial condition of every orbit search.
    pub x0: f64,
    pub numerics: Numerics,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { detect: DetectOptions::default(), window: None, x0: 0.0, numerics: Numerics::default() }
    }
}

/// A one-parameter scan `lambda -> (d, 1/A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSeries {
    pub lambda: Vec<f64>,
    /// `(d, 1/A)` at each `lambda`.
    pub points: Vec<(f64, f64)>,
    pub summaries: Vec<OrbitSummary>,
    pub window: Option<u32>,
}

impl ScanSeries {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

fn summarize_point(template: &SystemParams, d: f64, inv_a: f64, opts: &ScanOptions) -> OrbitSummary {
    let sys = template.with_duty(d).with_amplitude(1.0 / inv_a);
    match StroboMap::with_numerics(&sys, opts.numerics) {
        Ok(map) => summarize(&map, opts.x0, &opts.detect, opts.window),
        Err(e) => OrbitSummary::failed(e.to_string()),
    }
}

/// Scans `steps` equally spaced values of `lambda` in `[lambda0, lambda1]`.
/// `1/A` must strictly decrease along the scan.
pub fn scan_range<C>(
    template: &SystemParams,
    curve: &C,
    lambda0: f64,
    lambda1: f64,
    steps: usize,
    opts: &ScanOptions,
) -> Result<ScanSeries>
where
    C: Fn(f64) -> (f64, f64) + Sync,
{
    let lambda: Vec<f64> = match steps {
        0 => Vec::new(),
        1 => vec![lambda0],
        _ => (0..steps)
            .map(|i| lambda0 + (lambda1 - lambda0) * i as f64 / (steps - 1) as f64)
            .collect(),
    };
    let points: Vec<(f64, f64)> = lambda.iter().map(|&l| curve(l)).collect();
    for (i, w) in points.windows(2).enumerate() {
        if !(w[1].1 < w[0].1) {
            return Err(Error::InvalidParameter(format!(
                "1/A must strictly decrease along the scan (index {})",
                i + 1
            )));
        }
    }
    for &(d, inv_a) in &points {
        if !((0.0..=1.0).contains(&d) && inv_a > 0.0 && inv_a.is_finite()) {
            return Err(Error::InvalidParameter(format!("scan point (d={d}, 1/A={inv_a}) out of range")));
        }
    }
    let summaries = points
        .par_iter()
        .map(|&(d, inv_a)| summarize_point(template, d, inv_a, opts))
        .collect();
    Ok(ScanSeries { lambda, points, summaries, window: opts.window })
}

/// Scans `lambda` over `[0, 1]`.
pub fn scan_1d<C>(template: &SystemParams, curve: &C, steps: usize, opts: &ScanOptions) -> Result<ScanSeries>
where
    C: Fn(f64) -> (f64, f64) + Sync,
{
    scan_range(template, curve, 0.0, 1.0, steps, opts)
}

/// Straight segment in the `(d, 1/A)` plane.
pub fn segment(start: (f64, f64), end: (f64, f64)) -> impl Fn(f64) -> (f64, f64) + Sync + Copy {
    move |l: f64| (start.0 + (end.0 - start.0) * l, start.1 + (end.1 - start.1) * l)
}

/// Result of a 2D sweep. `cells` is row-major with `d` as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub d_axis: Vec<f64>,
    pub inv_a_axis: Vec<f64>,
    pub cells: Vec<OrbitSummary>,
}

impl SweepGrid {
    pub fn cell(&self, i_d: usize, i_a: usize) -> &OrbitSummary {
        &self.cells[i_d * self.inv_a_axis.len() + i_a]
    }
}

/// Cell-centred axis of `n` points over `(lo, hi)`.
pub fn cell_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

/// Evaluates every cell of a `(d, 1/A)` grid independently. Cell failures are
/// recorded in the cell. Output order does not depend on the worker count.
pub fn sweep_2d(
    template: &SystemParams,
    d_range: (f64, f64),
    inv_a_range: (f64, f64),
    resolution: (usize, usize),
    opts: &ScanOptions,
) -> Result<SweepGrid> {
    let (d_lo, d_hi) = d_range;
    let (a_lo, a_hi) = inv_a_range;
    if !(0.0 <= d_lo && d_lo < d_hi && d_hi <= 1.0) {
        return Err(Error::InvalidParameter(format!("bad d range ({d_lo}, {d_hi})")));
    }
    if !(0.0 <= a_lo && a_lo < a_hi && a_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad 1/A range ({a_lo}, {a_hi})")));
    }
    let d_axis = cell_axis(d_lo, d_hi, resolution.0);
    let inv_a_axis = cell_axis(a_lo, a_hi, resolution.1);
    let na = inv_a_axis.len();
    let cells = (0..d_axis.len() * na)
        .into_par_iter()
        .map(|k| summarize_point(template, d_axis[k / na], inv_a_axis[k % na], opts))
        .collect();
    Ok(SweepGrid { d_axis, inv_a_axis, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ForcingParams, VectorFieldSpec};
    use crate::strobo::gap_offsets;

    const L1: VectorFieldSpec = VectorFieldSpec::Linear { a: -1.0, b: 0.5 };

    fn l1_template() -> SystemParams {
        SystemParams::new(L1, ForcingParams::new(1.0, 0.5, 1.9).unwrap(), 1.0).unwrap()
    }

    // affine closed forms for the linear template: x* = 0.5 + A
    fn sigma_affine(a: f64, n: u32, d: f64) -> f64 {
        let xs = 0.5 + a;
        let delta = ((xs) / (xs - 1.0)).ln();
        let t_n = d * 1.9 - (n - 1) as f64 * delta;
        xs + (1.0 - xs) * t_n.exp()
    }

    #[test]
    fn curve_names_round_trip() {
        for k in [CurveKind::A0, CurveKind::AnL(2), CurveKind::AnR(1), CurveKind::AnC(3)] {
            assert_eq!(k.to_string().parse::<CurveKind>().unwrap(), k);
        }
        assert!("A0L".parse::<CurveKind>().is_err());
        assert!("B1L".parse::<CurveKind>().is_err());
    }

    #[test]
    fn first_window_curves() {
        let t = l1_template();
        let e = (-0.95f64).exp();
        let a0 = solve_curve(&t, CurveKind::A0, 0.5).unwrap();
        assert!((sigma_affine(a0, 1, 0.5) - (0.5 + 0.5 * e)).abs() < 1e-9);
        let a1r = solve_curve(&t, CurveKind::AnR(1), 0.5).unwrap();
        assert!((sigma_affine(a1r, 1, 0.5) - (0.5 - 0.5 * e)).abs() < 1e-9);
        let a1c = solve_curve(&t, CurveKind::AnC(1), 0.5).unwrap();
        let xs = 0.5 + a1c;
        assert!(((xs / (xs - 1.0)).ln() - 0.95).abs() < 1e-9);
    }

    #[test]
    fn curve_consistency() {
        let t = l1_template();
        for n in 1..=3 {
            let a_l = solve_curve(&t, CurveKind::AnL(n), 0.5).unwrap();
            let g = gap_offsets(&t.with_amplitude(a_l), n + 1).unwrap();
            assert!(g.mu_l.abs() < 1e-8, "AnL({n}) mu_L={}", g.mu_l);
            let a_r = solve_curve(&t, CurveKind::AnR(n), 0.5).unwrap();
            let g = gap_offsets(&t.with_amplitude(a_r), n).unwrap();
            assert!(g.mu_r.abs() < 1e-8, "AnR({n}) mu_R={}", g.mu_r);
            let a_c = solve_curve(&t, CurveKind::AnC(n), 0.5).unwrap();
            let s = StroboMap::new(&t.with_amplitude(a_c)).unwrap().sigma(n).unwrap().unwrap();
            assert!(s.abs() < 1e-8);
            assert!(a_r < a_c && a_c < a_l);
        }
    }

    #[test]
    fn ordering_at_mid_duty() {
        let v = verify_ordering(&l1_template(), 0.5, 3).unwrap();
        assert_eq!(v.len(), 7);
    }

    #[test]
    fn unreachable_curve_is_no_root() {
        // atan is bounded, so delta(A) >= theta / (A + pi/2): high n needs huge A
        let f = VectorFieldSpec::Arctan { a3: 100.0, b3: 0.1 };
        let t = SystemParams::new(f, ForcingParams::new(1.0, 0.5, 0.5).unwrap(), 1.0).unwrap();
        assert!(solve_curve(&t, CurveKind::AnR(2), 0.5).is_ok());
        assert!(matches!(solve_curve(&t, CurveKind::AnC(1_000_000_000), 0.5), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn scan_rejects_increasing_inverse_amplitude() {
        let t = l1_template();
        let c = segment((0.5, 1.0), (0.5, 1.2));
        assert!(scan_1d(&t, &c, 5, &ScanOptions::default()).is_err());
        let empty = scan_1d(&t, &segment((0.5, 1.2), (0.5, 1.0)), 0, &ScanOptions::default()).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn sweep_independent_of_workers() {
        let t = l1_template();
        let opts = ScanOptions { detect: DetectOptions { max_period: 20, ..Default::default() }, ..Default::default() };
        let run = |w: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .unwrap()
                .install(|| sweep_2d(&t, (0.1, 0.9), (0.2, 2.0), (12, 12), &opts).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
