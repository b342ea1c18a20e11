//! Vector-field families, square-wave forcing and the hypothesis checker.

use crate::error::{Error, Result};

/// The reset target after a threshold crossing.
pub const RESET_VALUE: f64 = 0.0;

/// Grid size used when sampling `f` and `f'` over `[0, theta]`.
pub const HYPOTHESIS_GRID: usize = 1000;

/// Built-in vector fields `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorFieldSpec {
    /// `f(x) = a x + b`
    Linear { a: f64, b: f64 },
    /// `f(x) = a2 (x - b2)^5 - c2 x`
    Quintic { a2: f64, b2: f64, c2: f64 },
    /// `f(x) = -atan(a3 (x - b3))`
    Arctan { a3: f64, b3: f64 },
}

impl VectorFieldSpec {
    /// Builds a field from a family name and a flat coefficient list.
    pub fn from_family(family: &str, params: &[f64]) -> Result<Self> {
        let name = family.to_ascii_lowercase();
        let want = match name.as_str() {
            "linear" | "arctan" => 2,
            "quintic" => 3,
            other => return Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        };
        if params.len() != want {
            return Err(Error::InvalidParameter(format!(
                "family `{family}` takes {want} coefficients, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        let p = params;
        Ok(match name.as_str() {
            "linear" => VectorFieldSpec::Linear { a: p[0], b: p[1] },
            "quintic" => VectorFieldSpec::Quintic { a2: p[0], b2: p[1], c2: p[2] },
            _ => VectorFieldSpec::Arctan { a3: p[0], b3: p[1] },
        })
    }

    /// Family name as used in configuration files.
    pub fn family(&self) -> &'static str {
        match self {
            VectorFieldSpec::Linear { .. } => "linear",
            VectorFieldSpec::Quintic { .. } => "quintic",
            VectorFieldSpec::Arctan { .. } => "arctan",
        }
    }

    /// Coefficients in declaration order.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            VectorFieldSpec::Linear { a, b } => vec![a, b],
            VectorFieldSpec::Quintic { a2, b2, c2 } => vec![a2, b2, c2],
            VectorFieldSpec::Arctan { a3, b3 } => vec![a3, b3],
        }
    }

    /// The unforced field `f(x)`.
    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        match *self {
            VectorFieldSpec::Linear { a, b } => a * x + b,
            VectorFieldSpec::Quintic { a2, b2, c2 } => {
                let u = x - b2;
                let u2 = u * u;
                a2 * u2 * u2 * u - c2 * x
            }
            VectorFieldSpec::Arctan { a3, b3 } => -(a3 * (x - b3)).atan(),
        }
    }

    /// Analytic derivative `f'(x)`.
    pub fn df(&self, x: f64) -> f64 {
        match *self {
            VectorFieldSpec::Linear { a, .. } => a,
            VectorFieldSpec::Quintic { a2, b2, c2 } => {
                let u = x - b2;
                5.0 * a2 * u * u * u * u - c2
            }
            VectorFieldSpec::Arctan { a3, b3 } => {
                let u = a3 * (x - b3);
                -a3 / (1.0 + u * u)
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, VectorFieldSpec::Linear { .. })
    }
}

/// Square-wave input: amplitude `a` on `(kT, kT + dT]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingParams {
    pub a: f64,
    pub d: f64,
    pub t: f64,
}

impl ForcingParams {
    pub fn new(a: f64, d: f64, t: f64) -> Result<Self> {
        let f = ForcingParams { a, d, t };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::InvalidParameter(format!("A must be >= 0, got {}", self.a)));
        }
        if !(0.0..=1.0).contains(&self.d) {
            return Err(Error::InvalidParameter(format!("d must lie in [0,1], got {}", self.d)));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::InvalidParameter(format!("T must be > 0, got {}", self.t)));
        }
        Ok(())
    }

    /// Length of the on-phase.
    #[inline]
    pub fn on_duration(&self) -> f64 {
        self.d * self.t
    }

    /// Length of the off-phase.
    #[inline]
    pub fn off_duration(&self) -> f64 {
        (1.0 - self.d) * self.t
    }
}

/// Full hybrid system: field, forcing and threshold. The reset value is
/// always [`RESET_VALUE`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub field: VectorFieldSpec,
    pub forcing: ForcingParams,
    pub theta: f64,
}

impl SystemParams {
    pub fn new(field: VectorFieldSpec, forcing: ForcingParams, theta: f64) -> Result<Self> {
        let s = SystemParams { field, forcing, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.forcing.validate()?;
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be > 0, got {}", self.theta)));
        }
        Ok(())
    }

    pub fn reset_value(&self) -> f64 {
        RESET_VALUE
    }

    /// Same system with a different amplitude.
    pub fn with_amplitude(&self, a: f64) -> Self {
        let mut s = *self;
        s.forcing.a = a;
        s
    }

    /// Same system with a different duty cycle.
    pub fn with_duty(&self, d: f64) -> Self {
        let mut s = *self;
        s.forcing.d = d;
        s
    }
}

/// `f(x) + A`.
#[inline]
pub fn eval_field(field: &VectorFieldSpec, x: f64, a: f64) -> f64 {
    field.f(x) + a
}

/// Value of the square wave at time `t`. The instant `t = 0` belongs to the
/// on-phase.
pub fn forcing_value(forcing: &ForcingParams, t: f64) -> f64 {
    if forcing.d <= 0.0 {
        return 0.0;
    }
    if t <= 0.0 {
        return forcing.a;
    }
    let phase = t - (t / forcing.t).floor() * forcing.t;
    // phase 0 at t = kT with k >= 1 closes the previous off-phase
    if (phase > 0.0 && phase <= forcing.on_duration()) || (phase == 0.0 && forcing.d >= 1.0) {
        forcing.a
    } else {
        0.0
    }
}

/// Outcome of checking the standing assumptions on `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    /// A unique attracting zero of `f` exists in `(0, theta)`.
    pub h1_ok: bool,
    /// The (first) zero of `f` found in `(0, theta)`.
    pub x_bar: f64,
    /// `f'` is negative on every sampled grid point of `[0, theta]`.
    pub h2_ok: bool,
    pub max_df: f64,
    /// Zero of `f + A` on the real line, when there is one.
    pub forced_equilibrium: Option<f64>,
}

/// Bisection for a sign change of `g` on `[lo, hi]`.
pub(crate) fn bisect_root(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut glo = g(lo);
    if glo == 0.0 {
        return lo;
    }
    if g(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All zeros of `g` on a uniform grid of `[lo, hi]`, refined by bisection.
fn grid_roots(g: &impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let h = (hi - lo) / cells as f64;
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev = g(lo);
    if prev == 0.0 {
        roots.push(lo);
    }
    for i in 1..=cells {
        let x = if i == cells { hi } else { lo + h * i as f64 };
        let v = g(x);
        if v == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            roots.push(bisect_root(g, prev_x, x, 1e-15 * (1.0 + x.abs())));
        }
        prev_x = x;
        prev = v;
    }
    roots
}

/// Root of the strictly monotone-at-infinity function `f + A`, searching
/// outward from `[0, theta]`.
fn forced_root(field: &VectorFieldSpec, a: f64, theta: f64) -> Option<f64> {
    let g = |x: f64| field.f(x) + a;
    if let Some(&r) = grid_roots(&g, 0.0, theta, HYPOTHESIS_GRID).first() {
        return Some(r);
    }
    // grow the interval on the side where the sign indicates the root lies
    let (mut lo, mut hi) = (0.0, theta);
    let mut span = theta.max(1.0);
    for _ in 0..64 {
        let (glo, ghi) = (g(lo), g(hi));
        if glo.is_nan() || ghi.is_nan() {
            return None;
        }
        if (glo > 0.0) != (ghi > 0.0) || glo == 0.0 || ghi == 0.0 {
            return Some(bisect_root(g, lo, hi, 1e-15 * (1.0 + lo.abs().max(hi.abs()))));
        }
        lo -= span;
        hi += span;
        span *= 2.0;
        if span > 1e12 {
            break;
        }
    }
    None
}

/// Checks the standing hypotheses (attracting rest state inside
/// `(0, theta)` and a decreasing field) for a system.
pub fn check_hypotheses(system: &SystemParams) -> Result<HypothesisReport> {
    system.validate()?;
    let field = system.field;
    let theta = system.theta;
    let f = |x: f64| field.f(x);
    let interior: Vec<f64> = grid_roots(&f, 0.0, theta, HYPOTHESIS_GRID)
        .into_iter()
        .filter(|&r| r > 0.0 && r < theta)
        .collect();
    let mut roots: Vec<f64> = Vec::new();
    for r in interior {
        if roots.last().is_none_or(|&q| (r - q).abs() > 1e-12) {
            roots.push(r);
        }
    }
    let x_bar = *roots.first().ok_or(Error::NoEquilibrium)?;
    let h1_ok = roots.len() == 1 && field.df(x_bar) < 0.0;

    let mut max_df = f64::NEG_INFINITY;
    for i in 0..=HYPOTHESIS_GRID {
        let x = theta * i as f64 / HYPOTHESIS_GRID as f64;
        max_df = max_df.max(field.df(x));
    }
    Ok(HypothesisReport {
        h1_ok,
        x_bar,
        h2_ok: max_df < 0.0,
        max_df,
        forced_equilibrium: forced_root(&field, system.forcing.a, theta),
    })
}
