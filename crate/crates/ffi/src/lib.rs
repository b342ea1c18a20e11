//! C ABI over the `strobo` library.
//!
//! Systems and orbits are opaque heap handles created by `*_new` / detection
//! calls and released with the matching `*_free`. Every fallible call returns
//! a [`StroboStatus`]; on failure the message is kept per thread and can be
//! copied out with [`strobo_last_error_message`]. Output pointers are written
//! only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use strobo::bifurcation::{CurveKind, CurveSolver};
use strobo::strobo::StroboMap;
use strobo::symbolic::{detect_orbit_with, encode_with, DetectOptions, Detection, Orbit};
use strobo::{Error, ForcingParams, SystemParams, VectorFieldSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StroboStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NoEquilibrium = 3,
    IntegrationFailure = 4,
    NoSpikeRegime = 5,
    BoundaryAbsent = 6,
    NoRoot = 7,
    OrderingViolation = 8,
    DegenerateBoundary = 9,
    MonotonicityViolation = 10,
    AddingViolation = 11,
    Numerical = 12,
    Config = 13,
    Io = 14,
    BufferTooSmall = 15,
    Panic = 99,
}

impl From<&Error> for StroboStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => StroboStatus::InvalidParameter,
            Error::NoEquilibrium => StroboStatus::NoEquilibrium,
            Error::IntegrationFailure { .. } => StroboStatus::IntegrationFailure,
            Error::NoSpikeRegime { .. } => StroboStatus::NoSpikeRegime,
            Error::BoundaryAbsent { .. } => StroboStatus::BoundaryAbsent,
            Error::NoRoot { .. } => StroboStatus::NoRoot,
            Error::OrderingViolation { .. } => StroboStatus::OrderingViolation,
            Error::DegenerateBoundary { .. } => StroboStatus::DegenerateBoundary,
            Error::MonotonicityViolation { .. } => StroboStatus::MonotonicityViolation,
            Error::AddingViolation { .. } => StroboStatus::AddingViolation,
            Error::Numerical(_) => StroboStatus::Numerical,
            Error::Config(_) => StroboStatus::Config,
            Error::Io(_) => StroboStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Internal failure: a status plus the message stored for the caller.
struct Fail(StroboStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(StroboStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(StroboStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> StroboStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => StroboStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            StroboStatus::Panic
        }
    }
}

/// Opaque stroboscopic-map handle.
pub struct StroboSystem {
    map: StroboMap,
}

/// Opaque periodic-orbit handle.
pub struct StroboOrbit {
    orbit: Orbit,
    word: CString,
}

/// Fixed point of the map on branch `S_n`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StroboFixedPoint {
    pub x_bar: f64,
    pub branch_n: u32,
    pub multiplier: f64,
}

unsafe fn sys_ref<'a>(ptr: *const StroboSystem) -> Result<&'a StroboSystem, Fail> {
    ptr.as_ref().ok_or_else(|| null("system"))
}

unsafe fn orbit_ref<'a>(ptr: *const StroboOrbit) -> Result<&'a StroboOrbit, Fail> {
    ptr.as_ref().ok_or_else(|| null("orbit"))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Fail(StroboStatus::InvalidParameter, format!("{what} is not UTF-8")))
}

/// Copies `bytes` plus a NUL terminator into `buf` when it fits. Returns the
/// size needed including the terminator.
unsafe fn copy_str(bytes: &[u8], buf: *mut c_char, cap: usize) -> usize {
    let need = bytes.len() + 1;
    if !buf.is_null() && cap >= need {
        std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
        *buf.add(bytes.len()) = 0;
    }
    need
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn strobo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of this thread into `buf` (capacity `cap`).
/// Returns the size needed including the terminator, or 0 when there is no
/// pending error. Nothing is written when `cap` is too small.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn strobo_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(msg) => copy_str(msg.as_bytes(), buf, cap),
        None => 0,
    })
}

/// Builds a system from a family name (`linear`, `quintic`, `arctan`), its
/// parameters, the forcing `(A, d, T)` and the threshold `theta`.
///
/// # Safety
/// `family` must be a NUL-terminated string, `params` valid for `n_params`
/// reads, and `out` a valid pointer. Release the handle with
/// [`strobo_system_free`].
#[no_mangle]
pub unsafe extern "C" fn strobo_system_new(
    family: *const c_char,
    params: *const f64,
    n_params: usize,
    amplitude: f64,
    duty: f64,
    period: f64,
    theta: f64,
    out_system: *mut *mut StroboSystem,
) -> StroboStatus {
    guard(|| {
        let out_system = out(out_system, "out_system")?;
        let family = c_str(family, "family")?;
        if params.is_null() && n_params > 0 {
            return Err(null("params"));
        }
        let params = if n_params == 0 { &[][..] } else { std::slice::from_raw_parts(params, n_params) };
        let field = VectorFieldSpec::from_family(family, params)?;
        let forcing = ForcingParams::new(amplitude, duty, period)?;
        let sys = SystemParams::new(field, forcing, theta)?;
        let map = StroboMap::new(&sys)?;
        *out_system = Box::into_raw(Box::new(StroboSystem { map }));
        Ok(())
    })
}

/// Releases a system handle. Null is ignored.
///
/// # Safety
/// `system` must come from [`strobo_system_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn strobo_system_free(system: *mut StroboSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// One application of the map: image of `x0` and the spike count.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn strobo_map_apply(
    system: *const StroboSystem,
    x0: f64,
    out_x: *mut f64,
    out_spikes: *mut u32,
) -> StroboStatus {
    guard(|| {
        let s = sys_ref(system)?;
        let (ox, os) = (out(out_x, "out_x")?, out(out_spikes, "out_spikes")?);
        let (x, n) = s.map.step(x0)?;
        *ox = x;
        *os = n;
        Ok(())
    })
}

/// Boundary `Sigma_n`. `out_present` is false when it lies outside `[0, theta)`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn strobo_sigma(
    system: *const StroboSystem,
    n: u32,
    out_sigma: *mut f64,
    out_present: *mut bool,
) -> StroboStatus {
    guard(|| {
        let s = sys_ref(system)?;
        let (os, op) = (out(out_sigma, "out_sigma")?, out(out_present, "out_present")?);
        let v = s.map.sigma(n)?;
        *op = v.is_some();
        *os = v.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Lateral images `s_minus` and `s_plus` of the discontinuity.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn strobo_lateral_values(
    system: *const StroboSystem,
    out_minus: *mut f64,
    out_plus: *mut f64,
) -> StroboStatus {
    guard(|| {
        let s = sys_ref(system)?;
        let (om, op) = (out(out_minus, "out_minus")?, out(out_plus, "out_plus")?);
        let (m, p) = s.map.lateral_values();
        *om = m;
        *op = p;
        Ok(())
    })
}

/// The map's fixed point, if any. `out_found` tells whether one exists.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn strobo_fixed_point(
    system: *const StroboSystem,
    out_point: *mut StroboFixedPoint,
    out_found: *mut bool,
) -> StroboStatus {
    guard(|| {
        let s = sys_ref(system)?;
        let (op, of) = (out(out_point, "out_point")?, out(out_found, "out_found")?);
        match s.map.fixed_point()? {
            Some(fp) => {
                *op = StroboFixedPoint { x_bar: fp.x_bar, branch_n: fp.branch_n, multiplier: fp.multiplier };
                *of = true;
            }
            None => *of = false,
        }
        Ok(())
    })
}

/// Iterates from `x0` past `burn_in` steps and looks for a cycle of period at
/// most `max_period` closing within `tol`. `*out_orbit` is set to a new handle
/// when one is found and to null otherwise.
///
/// # Safety
/// All pointers must be valid. Release the orbit with [`strobo_orbit_free`].
#[no_mangle]
pub unsafe extern "C" fn strobo_detect_orbit(
    system: *const StroboSystem,
    x0: f64,
    burn_in: usize,
    max_period: usize,
    tol: f64,
    out_orbit: *mut *mut StroboOrbit,
) -> StroboStatus {
    guard(|| {
        let s = sys_ref(system)?;
        let oo = out(out_orbit, "out_orbit")?;
        let opts = DetectOptions { burn_in, max_period, tol, ..Default::default() };
        *oo = std::ptr::null_mut();
        if let Detection::Periodic(orbit) = detect_orbit_with(&s.map, x0, &opts)? {
            let word = encode_with(&orbit, &s.map)?;
            let word = CString::new(word.as_str()).expect("words are L/R only");
            *oo = Box::into_raw(Box::new(StroboOrbit { orbit, word }));
        }
        Ok(())
    })
}

/// Releases an orbit handle. Null is ignored.
///
/// # Safety
/// `orbit` must come from [`strobo_detect_orbit`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn strobo_orbit_free(orbit: *mut StroboOrbit) {
    if !orbit.is_null() {
        drop(Box::from_raw(orbit));
    }
}

/// Period of an orbit, or 0 for a null handle.
///
/// # Safety
/// `orbit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn strobo_orbit_period(orbit: *const StroboOrbit) -> usize {
    orbit.as_ref().map_or(0, |o| o.orbit.period)
}

/// Copies the orbit points (starting from the smallest) and their spike
/// counts. Either buffer may be null. Fails with `BufferTooSmall` when
/// `cap` is below the period.
///
/// # Safety
/// Non-null buffers must be valid for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn strobo_orbit_points(
    orbit: *const StroboOrbit,
    points: *mut f64,
    spikes: *mut u32,
    cap: usize,
) -> StroboStatus {
    guard(|| {
        let o = &orbit_ref(orbit)?.orbit;
        if cap < o.period {
            return Err(Fail(StroboStatus::BufferTooSmall, format!("need {} elements, got {cap}", o.period)));
        }
        if !points.is_null() {
            std::ptr::copy_nonoverlapping(o.points.as_ptr(), points, o.period);
        }
        if !spikes.is_null() {
            std::ptr::copy_nonoverlapping(o.per_point_spikes.as_ptr(), spikes, o.period);
        }
        Ok(())
    })
}

/// Exact firing number `eta = num / den` of the orbit.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn strobo_orbit_eta(
    orbit: *const StroboOrbit,
    out_num: *mut i64,
    out_den: *mut i64,
) -> StroboStatus {
    guard(|| {
        let o = orbit_ref(orbit)?;
        let (on, od) = (out(out_num, "out_num")?, out(out_den, "out_den")?);
        let eta = o.orbit.eta();
        *on = *eta.numer();
        *od = *eta.denom();
        Ok(())
    })
}

/// Copies the orbit's canonical `L`/`R` word. Returns the size needed
/// including the terminator; 0 for a null handle.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn strobo_orbit_word(orbit: *const StroboOrbit, buf: *mut c_char, cap: usize) -> usize {
    match orbit.as_ref() {
        Some(o) => copy_str(o.word.as_bytes(), buf, cap),
        None => 0,
    }
}

/// Amplitude on a bifurcation curve (`A0`, `A<n>R`, `A<n>L`, `A<n>C`) at duty
/// cycle `duty`, using the system's field, period and threshold.
///
/// # Safety
/// `kind` must be a NUL-terminated string; all pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn strobo_solve_curve(
    system: *const StroboSystem,
    kind: *const c_char,
    duty: f64,
    out_amplitude: *mut f64,
) -> StroboStatus {
    guard(|| {
        let s = sys_ref(system)?;
        let kind = CurveKind::from_str(c_str(kind, "kind")?)?;
        let oa = out(out_amplitude, "out_amplitude")?;
        *oa = CurveSolver::with_numerics(s.map.system(), duty, *s.map.numerics())?.solve(kind)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_cover_errors() {
        assert_eq!(StroboStatus::from(&Error::NoRoot { kind: "A0".into(), d: 0.5 }), StroboStatus::NoRoot);
        assert_eq!(StroboStatus::from(&Error::Config("x".into())) as i32, 13);
    }

    #[test]
    fn error_message_round_trip() {
        let st = guard(|| Err(Fail(StroboStatus::Numerical, "boom".into())));
        assert_eq!(st, StroboStatus::Numerical);
        let mut buf = [0 as c_char; 3];
        let need = unsafe { strobo_last_error_message(buf.as_mut_ptr(), buf.len()) };
        assert_eq!(need, 5);
        assert_eq!(buf[0], 0);
        let mut buf = [0 as c_char; 8];
        unsafe { strobo_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let s = unsafe { CStr::from_ptr(buf.as_ptr()) };
        assert_eq!(s.to_str().unwrap(), "boom");
        assert_eq!(guard(|| Ok(())), StroboStatus::Ok);
        assert_eq!(unsafe { strobo_last_error_message(std::ptr::null_mut(), 0) }, 0);
    }
}
