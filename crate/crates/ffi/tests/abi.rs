use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use strobo_ffi::*;

fn linear(a: f64, d: f64, t: f64) -> *mut StroboSystem {
    let family = CString::new("linear").unwrap();
    let params = [-1.0, 0.5];
    let mut sys = ptr::null_mut();
    let st = unsafe { strobo_system_new(family.as_ptr(), params.as_ptr(), 2, a, d, t, 1.0, &mut sys) };
    assert_eq!(st, StroboStatus::Ok);
    assert!(!sys.is_null());
    sys
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let need = unsafe { strobo_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(need > 0 && need <= buf.len());
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string()
}

#[test]
fn map_boundary_and_lateral_values() {
    let sys = linear(0.8, 0.5, 1.9);
    let (mut x, mut n) = (0.0, 0u32);
    assert_eq!(unsafe { strobo_map_apply(sys, 0.6, &mut x, &mut n) }, StroboStatus::Ok);
    assert_eq!(n, 1);
    let (mut sigma, mut present) = (0.0, false);
    assert_eq!(unsafe { strobo_sigma(sys, 1, &mut sigma, &mut present) }, StroboStatus::Ok);
    assert!(present);
    assert!((sigma - 0.5242871).abs() < 1e-6);
    let (mut m, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { strobo_lateral_values(sys, &mut m, &mut p) }, StroboStatus::Ok);
    assert!((m - 0.6933705).abs() < 1e-6 && (p - 0.3066295).abs() < 1e-6);
    unsafe { strobo_system_free(sys) };
}

#[test]
fn orbit_handle() {
    let sys = linear(0.8, 0.5, 1.9);
    let mut orbit = ptr::null_mut();
    assert_eq!(unsafe { strobo_detect_orbit(sys, 0.0, 500, 64, 1e-9, &mut orbit) }, StroboStatus::Ok);
    assert!(!orbit.is_null());
    assert_eq!(unsafe { strobo_orbit_period(orbit) }, 2);
    let mut pts = [0.0; 2];
    let mut spikes = [0u32; 2];
    assert_eq!(unsafe { strobo_orbit_points(orbit, pts.as_mut_ptr(), spikes.as_mut_ptr(), 2) }, StroboStatus::Ok);
    assert!((pts[0] - 0.4046168).abs() < 1e-6 && (pts[1] - 0.6754716).abs() < 1e-6);
    assert_eq!(spikes, [0, 1]);
    assert_eq!(
        unsafe { strobo_orbit_points(orbit, pts.as_mut_ptr(), ptr::null_mut(), 1) },
        StroboStatus::BufferTooSmall
    );
    let (mut num, mut den) = (0, 0);
    assert_eq!(unsafe { strobo_orbit_eta(orbit, &mut num, &mut den) }, StroboStatus::Ok);
    assert_eq!((num, den), (1, 2));
    let mut word = [0 as c_char; 8];
    assert_eq!(unsafe { strobo_orbit_word(orbit, word.as_mut_ptr(), word.len()) }, 3);
    assert_eq!(unsafe { CStr::from_ptr(word.as_ptr()) }.to_str().unwrap(), "LR");
    unsafe {
        strobo_orbit_free(orbit);
        strobo_system_free(sys);
    }
}

#[test]
fn fixed_point_and_curves() {
    let sys = linear(0.3, 0.5, 1.9);
    let mut fp = StroboFixedPoint::default();
    let mut found = false;
    assert_eq!(unsafe { strobo_fixed_point(sys, &mut fp, &mut found) }, StroboStatus::Ok);
    assert!(found);
    assert_eq!(fp.branch_n, 0);
    assert!(fp.multiplier > 0.0 && fp.multiplier < 1.0);
    let kind = CString::new("A1R").unwrap();
    let mut a = 0.0;
    assert_eq!(unsafe { strobo_solve_curve(sys, kind.as_ptr(), 0.5, &mut a) }, StroboStatus::Ok);
    assert!((a - 0.9372620).abs() < 1e-6);
    let bad = CString::new("B7").unwrap();
    assert_ne!(unsafe { strobo_solve_curve(sys, bad.as_ptr(), 0.5, &mut a) }, StroboStatus::Ok);
    assert!(!last_error().is_empty());
    unsafe { strobo_system_free(sys) };
}

#[test]
fn errors_are_reported() {
    let family = CString::new("linear").unwrap();
    let params = [-1.0, 0.5];
    let mut sys = ptr::null_mut();
    let st = unsafe { strobo_system_new(family.as_ptr(), params.as_ptr(), 2, 0.8, 1.5, 1.9, 1.0, &mut sys) };
    assert_eq!(st, StroboStatus::InvalidParameter);
    assert!(sys.is_null());
    assert!(last_error().contains("d"));
    let st = unsafe { strobo_system_new(ptr::null(), params.as_ptr(), 2, 0.8, 0.5, 1.9, 1.0, &mut sys) };
    assert_eq!(st, StroboStatus::NullPointer);
    let unknown = CString::new("cubic").unwrap();
    let st = unsafe { strobo_system_new(unknown.as_ptr(), params.as_ptr(), 2, 0.8, 0.5, 1.9, 1.0, &mut sys) };
    assert_eq!(st, StroboStatus::InvalidParameter);
    let mut x = 0.0;
    let mut n = 0;
    assert_eq!(unsafe { strobo_map_apply(ptr::null(), 0.1, &mut x, &mut n) }, StroboStatus::NullPointer);
    unsafe {
        strobo_system_free(ptr::null_mut());
        strobo_orbit_free(ptr::null_mut());
    }
    assert_eq!(unsafe { CStr::from_ptr(strobo_version()) }.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/strobo.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for f in [
        "strobo_version",
        "strobo_last_error_message",
        "strobo_system_new",
        "strobo_system_free",
        "strobo_map_apply",
        "strobo_sigma",
        "strobo_lateral_values",
        "strobo_fixed_point",
        "strobo_detect_orbit",
        "strobo_orbit_free",
        "strobo_orbit_period",
        "strobo_orbit_points",
        "strobo_orbit_eta",
        "strobo_orbit_word",
        "strobo_solve_curve",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
}

/// Compiles and runs a small C program against the header and static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libstrobo_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "strobo.h"
int main(void) {
    double params[2] = {-1.0, 0.5};
    StroboSystem *sys = NULL;
    if (strobo_system_new("linear", params, 2, 0.8, 0.5, 1.9, 1.0, &sys) != STROBO_STATUS_OK) return 1;
    StroboOrbit *orbit = NULL;
    if (strobo_detect_orbit(sys, 0.0, 500, 64, 1e-9, &orbit) != STROBO_STATUS_OK || !orbit) return 2;
    char word[16];
    strobo_orbit_word(orbit, word, sizeof word);
    int64_t num, den;
    strobo_orbit_eta(orbit, &num, &den);
    printf("%s %lld/%lld\n", word, (long long)num, (long long)den);
    StroboSystem *bad = NULL;
    if (strobo_system_new("linear", params, 2, 0.8, 2.0, 1.9, 1.0, &bad) != STROBO_STATUS_INVALID_PARAMETER) return 3;
    strobo_orbit_free(orbit);
    strobo_system_free(sys);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "LR 1/2");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
