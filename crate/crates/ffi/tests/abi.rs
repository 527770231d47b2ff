use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use wvsnr_ffi::*;

fn last_error() -> String {
    let p = wvs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn analytic_defaults() {
    let cfg = wvs_config_new();
    let mut out = WvsAnalytic::default();
    assert_eq!(unsafe { wvs_analytic(cfg, &mut out) }, WvsStatus::Ok);
    assert!(wvs_last_error().is_null());
    assert!((out.alpha - 299.3405).abs() < 1e-3);
    assert!((out.p_ps - 0.178606).abs() < 1e-6);
    assert!((out.snr_wva / out.snr_sd - out.alpha).abs() < 1e-9 * out.alpha);
    unsafe { wvs_config_free(cfg) };
}

#[test]
fn set_rejects_bad_values_and_keeps_state() {
    let cfg = wvs_config_new();
    let status = unsafe { wvs_config_set(cfg, c("sigma").as_ptr(), c("-1mm").as_ptr()) };
    assert_eq!(status, WvsStatus::InvalidArgument);
    assert!(last_error().contains("sigma"));
    assert_eq!(unsafe { wvs_config_set(cfg, c("nonsense").as_ptr(), c("1").as_ptr()) }, WvsStatus::Config);
    assert_eq!(unsafe { wvs_config_set(cfg, c("phi_half_deg").as_ptr(), c("90").as_ptr()) }, WvsStatus::Ok);
    let mut out = WvsAnalytic::default();
    assert_eq!(unsafe { wvs_analytic(cfg, &mut out) }, WvsStatus::Ok);
    assert!(out.alpha.abs() < 1e-9);
    unsafe { wvs_config_free(cfg) };
}

#[test]
fn null_pointers_are_reported() {
    let mut out = WvsAnalytic::default();
    assert_eq!(unsafe { wvs_analytic(ptr::null(), &mut out) }, WvsStatus::NullPointer);
    assert!(last_error().contains("cfg"));
    assert_eq!(unsafe { wvs_dark_port_moments(1e-3, 0.5, 1.0, ptr::null_mut()) }, WvsStatus::NullPointer);
    unsafe {
        wvs_config_free(ptr::null_mut());
        wvs_string_free(ptr::null_mut());
    }
}

#[test]
fn dark_port_moments_and_errors() {
    let mut m = WvsMoments::default();
    let phi = 50f64.to_radians();
    assert_eq!(unsafe { wvs_dark_port_moments(1.7e-3, phi, 1.0, &mut m) }, WvsStatus::Ok);
    assert!((m.mass - (phi / 2.0).sin().powi(2)).abs() < 1e-5);
    assert_eq!(unsafe { wvs_dark_port_moments(1.7e-3, 0.0, 0.0, &mut m) }, WvsStatus::DegenerateDarkPort);
    assert_eq!(unsafe { wvs_dark_port_moments(-1.0, phi, 1.0, &mut m) }, WvsStatus::InvalidArgument);
    let r = wvs_snr_sd(1e6, 1e-5, 1e-3);
    assert!((r - (2.0 / std::f64::consts::PI).sqrt() * 1e3 * 1e-2).abs() < 1e-12);
}

#[test]
fn simulate_matches_library_and_is_deterministic() {
    let cfg = wvs_config_new();
    let (mut a, mut b) = (WvsSimulation::default(), WvsSimulation::default());
    assert_eq!(unsafe { wvs_simulate(cfg, 500, 7, &mut a) }, WvsStatus::Ok);
    assert_eq!(unsafe { wvs_simulate(cfg, 500, 7, &mut b) }, WvsStatus::Ok);
    assert_eq!(a, b);
    let lib = wvsnr::cli::cmd_simulate(&wvsnr::config::Config::default(), 500, 7).unwrap();
    assert_eq!(a.snr_wva, lib.wva.snr);
    assert_eq!(unsafe { wvs_simulate(cfg, 1, 7, &mut a) }, WvsStatus::InvalidArgument);
    unsafe { wvs_config_free(cfg) };
}

#[test]
fn sweep_csv_round_trip() {
    let cfg = wvs_config_new();
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe {
        wvs_sweep_csv(cfg, c("drive_mV").as_ptr(), 0.0, 0.1, 3, c("analytic").as_ptr(), 10, 1, &mut out)
    };
    assert_eq!(status, WvsStatus::Ok);
    let csv = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { wvs_string_free(out) };
    assert!(csv.starts_with(wvsnr::experiments::CSV_HEADER));
    assert_eq!(csv.lines().count(), 4);
    let status = unsafe {
        wvs_sweep_csv(cfg, c("wavelength").as_ptr(), f64::NAN, f64::NAN, 3, c("both").as_ptr(), 10, 1, &mut out)
    };
    assert_eq!(status, WvsStatus::InvalidArgument);
    assert!(last_error().contains("wavelength"));
    unsafe { wvs_config_free(cfg) };
}

#[test]
fn config_file_errors() {
    let mut cfg: *mut WvsConfig = ptr::null_mut();
    let status = unsafe { wvs_config_from_file(c("/nonexistent/x.cfg").as_ptr(), &mut cfg) };
    assert_eq!(status, WvsStatus::Io);
    assert!(cfg.is_null());
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/wvsnr.h")).unwrap();
    for name in [
        "typedef struct WvsConfig WvsConfig;",
        "wvs_config_new",
        "wvs_config_set",
        "wvs_analytic",
        "wvs_simulate",
        "wvs_sweep_csv",
        "wvs_dark_port_moments",
        "wvs_last_error",
        "WVS_STATUS_DEGENERATE_DARK_PORT",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "wvsnr.h"

int main(void) {
    WvsConfig *cfg = wvs_config_new();
    WvsAnalytic a;
    if (wvs_analytic(cfg, &a) != WVS_STATUS_OK) return 1;
    if (wvs_config_set(cfg, "sigma", "-2mm") != WVS_STATUS_INVALID_ARGUMENT) return 2;
    if (strstr(wvs_last_error(), "sigma") == NULL) return 3;
    char *report = NULL;
    if (wvs_analytic_report(cfg, &report) != WVS_STATUS_OK) return 4;
    printf("%.4f %d\n", a.alpha, strstr(report, "alpha") != NULL);
    wvs_string_free(report);
    wvs_config_free(cfg);
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).parent().unwrap().to_path_buf();
    let lib = target.join("debug").join("libwvsnr_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi_c");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let build = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("C compiler");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "299.3405 1");
}
