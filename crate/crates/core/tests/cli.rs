use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use wvsnr::config::KEYS;
use wvsnr::experiments::CSV_HEADER;

fn wvsnr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wvsnr"))
        .args(args)
        .env_remove("WVSNR_WORKERS")
        .output()
        .expect("spawn wvsnr")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn help_documents_every_key_and_flag() {
    let out = wvsnr(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for k in KEYS {
        assert!(text.contains(k.name), "missing key {}", k.name);
    }
    for flag in ["--config", "--set", "--seed", "--out", "--format"] {
        assert!(text.contains(flag), "missing flag {flag}");
    }
    for sub in ["analytic", "simulate", "sweep", "compare"] {
        assert!(text.contains(sub));
    }
    let sweep_help = stdout(&wvsnr(&["sweep", "--help"]));
    for flag in ["--param", "--from", "--to", "--steps", "--engine", "--trials"] {
        assert!(sweep_help.contains(flag), "missing sweep flag {flag}");
    }
}

#[test]
fn analytic_defaults_print_alpha() {
    let out = wvsnr(&["analytic"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("alpha                  = 299.3405"));
    assert!(text.contains("P_ps                   = 0.178606"));
}

#[test]
fn invalid_value_names_the_key() {
    let out = wvsnr(&["--set", "sigma=-1mm", "analytic"]);
    assert!(!out.status.success());
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).contains("sigma"));
}

#[test]
fn unknown_key_in_file_reports_line() {
    let path = scratch("bad.cfg");
    fs::write(&path, "# comment\nsigma = 1mm\nbeam_waist = 2mm\n").unwrap();
    let out = wvsnr(&["--config", path.to_str().unwrap(), "analytic"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("beam_waist") && err.contains('3'), "{err}");
}

#[test]
fn missing_config_file_is_an_error() {
    let out = wvsnr(&["--config", "/nonexistent/wvsnr.cfg", "analytic"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("/nonexistent/wvsnr.cfg"));
}

#[test]
fn single_trial_is_rejected() {
    let out = wvsnr(&["simulate", "--trials", "1"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("2 trials"));
}

#[test]
fn per_photon_mode_at_full_power_hits_guard() {
    let out = wvsnr(&["--set", "mode=per-photon", "simulate", "--trials", "10"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("poisson-count"));
}

#[test]
fn simulate_writes_csv_and_repeats_bytes() {
    let a = scratch("sim_a.csv");
    let b = scratch("sim_b.csv");
    let run = |p: &PathBuf| wvsnr(&["--seed", "42", "--out", p.to_str().unwrap(), "simulate", "--trials", "1000"]);
    let (ra, rb) = (run(&a), run(&b));
    assert!(ra.status.success() && rb.status.success());
    assert_eq!(ra.stdout, rb.stdout);
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("setup,estimator,mode,trials,seed,"));
}

#[test]
fn sweep_csv_header_and_units() {
    let out = wvsnr(&["sweep", "--param", "drive_mV", "--from", "0", "--to", "100", "--steps", "11", "--engine", "analytic"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 11);
    let last_v: f64 = rows[10][1].parse().unwrap();
    assert!((last_v - 0.1).abs() < 1e-15, "value_si is in volts");
    let sd: f64 = rows[10][2].parse().unwrap();
    let wva: f64 = rows[10][3].parse().unwrap();
    assert!((wva / sd - 299.3405).abs() < 1e-3);
    assert!(rows[10][4].is_empty(), "no Monte Carlo columns for analytic-only sweeps");
}

#[test]
fn sweep_accepts_unit_suffixes() {
    let out = wvsnr(&["sweep", "--param", "beam_radius", "--from", "0.38mm", "--to", "1.1mm", "--steps", "3", "--engine", "analytic"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("beam_radius,3.80000000e-4"));
    assert!(text.contains("beam_radius,1.10000000e-3"));
}

#[test]
fn detector_distance_wva_rows_are_constant() {
    let out = wvsnr(&["sweep", "--param", "detector_distance", "--engine", "analytic", "--steps", "6"]);
    assert!(out.status.success());
    let values: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    for v in &values {
        assert!((v / values[0] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sweep_both_formats_write_two_files() {
    let csv = scratch("drive.csv");
    let out = wvsnr(&[
        "--format", "both", "--out", csv.to_str().unwrap(),
        "sweep", "--param", "power", "--steps", "4", "--trials", "100",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(fs::read_to_string(&csv).unwrap().starts_with(CSV_HEADER));
    let svg = fs::read_to_string(csv.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn bad_worker_env_is_an_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_wvsnr"))
        .args(["simulate", "--trials", "10"])
        .env("WVSNR_WORKERS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("WVSNR_WORKERS"));
}

#[test]
fn compare_prints_table() {
    let out = wvsnr(&["compare", "--trials", "300"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 6);
}
