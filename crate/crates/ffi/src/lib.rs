//! C ABI for `wvsnr`.
//!
//! Conventions:
//! - Every fallible function returns a [`WvsStatus`]; on failure the message
//!   is available from [`wvs_last_error`] on the same thread.
//! - A [`WvsConfig`] is an opaque handle created by `wvs_config_new` or
//!   `wvs_config_from_file` and released with `wvs_config_free`.
//! - Strings returned through `char **` out-parameters are owned by the
//!   caller and must be released with `wvs_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wvsnr::analytics::{photons_from_power, snr_focused, snr_sd, snr_wva, weak_value_factors};
use wvsnr::cli::{cmd_analytic, cmd_simulate, cmd_sweep, SweepArgs};
use wvsnr::config::{parse_config, Config};
use wvsnr::experiments::{Engines, SweepParameter};
use wvsnr::optics::dark_port_moments;
use wvsnr::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WvsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateDarkPort = 3,
    Intractable = 4,
    Config = 5,
    Io = 6,
    Internal = 7,
}

/// Opaque configuration handle.
pub struct WvsConfig {
    inner: Config,
}

/// Closed-form quantities for one configuration (SI units).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WvsAnalytic {
    pub n: f64,
    pub d: f64,
    pub amplification: f64,
    pub p_ps: f64,
    pub alpha: f64,
    pub alpha_f: f64,
    pub snr_sd: f64,
    pub snr_wva: f64,
    pub snr_focused: f64,
}

/// Monte Carlo estimates for the standard and weak-value setups.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WvsSimulation {
    pub snr_sd: f64,
    pub snr_sd_se: f64,
    pub snr_wva: f64,
    pub snr_wva_se: f64,
    pub ratio: f64,
    pub alpha: f64,
}

/// Dark-port mass, centroid (m) and variance (m²).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WvsMoments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> WvsStatus {
    match err {
        Error::InvalidParameter { .. } | Error::NoSignal | Error::TooFewTrials(_) | Error::InvalidSweep(_) => {
            WvsStatus::InvalidArgument
        }
        Error::DegenerateDarkPort { .. } => WvsStatus::DegenerateDarkPort,
        Error::Tractability { .. } => WvsStatus::Intractable,
        Error::Config { .. } => WvsStatus::Config,
        Error::Io { .. } => WvsStatus::Io,
    }
}

struct Failure(WvsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(WvsStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WvsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WvsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WvsStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(WvsStatus::InvalidArgument, format!("`{what}` is not valid UTF-8")))
}

unsafe fn config<'a>(cfg: *const WvsConfig) -> Result<&'a Config, Failure> {
    cfg.as_ref().map(|c| &c.inner).ok_or_else(|| null("cfg"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(WvsStatus::Internal, "output contains NUL".into()))?;
    write(out, c.into_raw(), "out")
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wvs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wvs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration holding the default large-interferometer setup.
#[no_mangle]
pub extern "C" fn wvs_config_new() -> *mut WvsConfig {
    Box::into_raw(Box::new(WvsConfig {
        inner: Config::default(),
    }))
}

/// Parses a config file into a new handle stored in `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wvs_config_from_file(path: *const c_char, out: *mut *mut WvsConfig) -> WvsStatus {
    guard(|| {
        let path = text(path, "path")?;
        let inner = parse_config(Some(Path::new(path)), &[])?;
        write(out, Box::into_raw(Box::new(WvsConfig { inner })), "out")
    })
}

/// Sets one key using the config-file syntax, e.g. `("sigma", "1.2mm")`.
///
/// # Safety
/// `cfg` must come from this library; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn wvs_config_set(cfg: *mut WvsConfig, key: *const c_char, value: *const c_char) -> WvsStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let line = format!("{}={}", text(key, "key")?, text(value, "value")?);
        let mut next = cfg.inner.clone();
        next.apply_overrides(&[line])?;
        cfg.inner = next;
        Ok(())
    })
}

/// Releases a configuration handle. NULL is ignored.
///
/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wvs_config_free(cfg: *mut WvsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wvs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `sqrt(2/pi) sqrt(n) d / sigma`.
#[no_mangle]
pub extern "C" fn wvs_snr_sd(n: f64, d: f64, sigma: f64) -> f64 {
    snr_sd(n, d, sigma)
}

/// Exact dark-port moments for beam radius `sigma`, phase `phi` and
/// transverse kick `kappa` (1/m).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wvs_dark_port_moments(sigma: f64, phi: f64, kappa: f64, out: *mut WvsMoments) -> WvsStatus {
    guard(|| {
        let m = dark_port_moments(sigma, phi, kappa)?;
        write(
            out,
            WvsMoments {
                mass: m.mass,
                mean: m.mean,
                variance: m.variance,
            },
            "out",
        )
    })
}

/// Closed-form quantities for `cfg`.
///
/// # Safety
/// `cfg` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wvs_analytic(cfg: *const WvsConfig, out: *mut WvsAnalytic) -> WvsStatus {
    guard(|| {
        let s = &config(cfg)?.setup;
        let n = photons_from_power(s.power, s.tau, s.wavelength)?.detected(s.noise.eta_q).n;
        let defl = s.deflection()?;
        let w = weak_value_factors(s.k0, s.sigma, s.phi, s.l_md, n, defl.d)?;
        let r = snr_sd(n, defl.d, s.sigma);
        let focused = snr_focused(n, s.k0 * defl.beam_deflection, s.l_md, s.k0, s.l_md, s.sigma)?;
        write(
            out,
            WvsAnalytic {
                n,
                d: defl.d,
                amplification: w.amplification,
                p_ps: w.p_ps,
                alpha: w.alpha,
                alpha_f: focused.alpha_f,
                snr_sd: r,
                snr_wva: snr_wva(r, w.alpha),
                snr_focused: focused.snr,
            },
            "out",
        )
    })
}

/// Human-readable analytic report in `*out` (free with `wvs_string_free`).
///
/// # Safety
/// `cfg` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wvs_analytic_report(cfg: *const WvsConfig, out: *mut *mut c_char) -> WvsStatus {
    guard(|| write_string(out, cmd_analytic(config(cfg)?)?))
}

/// Monte Carlo run of both setups with `trials` trials.
///
/// # Safety
/// `cfg` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wvs_simulate(
    cfg: *const WvsConfig,
    trials: usize,
    seed: u64,
    out: *mut WvsSimulation,
) -> WvsStatus {
    guard(|| {
        let sim = cmd_simulate(config(cfg)?, trials, seed)?;
        write(
            out,
            WvsSimulation {
                snr_sd: sim.sd.snr,
                snr_sd_se: sim.sd.std_error,
                snr_wva: sim.wva.snr,
                snr_wva_se: sim.wva.std_error,
                ratio: sim.ratio(),
                alpha: sim.alpha,
            },
            "out",
        )
    })
}

/// Sweep CSV in `*out` (free with `wvs_string_free`).
///
/// `param` is one of `drive_mV`, `beam_radius`, `detector_distance`,
/// `power`; `from`/`to` are SI values, NaN selects the default range.
/// `engine` is `analytic`, `mc` or `both`.
///
/// # Safety
/// `cfg` must come from this library, `param` and `engine` must be
/// NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wvs_sweep_csv(
    cfg: *const WvsConfig,
    param: *const c_char,
    from: f64,
    to: f64,
    steps: usize,
    engine: *const c_char,
    trials: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> WvsStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let parameter: SweepParameter = text(param, "param")?
            .parse()
            .map_err(|e: String| Failure(WvsStatus::InvalidArgument, e))?;
        let engines: Engines = text(engine, "engine")?
            .parse()
            .map_err(|e: String| Failure(WvsStatus::InvalidArgument, e))?;
        let args = SweepArgs {
            parameter,
            from: (!from.is_nan()).then_some(from),
            to: (!to.is_nan()).then_some(to),
            steps,
            engines,
            trials,
        };
        write_string(out, cmd_sweep(cfg, &args, seed)?.csv)
    })
}
