//! Flat `key = value` configuration with unit suffixes.
//!
//! ```text
//! # large interferometer
//! sigma        = 1.7mm
//! phi_half_deg = 25
//! power        = 1.32mW
//! ```
//!
//! `#` starts a comment. Values are converted to SI on parse; bare numbers
//! are SI except for `phi_half_deg` (degrees) and `displacement_per_mV`
//! (metres per millivolt). Unknown keys are rejected with their line number.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analytics::NoiseModel;
use crate::error::{Error, Result};
use crate::experiments::Setup;
use crate::units::{parse_quantity, Dimension};

/// One documented configuration key.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub dimension: Dimension,
    pub help: &'static str,
}

const fn key(name: &'static str, dimension: Dimension, help: &'static str) -> KeySpec {
    KeySpec { name, dimension, help }
}

pub const KEYS: &[KeySpec] = &[
    key("sigma", Dimension::Length, "beam radius at the detector [1.7mm]"),
    key("wavelength", Dimension::Length, "optical wavelength, sets the photon energy [780nm]"),
    key("k0", Dimension::Wavenumber, "optical wavenumber in 1/m, within 2% of 2π/wavelength [8e6]"),
    key("power", Dimension::Power, "laser power entering the interferometer [1.32mW]"),
    key("tau", Dimension::Time, "integration time per measurement window [10.5us]"),
    key("phi", Dimension::Angle, "relative phase of the two interferometer paths [50deg]"),
    key("phi_half_deg", Dimension::Angle, "half the relative phase, bare value in degrees [25]"),
    key("l_md", Dimension::Length, "piezo mirror to detector distance [0.14m]"),
    key("l_lm", Dimension::Length, "diverging lens to piezo mirror distance [0.51m]"),
    key("radius_at_lens", Dimension::Length, "beam radius at the diverging lens [850um]"),
    key("drive", Dimension::Voltage, "piezo drive amplitude [12.8mV]"),
    key("displacement_per_mV", Dimension::Length, "piezo travel per mV of drive [127pm]"),
    key("lever_arm", Dimension::Length, "piezo lever arm [3.5cm]"),
    key("reflection_factor", Dimension::Dimensionless, "beam deflection per unit mirror tilt [2]"),
    key("s_xi", Dimension::Dimensionless, "technical white-noise amplitude in m·√s [0]"),
    key("eta_q", Dimension::Dimensionless, "detector quantum efficiency in (0, 1] [1]"),
    key("saturation_power", Dimension::Power, "detector saturation power, 0 for none [0]"),
    key("trials", Dimension::Dimensionless, "Monte Carlo trials per estimate [1000]"),
    key("seed", Dimension::Dimensionless, "Monte Carlo seed [42]"),
    key("mode", Dimension::Dimensionless, "Monte Carlo sampling: poisson-count | per-photon [poisson-count]"),
    key("estimator", Dimension::Dimensionless, "signal estimator: split | centroid [split]"),
];

/// Parsed configuration; all physical values in SI.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub setup: Setup,
    pub trials: usize,
    pub seed: u64,
    /// Where the values came from: the file (if any), then each override.
    pub provenance: Vec<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            setup: Setup::default(),
            trials: 1000,
            seed: 42,
            provenance: Vec::new(),
        }
    }
}

impl Config {
    /// Parses config text on top of the defaults.
    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.apply_text(text, origin)?;
        cfg.provenance.push(origin.to_string());
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.apply_line(line, origin, i + 1)?;
        }
        Ok(())
    }

    fn apply_line(&mut self, line: &str, origin: &str, lineno: usize) -> Result<()> {
        let err = |message: String| Error::Config {
            origin: origin.to_string(),
            line: lineno,
            message,
        };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        self.set(k, v).map_err(err)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let spec = KEYS
            .iter()
            .find(|s| s.name == key)
            .ok_or_else(|| format!("unknown key `{key}`"))?;
        let q = |bare: f64| parse_quantity(value, spec.dimension, bare).map_err(|e| format!("`{key}`: {e}"));
        let s = &mut self.setup;
        match key {
            "sigma" => s.sigma = q(1.0)?,
            "wavelength" => s.wavelength = q(1.0)?,
            "k0" => s.k0 = q(1.0)?,
            "power" => s.power = q(1.0)?,
            "tau" => s.tau = q(1.0)?,
            "phi" => s.phi = q(1.0)?,
            "phi_half_deg" => s.phi = 2.0 * q(std::f64::consts::PI / 180.0)?,
            "l_md" => s.l_md = q(1.0)?,
            "l_lm" => s.l_lm = q(1.0)?,
            "radius_at_lens" => s.radius_at_lens = q(1.0)?,
            "drive" => s.drive_mv = q(1.0)? * 1e3,
            "displacement_per_mV" => s.piezo.displacement_per_mv = q(1.0)?,
            "lever_arm" => s.piezo.lever_arm = q(1.0)?,
            "reflection_factor" => s.piezo.reflection_factor = q(1.0)?,
            "s_xi" => s.noise.s_xi = q(1.0)?,
            "eta_q" => s.noise.eta_q = q(1.0)?,
            "saturation_power" => {
                let p = q(1.0)?;
                s.noise.saturation_power = (p != 0.0).then_some(p);
            }
            "trials" => self.trials = value.parse().map_err(|_| format!("`trials`: `{value}` is not a count"))?,
            "seed" => self.seed = value.parse().map_err(|_| format!("`seed`: `{value}` is not a u64"))?,
            "mode" => s.mode = value.parse()?,
            "estimator" => s.estimator = value.parse()?,
            _ => unreachable!("key table and match arms disagree on `{key}`"),
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for (i, o) in overrides.iter().enumerate() {
            let origin = format!("--set #{}", i + 1);
            self.apply_line(o, &origin, 1)?;
            self.provenance.push(format!("{origin}: {o}"));
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.setup.validate()?;
        if self.trials < 2 {
            return Err(Error::TooFewTrials(self.trials));
        }
        Ok(())
    }

    pub fn noise(&self) -> NoiseModel {
        self.setup.noise
    }

    /// Every key in canonical SI form. Parsing the dump reproduces `self`
    /// (up to provenance).
    pub fn dump(&self) -> String {
        let s = &self.setup;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("sigma", format!("{:e}", s.sigma));
        line("wavelength", format!("{:e}", s.wavelength));
        line("k0", format!("{:e}", s.k0));
        line("power", format!("{:e}", s.power));
        line("tau", format!("{:e}", s.tau));
        line("phi", format!("{:e}", s.phi));
        line("l_md", format!("{:e}", s.l_md));
        line("l_lm", format!("{:e}", s.l_lm));
        line("radius_at_lens", format!("{:e}", s.radius_at_lens));
        line("drive", format!("{:e}", s.drive_mv * 1e-3));
        line("displacement_per_mV", format!("{:e}", s.piezo.displacement_per_mv));
        line("lever_arm", format!("{:e}", s.piezo.lever_arm));
        line("reflection_factor", format!("{:e}", s.piezo.reflection_factor));
        line("s_xi", format!("{:e}", s.noise.s_xi));
        line("eta_q", format!("{:e}", s.noise.eta_q));
        line("saturation_power", format!("{:e}", s.noise.saturation_power.unwrap_or(0.0)));
        line("trials", self.trials.to_string());
        line("seed", self.seed.to_string());
        line("mode", s.mode.to_string());
        line("estimator", s.estimator.to_string());
        out
    }

    /// Human-readable key reference for `--help`.
    pub fn key_help() -> String {
        let mut out = String::from("Config keys (file lines `key = value`, or --set key=value):\n");
        for k in KEYS {
            let unit = match k.dimension {
                Dimension::Dimensionless => String::new(),
                d => format!(" ({d}, SI {})", d.si_unit()),
            };
            let _ = writeln!(out, "  {:<20} {}{}", k.name, k.help, unit);
        }
        out
    }
}

/// Reads `file` (if given) over the defaults, then applies `overrides`.
pub fn parse_config(file: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut cfg = match file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: PathBuf::from(path),
                source,
            })?;
            Config::parse_str(&text, &path.display().to_string())?
        }
        None => Config::default(),
    };
    cfg.apply_overrides(overrides)?;
    Ok(cfg)
}
