//! Physical constants and unit-suffixed quantity parsing.
//!
//! Everything inside the crate is strict SI. Suffixes are only understood at
//! the text boundary (config files and CLI flags).

use std::fmt;

/// Planck constant (J s), exact in SI.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum (m/s), exact in SI.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Photon energy `h c / lambda` in joules.
pub fn photon_energy(wavelength: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / wavelength
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Power,
    Voltage,
    Time,
    Angle,
    /// Reciprocal length (1/m); bare numbers only.
    Wavenumber,
    Dimensionless,
}

impl Dimension {
    fn suffixes(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[
                ("μm", 1e-6),
                ("um", 1e-6),
                ("mm", 1e-3),
                ("cm", 1e-2),
                ("nm", 1e-9),
                ("pm", 1e-12),
                ("m", 1.0),
            ],
            Dimension::Power => &[
                ("μW", 1e-6),
                ("uW", 1e-6),
                ("mW", 1e-3),
                ("nW", 1e-9),
                ("W", 1.0),
            ],
            Dimension::Voltage => &[
                ("μV", 1e-6),
                ("uV", 1e-6),
                ("mV", 1e-3),
                ("V", 1.0),
            ],
            Dimension::Time => &[
                ("μs", 1e-6),
                ("us", 1e-6),
                ("ms", 1e-3),
                ("ns", 1e-9),
                ("s", 1.0),
            ],
            Dimension::Angle => &[
                ("mrad", 1e-3),
                ("urad", 1e-6),
                ("μrad", 1e-6),
                ("rad", 1.0),
                ("deg", std::f64::consts::PI / 180.0),
            ],
            Dimension::Wavenumber | Dimension::Dimensionless => &[],
        }
    }

    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Power => "W",
            Dimension::Voltage => "V",
            Dimension::Time => "s",
            Dimension::Angle => "rad",
            Dimension::Wavenumber => "1/m",
            Dimension::Dimensionless => "",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Length => "length",
            Dimension::Power => "power",
            Dimension::Voltage => "voltage",
            Dimension::Time => "time",
            Dimension::Angle => "angle",
            Dimension::Wavenumber => "wavenumber",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(name)
    }
}

/// Parses `"<number>[ ]<suffix>"` into SI. A bare number is multiplied by
/// `bare_scale` (1.0 for keys whose bare unit is already SI).
pub fn parse_quantity(text: &str, dim: Dimension, bare_scale: f64) -> Result<f64, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty value".into());
    }
    if let Ok(v) = text.parse::<f64>() {
        return Ok(v * bare_scale);
    }
    // Longest suffix first, so `mm` wins over `m`.
    let mut suffixes: Vec<_> = dim.suffixes().to_vec();
    suffixes.sort_by_key(|(s, _)| std::cmp::Reverse(s.len()));
    for (suffix, scale) in suffixes {
        if let Some(number) = text.strip_suffix(suffix) {
            let number = number.trim_end();
            if let Ok(v) = number.parse::<f64>() {
                return Ok(v * scale);
            }
        }
    }
    let accepted: Vec<_> = dim.suffixes().iter().map(|(s, _)| *s).collect();
    if accepted.is_empty() {
        Err(format!("`{text}` is not a number ({dim} takes bare SI values)"))
    } else {
        Err(format!(
            "`{text}` is not a {dim} (accepted suffixes: {})",
            accepted.join(", ")
        ))
    }
}
