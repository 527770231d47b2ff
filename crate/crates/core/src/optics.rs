//! Beam, piezo mirror, and Sagnac dark-port model.
//!
//! The dark port is modeled as the two-path interference of a collimated
//! Gaussian beam whose clockwise and counter-clockwise paths receive opposite
//! transverse kicks of `±kappa/2`:
//!
//! ```text
//! I(x) ∝ exp(-x² / 2σ²) · sin²((κ x + φ) / 2),   κ = 2 k0 Δθ
//! ```
//!
//! Its transmitted mass, centroid and spread have closed forms (see
//! [`dark_port_moments`]); for `κσ → 0` they reduce to the linear weak-value
//! result `P_ps = sin²(φ/2)` and a centroid shift `𝒜 d` with
//! `𝒜 = 2 k0 σ² cot(φ/2) / l_md` and `d = l_md Δθ`.

use std::f64::consts::{PI, TAU};

use crate::error::{finite, non_negative, positive, Error, Result};

/// Smallest admissible `φ/2` (rad), and likewise for `(2π − φ)/2`.
pub const PHASE_FLOOR: f64 = 1e-4;

/// Smallest admissible `1 − cos(φ)·exp(−κ²σ²/2)`.
pub const DARK_PORT_MIN_D: f64 = 1e-12;

/// Coherent Gaussian beam at a stated plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamState {
    /// 1/e² intensity radius parameter σ of `exp(-x²/2σ²)` (m).
    pub sigma: f64,
    /// Optical wavenumber (1/m).
    pub k0: f64,
    pub wavelength: Option<f64>,
    /// Optical power (W).
    pub power: f64,
    /// Beam radius at the diverging lens (m).
    pub radius_at_lens: Option<f64>,
    /// Lens-to-mirror distance (m).
    pub l_lm: Option<f64>,
    /// Lens focal length (m); negative for a diverging lens.
    pub focal_length: Option<f64>,
}

impl BeamState {
    pub fn new(sigma: f64, k0: f64, power: f64) -> Result<Self> {
        let beam = Self {
            sigma,
            k0,
            wavelength: None,
            power,
            radius_at_lens: None,
            l_lm: None,
            focal_length: None,
        };
        beam.validate()?;
        Ok(beam)
    }

    /// Beam with `k0 = 2π/λ`.
    pub fn from_wavelength(sigma: f64, wavelength: f64, power: f64) -> Result<Self> {
        positive("wavelength", wavelength)?;
        Self::new(sigma, TAU / wavelength, power)?.with_wavelength(wavelength)
    }

    pub fn with_wavelength(mut self, wavelength: f64) -> Result<Self> {
        self.wavelength = Some(wavelength);
        self.validate()?;
        Ok(self)
    }

    pub fn with_diverging_lens(mut self, radius_at_lens: f64, l_lm: f64, focal_length: f64) -> Result<Self> {
        self.radius_at_lens = Some(radius_at_lens);
        self.l_lm = Some(l_lm);
        self.focal_length = Some(focal_length);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("sigma", self.sigma)?;
        positive("k0", self.k0)?;
        non_negative("power", self.power)?;
        if let Some(wavelength) = self.wavelength {
            positive("wavelength", wavelength)?;
            // The nominal k0 may be a rounded figure (8e6 1/m at 780 nm).
            let mismatch = (self.k0 - TAU / wavelength).abs() / self.k0;
            if mismatch > 0.02 {
                return Err(Error::invalid(
                    "k0",
                    format!(
                        "{:e} 1/m disagrees with 2π/wavelength = {:e} 1/m by {:.2}% (limit 2%)",
                        self.k0,
                        TAU / wavelength,
                        100.0 * mismatch
                    ),
                ));
            }
        }
        if let Some(a) = self.radius_at_lens {
            positive("radius_at_lens", a)?;
        }
        if let Some(l_lm) = self.l_lm {
            positive("l_lm", l_lm)?;
        }
        if let Some(f) = self.focal_length {
            finite("focal_length", f)?;
            if f == 0.0 {
                return Err(Error::invalid("focal_length", "must be nonzero"));
            }
        }
        Ok(())
    }
}

/// Piezo-actuated mirror calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiezoCalibration {
    /// Actuator travel per millivolt of drive (m/mV).
    pub displacement_per_mv: f64,
    /// Lever arm converting travel into mirror tilt (m).
    pub lever_arm: f64,
    /// Beam angular deflection per unit mirror tilt.
    pub reflection_factor: f64,
}

impl Default for PiezoCalibration {
    fn default() -> Self {
        Self {
            displacement_per_mv: 127e-12,
            lever_arm: 0.035,
            reflection_factor: 2.0,
        }
    }
}

impl PiezoCalibration {
    pub fn validate(&self) -> Result<()> {
        positive("displacement_per_mv", self.displacement_per_mv)?;
        positive("lever_arm", self.lever_arm)?;
        positive("reflection_factor", self.reflection_factor)?;
        Ok(())
    }
}

/// Interferometer phase and geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SagnacConfig {
    /// Relative phase of the two paths (rad), in `(0, 2π)`.
    pub phi: f64,
    /// Mirror-to-detector distance (m).
    pub l_md: f64,
    pub piezo: PiezoCalibration,
}

impl SagnacConfig {
    pub fn new(phi: f64, l_md: f64, piezo: PiezoCalibration) -> Result<Self> {
        let cfg = Self { phi, l_md, piezo };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_phase(self.phi)?;
        positive("l_md", self.l_md)?;
        self.piezo.validate()
    }
}

/// Rejects phases whose dark port is numerically degenerate.
pub fn check_phase(phi: f64) -> Result<()> {
    finite("phi", phi)?;
    if !(0.0..TAU).contains(&phi) {
        return Err(Error::invalid("phi", format!("must lie in (0, 2π) (got {phi})")));
    }
    let half = 0.5 * phi;
    if half <= PHASE_FLOOR || PI - half <= PHASE_FLOOR {
        return Err(Error::DegenerateDarkPort {
            phi,
            reason: format!("phi/2 is within {PHASE_FLOOR:e} rad of a dark fringe; cot(phi/2) diverges"),
        });
    }
    Ok(())
}

/// One measurement's deflection chain, from piezo drive to the relative
/// transverse kick between the two interferometer paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectionSpec {
    pub drive_mv: f64,
    pub mirror_tilt: f64,
    /// Beam angular deflection Δθ (rad).
    pub beam_deflection: f64,
    /// Transverse displacement at the detector (m).
    pub d: f64,
    /// Relative transverse wavenumber kick `2 k0 Δθ` (1/m).
    pub kappa: f64,
}

impl DeflectionSpec {
    pub fn from_drive(drive_mv: f64, sagnac: &SagnacConfig, k0: f64) -> Result<Self> {
        let tilt = piezo_tilt(drive_mv, &sagnac.piezo)?;
        let dtheta = beam_deflection(tilt, &sagnac.piezo)?;
        let mut spec = Self::from_beam_deflection(dtheta, sagnac.l_md, k0)?;
        spec.drive_mv = drive_mv;
        spec.mirror_tilt = tilt;
        Ok(spec)
    }

    /// Deflection chain starting at the beam angle; drive and tilt are left
    /// at zero.
    pub fn from_beam_deflection(dtheta: f64, l_md: f64, k0: f64) -> Result<Self> {
        finite("beam_deflection", dtheta)?;
        positive("k0", k0)?;
        Ok(Self {
            drive_mv: 0.0,
            mirror_tilt: 0.0,
            beam_deflection: dtheta,
            d: deflection_at_detector(dtheta, l_md)?,
            kappa: 2.0 * k0 * dtheta,
        })
    }
}

/// Mirror tilt (rad) produced by a piezo drive amplitude in millivolts.
pub fn piezo_tilt(drive_mv: f64, calib: &PiezoCalibration) -> Result<f64> {
    non_negative("drive_mV", drive_mv)?;
    calib.validate()?;
    Ok(drive_mv * calib.displacement_per_mv / calib.lever_arm)
}

pub fn beam_deflection(mirror_tilt: f64, calib: &PiezoCalibration) -> Result<f64> {
    finite("mirror_tilt", mirror_tilt)?;
    positive("reflection_factor", calib.reflection_factor)?;
    Ok(calib.reflection_factor * mirror_tilt)
}

/// `d = l_md · Δθ`.
pub fn deflection_at_detector(dtheta: f64, l_md: f64) -> Result<f64> {
    finite("beam_deflection", dtheta)?;
    positive("l_md", l_md)?;
    Ok(l_md * dtheta)
}

/// Exact dark-port quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkPortMoments {
    /// Fraction of the input power exiting the dark port.
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

/// `1 − cos(φ)·exp(−κ²σ²/2)`, written to avoid cancellation near φ = 0, κ = 0.
fn dark_port_d(sigma: f64, phi: f64, kappa: f64) -> (f64, f64) {
    let s2 = 0.5 * kappa * kappa * sigma * sigma;
    let g = (-s2).exp();
    let half_sin = (0.5 * phi).sin();
    let d = -(-s2).exp_m1() + 2.0 * g * half_sin * half_sin;
    (d, g)
}

/// Closed-form mass, centroid and variance of the dark-port intensity.
///
/// With `g = exp(−κ²σ²/2)` and `D = 1 − cos φ · g`:
/// `mass = D/2`, `mean = κσ² sin φ · g / D`,
/// `variance = σ² (1 + cos φ · κ²σ² · g / D) − mean²`.
pub fn dark_port_moments(sigma: f64, phi: f64, kappa: f64) -> Result<DarkPortMoments> {
    positive("sigma", sigma)?;
    finite("kappa", kappa)?;
    check_phase(phi)?;
    let (d, g) = dark_port_d(sigma, phi, kappa);
    if d < DARK_PORT_MIN_D {
        return Err(Error::DegenerateDarkPort {
            phi,
            reason: format!("transmitted fraction {:e} below {DARK_PORT_MIN_D:e}", d / 2.0),
        });
    }
    let s2 = sigma * sigma;
    let mean = kappa * s2 * phi.sin() * g / d;
    let second = s2 * (1.0 + phi.cos() * kappa * kappa * s2 * g / d);
    Ok(DarkPortMoments {
        mass: 0.5 * d,
        mean,
        variance: second - mean * mean,
    })
}

/// Normalized dark-port density at `x` (1/m).
pub fn dark_port_intensity(x: f64, sigma: f64, phi: f64, kappa: f64) -> Result<f64> {
    let moments = dark_port_moments(sigma, phi, kappa)?;
    finite("x", x)?;
    Ok(dark_port_density_unchecked(x, sigma, phi, kappa, moments.mass))
}

pub(crate) fn dark_port_density_unchecked(x: f64, sigma: f64, phi: f64, kappa: f64, mass: f64) -> f64 {
    let fringe = (0.5 * (kappa * x + phi)).sin();
    let envelope = (-x * x / (2.0 * sigma * sigma)).exp();
    envelope * fringe * fringe / ((2.0 * PI).sqrt() * sigma * mass)
}

/// Ray-optics beam radius a distance `z_from_lens` past a thin lens:
/// `σ(z) = a·(1 − z/f)`, i.e. `a·(1 + z/|f|)` for a diverging lens.
pub fn propagate_radius(beam: &BeamState, z_from_lens: f64) -> Result<f64> {
    let a = beam
        .radius_at_lens
        .ok_or_else(|| Error::invalid("radius_at_lens", "required for propagation"))?;
    let f = beam
        .focal_length
        .ok_or_else(|| Error::invalid("focal_length", "required for propagation"))?;
    positive("radius_at_lens", a)?;
    finite("focal_length", f)?;
    if f == 0.0 {
        return Err(Error::invalid("focal_length", "must be nonzero"));
    }
    non_negative("z", z_from_lens)?;
    let sigma = a * (1.0 - z_from_lens / f);
    if sigma <= 0.0 {
        return Err(Error::invalid(
            "z",
            format!("converging beam reaches its ray-optics focus before z = {z_from_lens} m"),
        ));
    }
    Ok(sigma)
}

/// Spot at the focal plane of a lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusedSpot {
    /// Deflection at the focal plane `f k / k0` (m).
    pub d: f64,
    /// Focused radius `f / (2 k0 σ)` (m).
    pub sigma: f64,
}

pub fn focused_transform(sigma: f64, k_kick: f64, f: f64, k0: f64) -> Result<FocusedSpot> {
    positive("sigma", sigma)?;
    positive("focal_length", f)?;
    positive("k0", k0)?;
    finite("k_kick", k_kick)?;
    Ok(FocusedSpot {
        d: f * k_kick / k0,
        sigma: f / (2.0 * k0 * sigma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn piezo_chain_matches_hand_arithmetic() {
        let calib = PiezoCalibration::default();
        assert_eq!(piezo_tilt(0.0, &calib).unwrap(), 0.0);
        // 12.8 mV · 127 pm/mV / 3.5 cm
        let tilt = piezo_tilt(12.8, &calib).unwrap();
        assert!(rel(tilt, 4.6446e-8) < 1e-4, "{tilt}");
        let dtheta = beam_deflection(tilt, &calib).unwrap();
        assert!(rel(dtheta, 9.2891e-8) < 1e-4, "{dtheta}");
        let d = deflection_at_detector(dtheta, 0.14).unwrap();
        assert!(rel(d, 1.3005e-8) < 1e-4, "{d}");

        let unit = PiezoCalibration {
            displacement_per_mv: 3.5e-2,
            lever_arm: 3.5e-2,
            reflection_factor: 1.0,
        };
        assert_eq!(piezo_tilt(1.0, &unit).unwrap(), 1.0);
        assert_eq!(beam_deflection(0.3, &unit).unwrap(), 0.3);
        assert_eq!(beam_deflection(0.0, &calib).unwrap(), 0.0);
        assert_eq!(deflection_at_detector(1e-6, 1.0).unwrap(), 1e-6);
        assert_eq!(deflection_at_detector(0.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_drive_is_rejected() {
        let calib = PiezoCalibration::default();
        assert!(matches!(
            piezo_tilt(f64::NAN, &calib),
            Err(Error::InvalidParameter { name: "drive_mV", .. })
        ));
        assert!(piezo_tilt(f64::INFINITY, &calib).is_err());
        assert!(beam_deflection(f64::NAN, &calib).is_err());
    }

    #[test]
    fn deflection_spec_relations() {
        let sagnac = SagnacConfig::new(50f64.to_radians(), 0.14, PiezoCalibration::default()).unwrap();
        let spec = DeflectionSpec::from_drive(12.8, &sagnac, 8e6).unwrap();
        assert_eq!(spec.d, sagnac.l_md * spec.beam_deflection);
        assert_eq!(spec.kappa, 2.0 * 8e6 * spec.beam_deflection);
        assert!(rel(spec.kappa, 1.4863) < 1e-4, "{}", spec.kappa);
    }

    #[test]
    fn beam_wavelength_consistency() {
        assert!(BeamState::new(1.7e-3, 8e6, 1.32e-3).unwrap().with_wavelength(780e-9).is_ok());
        let err = BeamState::new(1.7e-3, 7e6, 1e-3).unwrap().with_wavelength(780e-9);
        assert!(matches!(err, Err(Error::InvalidParameter { name: "k0", .. })));
        assert!(BeamState::new(-1.0, 8e6, 0.0).is_err());
        assert!(BeamState::new(1.0, 8e6, -1.0).is_err());
        let b = BeamState::from_wavelength(1e-3, 780e-9, 1e-3).unwrap();
        assert!(rel(b.k0, 8.0554e6) < 1e-4);
    }

    #[test]
    fn phase_floor() {
        assert!(matches!(check_phase(1e-4), Err(Error::DegenerateDarkPort { .. })));
        assert!(check_phase(2.0 * 1e-4 * 1.01).is_ok());
        assert!(matches!(check_phase(TAU - 1e-5), Err(Error::DegenerateDarkPort { .. })));
        assert!(check_phase(0.0).is_err());
        assert!(check_phase(-1.0).is_err());
        assert!(check_phase(7.0).is_err());
        assert!(dark_port_moments(1e-3, 1e-4, 1.0).is_err());
    }

    #[test]
    fn zero_kick_reduces_to_gaussian() {
        let sigma = 1.7e-3;
        for phi in [0.3, 0.8727, 2.0, PI, 4.0] {
            let peak = dark_port_intensity(0.0, sigma, phi, 0.0).unwrap();
            assert!(rel(peak, 1.0 / ((2.0 * PI).sqrt() * sigma)) < 1e-14);
            let x = 0.7 * sigma;
            let v = dark_port_intensity(x, sigma, phi, 0.0).unwrap();
            let g = (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma);
            assert!(rel(v, g) < 1e-14);
            let m = dark_port_moments(sigma, phi, 0.0).unwrap();
            assert!(rel(m.mass, (phi / 2.0).sin().powi(2)) < 1e-14);
            assert_eq!(m.mean, 0.0);
            assert!(rel(m.variance, sigma * sigma) < 1e-14);
        }
    }

    #[test]
    fn bright_fringe_passes_everything() {
        let m = dark_port_moments(2e-3, PI, 0.0).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-15);
        assert_eq!(m.mean, 0.0);
        assert!(rel(m.variance, 4e-6) < 1e-14);
    }

    #[test]
    fn parity() {
        let (sigma, phi, kappa) = (1e-3, 0.9, 120.0);
        for x in [-3e-3, -1e-4, 0.0, 2e-4, 1.5e-3] {
            let a = dark_port_intensity(x, sigma, phi, kappa).unwrap();
            let b = dark_port_intensity(-x, sigma, phi, -kappa).unwrap();
            assert!(rel(a, b) < 1e-13 || (a - b).abs() < 1e-300);
        }
        let p = dark_port_moments(sigma, phi, kappa).unwrap();
        let n = dark_port_moments(sigma, phi, -kappa).unwrap();
        assert_eq!(p.mean, -n.mean);
        assert_eq!(p.variance, n.variance);
    }

    #[test]
    fn propagation() {
        let beam = BeamState::new(1.7e-3, 8e6, 1e-3)
            .unwrap()
            .with_diverging_lens(850e-6, 0.51, -0.3)
            .unwrap();
        assert_eq!(propagate_radius(&beam, 0.0).unwrap(), 850e-6);
        assert!(rel(propagate_radius(&beam, 0.3).unwrap(), 1.7e-3) < 1e-15);
        let no_lens = BeamState::new(1e-3, 8e6, 0.0).unwrap();
        assert!(propagate_radius(&no_lens, 0.1).is_err());
        let mut zero_f = beam;
        zero_f.focal_length = Some(0.0);
        assert!(propagate_radius(&zero_f, 0.1).is_err());
        assert!(beam.with_diverging_lens(1e-3, 0.5, 0.0).is_err());
    }

    #[test]
    fn focal_plane_spot() {
        let spot = focused_transform(1.7e-3, 0.0, 0.14, 8e6).unwrap();
        assert_eq!(spot.d, 0.0);
        assert!(rel(spot.sigma, 5.147e-6) < 1e-4, "{}", spot.sigma);
        assert!(focused_transform(1.7e-3, 1.0, -0.14, 8e6).is_err());
    }
}
