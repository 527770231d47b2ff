//! Closed-form signal-to-noise results for split detection, weak-value
//! amplification, diverging and focused beams, and the technical-noise
//! budget.
//!
//! Two noise conventions live side by side and are never mixed:
//! the split-detector SNR carries the `√(2/π)` factor of a half-plane
//! detector, while the technical-noise budget ([`measurement_uncertainty_sd`],
//! [`measurement_uncertainty_wva`]) is written for an ideal centroid
//! estimator.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{finite, non_negative, positive, Error, Result};
use crate::optics::{check_phase, focused_transform};
use crate::units::photon_energy;

/// Photon count and rate for a given power, integration time and wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBudget {
    pub power: f64,
    pub integration_time: f64,
    pub photon_energy: f64,
    /// Photon rate Γ (1/s).
    pub rate: f64,
    /// Expected photon count N in one integration window.
    pub n: f64,
}

impl PhotonBudget {
    /// Same budget after detection with quantum efficiency `eta_q`.
    pub fn detected(&self, eta_q: f64) -> Self {
        Self {
            rate: self.rate * eta_q,
            n: self.n * eta_q,
            ..*self
        }
    }
}

/// `N = P τ / E_γ` with `E_γ = h c / λ`.
pub fn photons_from_power(power: f64, tau: f64, wavelength: f64) -> Result<PhotonBudget> {
    non_negative("power", power)?;
    positive("tau", tau)?;
    positive("wavelength", wavelength)?;
    let e = photon_energy(wavelength);
    Ok(PhotonBudget {
        power,
        integration_time: tau,
        photon_energy: e,
        rate: power / e,
        n: power * tau / e,
    })
}

/// Technical noise and detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// White technical noise amplitude S_ξ (m·√s); `⟨ξ(t)ξ(0)⟩ = S_ξ² δ(t)`.
    pub s_xi: f64,
    /// Detector quantum efficiency in `(0, 1]`.
    pub eta_q: f64,
    pub saturation_power: Option<f64>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            s_xi: 0.0,
            eta_q: 1.0,
            saturation_power: None,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        non_negative("s_xi", self.s_xi)?;
        finite("eta_q", self.eta_q)?;
        if !(self.eta_q > 0.0 && self.eta_q <= 1.0) {
            return Err(Error::invalid("eta_q", format!("must lie in (0, 1] (got {})", self.eta_q)));
        }
        if let Some(p) = self.saturation_power {
            positive("saturation_power", p)?;
        }
        Ok(())
    }
}

/// Linear weak-value quantities for one geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValueFactors {
    /// Deflection amplification 𝒜.
    pub amplification: f64,
    /// Post-selection probability `sin²(φ/2)`.
    pub p_ps: f64,
    /// SNR gain `α = 𝒜 √P_ps`.
    pub alpha: f64,
    /// Amplified deflection `𝒜 d` (m).
    pub d_a: f64,
    /// Post-selected photon count `P_ps N`.
    pub n_a: f64,
}

/// Beam profile at the detector, `exp(−x²/2σ²) / (√(2π) σ)`.
pub fn gaussian_intensity(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Quantum-limited split-detection SNR, `√(2/π) √N d / σ`.
pub fn snr_sd(n: f64, d: f64, sigma: f64) -> f64 {
    FRAC_2_PI.sqrt() * n.sqrt() * d / sigma
}

pub fn weak_value_factors(k0: f64, sigma: f64, phi: f64, l_md: f64, n: f64, d: f64) -> Result<WeakValueFactors> {
    positive("k0", k0)?;
    positive("sigma", sigma)?;
    positive("l_md", l_md)?;
    non_negative("N", n)?;
    finite("d", d)?;
    check_phase(phi)?;
    let half = 0.5 * phi;
    let scale = 2.0 * k0 * sigma * sigma / l_md;
    let amplification = scale * half.cos() / half.sin();
    let p_ps = half.sin().powi(2);
    Ok(WeakValueFactors {
        amplification,
        p_ps,
        alpha: scale * half.cos(),
        d_a: amplification * d,
        n_a: p_ps * n,
    })
}

/// `ℛ_A = α ℛ`.
pub fn snr_wva(snr: f64, alpha: f64) -> f64 {
    alpha * snr
}

/// Diverging-beam geometry for [`snr_diverging`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergingGeometry {
    /// Beam radius at the diverging lens (m).
    pub radius_at_lens: f64,
    pub l_lm: f64,
    pub l_md: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergingSnr {
    /// Slope `C` of the SNR in the detector radius.
    pub slope: f64,
    pub snr: f64,
    /// Same value from `α ℛ (l_lm + a l_md/σ)/(l_lm + l_md)`.
    pub snr_product_form: f64,
}

impl DivergingSnr {
    /// Radius offset `a·l_md/l_lm` at which the SNR would reach zero (negated).
    pub fn intercept_over_slope(geom: &DivergingGeometry) -> f64 {
        geom.radius_at_lens * geom.l_md / geom.l_lm
    }
}

/// Weak-value SNR with a diverging lens before the interferometer:
/// `ℛ′_A = C (σ + a l_md / l_lm)`.
pub fn snr_diverging(n: f64, d: f64, sigma: f64, geom: &DivergingGeometry, k0: f64, phi: f64) -> Result<DivergingSnr> {
    non_negative("N", n)?;
    finite("d", d)?;
    positive("sigma", sigma)?;
    positive("radius_at_lens", geom.radius_at_lens)?;
    positive("l_lm", geom.l_lm)?;
    positive("l_md", geom.l_md)?;
    positive("k0", k0)?;
    check_phase(phi)?;
    let (a, l_lm, l_md) = (geom.radius_at_lens, geom.l_lm, geom.l_md);
    let cos_half = (0.5 * phi).cos();
    let slope = (8.0 * n / PI).sqrt() * k0 * l_lm * d * cos_half / (l_md * (l_lm + l_md));
    let snr = slope * (sigma + a * l_md / l_lm);
    let alpha = 2.0 * k0 * sigma * sigma * cos_half / l_md;
    let snr_product_form = alpha * snr_sd(n, d, sigma) * (l_lm + a * l_md / sigma) / (l_lm + l_md);
    Ok(DivergingSnr {
        slope,
        snr,
        snr_product_form,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusedSnr {
    pub snr: f64,
    /// `α_f = 2 k0 σ² / l_md`.
    pub alpha_f: f64,
    /// Deflection at the focal plane.
    pub d_focal: f64,
    pub sigma_focal: f64,
}

/// Split detector at the focal plane of a lens of focal length `f`, the
/// deflecting mirror sitting `l_md = f` before the detector.
pub fn snr_focused(n: f64, k_kick: f64, f: f64, k0: f64, l_md: f64, sigma: f64) -> Result<FocusedSnr> {
    non_negative("N", n)?;
    positive("l_md", l_md)?;
    let spot = focused_transform(sigma, k_kick, f, k0)?;
    Ok(FocusedSnr {
        snr: snr_sd(n, spot.d, spot.sigma),
        alpha_f: 2.0 * k0 * sigma * sigma / l_md,
        d_focal: spot.d,
        sigma_focal: spot.sigma,
    })
}

/// Time-averaged position with its two independent uncertainty terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertainty {
    /// Overall factor multiplying the bracket (1 for standard detection,
    /// `1/√P_ps` for the weak-value readout).
    pub prefactor: f64,
    /// Signal term inside the bracket (m).
    pub signal: f64,
    /// Shot-noise term `σ/√(Γt)` (m).
    pub shot: f64,
    /// Technical-noise term (m).
    pub technical: f64,
}

impl Uncertainty {
    /// Shot and technical terms combined in quadrature (they are uncorrelated).
    pub fn total_noise(&self) -> f64 {
        self.shot.hypot(self.technical)
    }

    pub fn snr(&self) -> f64 {
        self.signal / self.total_noise()
    }

    pub fn shot_snr(&self) -> f64 {
        self.signal / self.shot
    }

    pub fn technical_snr(&self) -> f64 {
        self.signal / self.technical
    }
}

/// `⟨x⟩ = d ± σ/√(Γt) ± S_ξ/√t`.
pub fn measurement_uncertainty_sd(d: f64, sigma: f64, rate: f64, t: f64, s_xi: f64) -> Result<Uncertainty> {
    finite("d", d)?;
    positive("sigma", sigma)?;
    positive("t", t)?;
    non_negative("Gamma", rate)?;
    non_negative("s_xi", s_xi)?;
    if rate * t <= 0.0 {
        return Err(Error::invalid("Gamma", "Γ·t must be > 0"));
    }
    Ok(Uncertainty {
        prefactor: 1.0,
        signal: d,
        shot: sigma / (rate * t).sqrt(),
        technical: s_xi / t.sqrt(),
    })
}

/// `⟨x⟩ = (1/√P_ps)(α d ± σ/√(Γt) ± S_ξ √P_ps/√t)`.
pub fn measurement_uncertainty_wva(
    d: f64,
    sigma: f64,
    rate: f64,
    t: f64,
    s_xi: f64,
    factors: &WeakValueFactors,
) -> Result<Uncertainty> {
    let sd = measurement_uncertainty_sd(d, sigma, rate, t, s_xi)?;
    let root = factors.p_ps.sqrt();
    Ok(Uncertainty {
        prefactor: 1.0 / root,
        signal: factors.alpha * d,
        shot: sd.shot,
        technical: sd.technical * root,
    })
}

/// Best SNR reachable when the detector saturates at `p_sat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationLimited {
    pub snr_sd_max: f64,
    pub snr_wva_max: f64,
    /// Input power usable without saturating, standard detection.
    pub input_power_sd: f64,
    /// Input power usable without saturating, weak-value readout.
    pub input_power_wva: f64,
}

impl SaturationLimited {
    pub fn ratio(&self) -> f64 {
        self.snr_wva_max / self.snr_sd_max
    }
}

pub fn saturation_limited_snr(
    p_laser: f64,
    p_sat: f64,
    tau: f64,
    wavelength: f64,
    d: f64,
    sigma: f64,
    factors: &WeakValueFactors,
) -> Result<SaturationLimited> {
    positive("laser_power", p_laser)?;
    positive("saturation_power", p_sat)?;
    let input_power_sd = p_laser.min(p_sat);
    let input_power_wva = p_laser.min(p_sat / factors.p_ps);
    let n_sd = photons_from_power(input_power_sd, tau, wavelength)?.n;
    let n_wva = photons_from_power(input_power_wva, tau, wavelength)?.n;
    Ok(SaturationLimited {
        snr_sd_max: snr_sd(n_sd, d, sigma),
        snr_wva_max: snr_wva(snr_sd(n_wva, d, sigma), factors.alpha),
        input_power_sd,
        input_power_wva,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    const PHI_25: f64 = 50.0 * PI / 180.0;

    #[test]
    fn gaussian_profile() {
        assert!((gaussian_intensity(0.0, 1.0) - 0.398942).abs() < 1e-6);
        let s = 2.5;
        assert!(rel(gaussian_intensity(s, s), (-0.5f64).exp() / ((2.0 * PI).sqrt() * s)) < 1e-15);
    }

    #[test]
    fn photon_budget() {
        let b = photons_from_power(1.32e-3, 10.5e-6, 780e-9).unwrap();
        assert!(rel(b.photon_energy, 2.547e-19) < 2e-4);
        assert!(rel(b.n, 5.44e10) < 1e-3, "{}", b.n);
        assert!(rel(b.rate, 5.18e15) < 2e-3, "{}", b.rate);
        assert_eq!(photons_from_power(0.0, 1e-5, 780e-9).unwrap().n, 0.0);
        let e = photon_energy(780e-9);
        let one = photons_from_power(e / 1e-5, 1e-5, 780e-9).unwrap();
        assert!((one.n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_detection_values() {
        assert_eq!(snr_sd(1e4, 0.0, 1.0), 0.0);
        assert!((snr_sd(1e4, 0.01, 1.0) - 0.797_884_56).abs() < 1e-7);
        let n = photons_from_power(1.32e-3, 10.5e-6, 780e-9).unwrap().n;
        let r = snr_sd(n, 1.3005e-8, 1.7e-3);
        assert!((r - 1.42).abs() < 0.01, "{r}");
    }

    #[test]
    fn weak_value_values() {
        let w = weak_value_factors(8e6, 1.7e-3, PI, 0.14, 1e6, 1e-8).unwrap();
        assert!(w.amplification.abs() < 1e-12 && w.alpha.abs() < 1e-12);
        assert!((w.p_ps - 1.0).abs() < 1e-15);

        let w = weak_value_factors(8e6, 1.7e-3, PHI_25, 0.14, 1e6, 1e-8).unwrap();
        assert!((w.p_ps - 0.178_606).abs() < 1e-6);
        assert!(rel(w.alpha, 300.0) < 0.02);
        assert!((w.alpha - 299.34).abs() < 0.01, "{}", w.alpha);
        assert!(rel(w.alpha, w.amplification * w.p_ps.sqrt()) < 1e-14);
        assert_eq!(w.d_a, w.amplification * 1e-8);
        assert_eq!(w.n_a, w.p_ps * 1e6);
        assert!(weak_value_factors(8e6, 1.7e-3, 1e-4, 0.14, 1.0, 0.0).is_err());
    }

    #[test]
    fn amplified_snr() {
        assert_eq!(snr_wva(1.42, 1.0), 1.42);
        assert!((snr_wva(1.42, 299.0) - 424.58).abs() < 1e-9);
        let (n, d, sigma) = (5.44e10, 1.3005e-8, 1.7e-3);
        let w = weak_value_factors(8e6, sigma, PHI_25, 0.14, n, d).unwrap();
        let direct = snr_sd(w.n_a, w.d_a, sigma);
        assert!(rel(snr_wva(snr_sd(n, d, sigma), w.alpha), direct) < 1e-12);
    }

    #[test]
    fn diverging_beam() {
        let geom = DivergingGeometry {
            radius_at_lens: 850e-6,
            l_lm: 0.51,
            l_md: 0.63,
        };
        let offset = DivergingSnr::intercept_over_slope(&geom);
        assert!(rel(offset, 1.0500e-3) < 1e-3);
        let at = |s: f64| snr_diverging(1e10, 1e-8, s, &geom, 8e6, PHI_25).unwrap();
        let r = at(1.1e-3).snr / at(0.38e-3).snr;
        assert!((r - 1.503).abs() < 1e-3, "{r}");
        // Symmetric-term case.
        let s = at(offset);
        assert!(rel(s.snr, 2.0 * s.slope * offset) < 1e-14);
        for sigma in [0.3e-3, 0.7e-3, 1.2e-3] {
            let v = at(sigma);
            assert!(rel(v.snr, v.snr_product_form) < 1e-12);
        }
    }

    #[test]
    fn focused_beam() {
        let f = snr_focused(1e6, 0.0, 0.14, 8e6, 0.14, 1.7e-3).unwrap();
        assert_eq!(f.snr, 0.0);
        assert!((f.alpha_f - 330.29).abs() < 0.01, "{}", f.alpha_f);
        let w = weak_value_factors(8e6, 1.7e-3, PHI_25, 0.14, 1.0, 0.0).unwrap();
        assert!(rel(f.alpha_f * (PHI_25 / 2.0).cos(), w.alpha) < 1e-14);

        let (k, l) = (12.0, 0.3);
        let f = snr_focused(1e8, k, l, 8e6, l, 1e-3).unwrap();
        let plain = snr_sd(1e8, k / 8e6 * l, 1e-3);
        assert!(rel(f.snr, f.alpha_f * plain) < 1e-12);
    }

    #[test]
    fn technical_noise_budget() {
        let u = measurement_uncertainty_sd(10e-9, 1.7e-3, 5.18e15, 10.5e-6, 0.0).unwrap();
        assert!((u.shot - 7.29e-9).abs() < 0.01e-9, "{}", u.shot);
        assert_eq!(u.technical, 0.0);
        assert_eq!(u.signal, 10e-9);
        // Centroid idealization: missing only the √(2/π) split factor.
        let (n, d, sigma) = (5e10, 3e-9, 1e-3);
        let u = measurement_uncertainty_sd(d, sigma, n, 1.0, 0.0).unwrap();
        assert!(rel(u.snr() * FRAC_2_PI.sqrt(), snr_sd(n, d, sigma)) < 1e-12);
        let huge = measurement_uncertainty_sd(d, sigma, 1e300, 1.0, 0.0).unwrap();
        assert!(huge.shot < 1e-150);
        assert!(measurement_uncertainty_sd(d, sigma, 0.0, 1.0, 0.0).is_err());
        assert!(measurement_uncertainty_sd(d, sigma, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn wva_budget_identity_case() {
        let unit = WeakValueFactors {
            amplification: 1.0,
            p_ps: 1.0,
            alpha: 1.0,
            d_a: 0.0,
            n_a: 0.0,
        };
        let sd = measurement_uncertainty_sd(2e-9, 1e-3, 1e14, 1e-5, 1e-9).unwrap();
        let wva = measurement_uncertainty_wva(2e-9, 1e-3, 1e14, 1e-5, 1e-9, &unit).unwrap();
        assert_eq!(sd, wva);
    }

    #[test]
    fn saturation_budget() {
        let (tau, lambda, d, sigma) = (10.5e-6, 780e-9, 1.3e-8, 1.7e-3);
        let w = weak_value_factors(8e6, sigma, PHI_25, 0.14, 1.0, d).unwrap();
        // Unconstrained.
        let s = saturation_limited_snr(1e-3, 1e-2, tau, lambda, d, sigma, &w).unwrap();
        assert!(rel(s.ratio(), w.alpha) < 1e-12);
        // Saturation-bound.
        let s = saturation_limited_snr(10.0, 1e-4, tau, lambda, d, sigma, &w).unwrap();
        assert!(rel(s.ratio(), w.alpha / w.p_ps.sqrt()) < 1e-12);
        // Bright fringe.
        let bright = weak_value_factors(8e6, sigma, PI, 0.14, 1.0, d).unwrap();
        let s = saturation_limited_snr(1e-3, 1e-2, tau, lambda, d, sigma, &bright).unwrap();
        assert!(s.snr_wva_max.abs() < 1e-12);
        assert!(saturation_limited_snr(1e-3, 0.0, tau, lambda, d, sigma, &w).is_err());
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::default().validate().is_ok());
        let bad = NoiseModel { eta_q: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = NoiseModel { s_xi: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn split_snr_scaling(
            n in 1.0f64..1e12,
            d in 1e-12f64..1e-3,
            sigma in 1e-5f64..1e-2,
            c in 0.01f64..100.0,
        ) {
            let base = snr_sd(n, d, sigma);
            prop_assert!(rel(snr_sd(c * n, d, sigma), c.sqrt() * base) < 1e-12);
            prop_assert!(rel(snr_sd(n, c * d, sigma), c * base) < 1e-12);
            prop_assert!(rel(snr_sd(n, d, c * sigma), base / c) < 1e-12);
        }

        #[test]
        fn wva_budget_ratios(
            d in 1e-12f64..1e-6,
            sigma in 1e-4f64..5e-3,
            rate in 1e10f64..1e17,
            t in 1e-6f64..1.0,
            s_xi in 1e-12f64..1e-6,
            half_deg in 5.0f64..85.0,
        ) {
            let phi = 2.0 * half_deg.to_radians();
            let w = weak_value_factors(8e6, sigma, phi, 0.14, 1.0, d).unwrap();
            let sd = measurement_uncertainty_sd(d, sigma, rate, t, s_xi).unwrap();
            let wva = measurement_uncertainty_wva(d, sigma, rate, t, s_xi, &w).unwrap();
            prop_assert!(rel(wva.shot_snr() / sd.shot_snr(), w.alpha) < 1e-12);
            prop_assert!(rel(wva.technical_snr() / sd.technical_snr(), w.amplification) < 1e-12);
        }
    }
}
