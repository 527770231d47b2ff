//! Normalized 1-D photon-arrival densities at the detector plane, with a
//! tabulated CDF for inverse-transform sampling.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;

use crate::error::{finite, positive, Result};
use crate::optics::{check_phase, dark_port_density_unchecked, dark_port_moments};
use crate::quadrature::{gauss_kronrod_15, integrate, QuadratureOptions};

/// Half-width of the support window in units of the envelope radius.
pub const WINDOW_SIGMAS: f64 = 12.0;

/// Number of CDF panels.
pub const CDF_PANELS: usize = 4096;

/// Grid stretch: knots are `c + W·sinh(β t)/sinh(β)` for uniform `t`, which
/// puts roughly 10× more knots per unit length at the center than at the edge.
const GRID_STRETCH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// Plain beam: Gaussian centered at `center` with radius `sigma`.
    Gaussian { center: f64, sigma: f64 },
    /// Sagnac dark port, normalized by its transmitted mass.
    DarkPort { sigma: f64, phi: f64, kappa: f64 },
}

/// Monotone CDF tabulation on a center-refined grid.
#[derive(Debug, Clone)]
pub struct CdfTable {
    knots: Vec<f64>,
    cdf: Vec<f64>,
    density: Vec<f64>,
}

impl CdfTable {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.cdf
    }

    fn build(profile: &Profile, mass: f64) -> Self {
        let (center, half_width) = window(profile);
        let sinh_b = GRID_STRETCH.sinh();
        let knots: Vec<f64> = (0..=CDF_PANELS)
            .map(|i| {
                let t = 2.0 * i as f64 / CDF_PANELS as f64 - 1.0;
                center + half_width * (GRID_STRETCH * t).sinh() / sinh_b
            })
            .collect();
        let f = |x: f64| eval_density(profile, mass, x);
        let density: Vec<f64> = knots.iter().map(|&x| f(x)).collect();
        let mut cdf = Vec::with_capacity(knots.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in knots.windows(2) {
            let (panel, _) = gauss_kronrod_15(&f, w[0], w[1]);
            acc += panel.max(0.0);
            cdf.push(acc);
        }
        // Tails beyond the window are below 1e-30 and dropped.
        for c in &mut cdf {
            *c /= acc;
        }
        *cdf.last_mut().expect("non-empty") = 1.0;
        Self { knots, cdf, density }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return 0.0;
        }
        if x >= self.knots[n - 1] {
            return 1.0;
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        let s = (x - self.knots[i]) / h;
        let (f0, f1) = (self.density[i], self.density[i + 1]);
        let panel = self.cdf[i + 1] - self.cdf[i];
        let trapezoid = 0.5 * (f0 + f1);
        let frac = if trapezoid > 0.0 {
            (f0 * s + 0.5 * (f1 - f0) * s * s) / trapezoid
        } else {
            s
        };
        self.cdf[i] + panel * frac
    }

    /// Inverse CDF. Inside a panel the density is taken as linear between
    /// its end-point values, so the inversion is an exact quadratic solve.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.knots.len();
        if u <= 0.0 {
            return self.knots[0];
        }
        if u >= 1.0 {
            return self.knots[n - 1];
        }
        // First panel whose upper CDF exceeds u; never a flat panel.
        let i = (self.cdf.partition_point(|&c| c <= u) - 1).min(n - 2);
        let panel = self.cdf[i + 1] - self.cdf[i];
        let v = if panel > 0.0 { (u - self.cdf[i]) / panel } else { 0.5 };
        let (f0, f1) = (self.density[i], self.density[i + 1]);
        let m = 0.5 * (f0 + f1);
        let a = 0.5 * (f1 - f0);
        let s = if m <= 0.0 {
            v
        } else {
            // a s² + f0 s − v m = 0, root in [0, 1], cancellation-free form.
            let disc = (f0 * f0 + 4.0 * a * v * m).max(0.0);
            let denom = f0 + disc.sqrt();
            if denom > 0.0 {
                (2.0 * v * m / denom).clamp(0.0, 1.0)
            } else {
                v
            }
        };
        self.knots[i] + s * (self.knots[i + 1] - self.knots[i])
    }
}

fn window(profile: &Profile) -> (f64, f64) {
    match *profile {
        Profile::Gaussian { center, sigma } => (center, WINDOW_SIGMAS * sigma),
        Profile::DarkPort { sigma, .. } => (0.0, WINDOW_SIGMAS * sigma),
    }
}

fn eval_density(profile: &Profile, mass: f64, x: f64) -> f64 {
    match *profile {
        Profile::Gaussian { center, sigma } => {
            let z = (x - center) / sigma;
            (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma)
        }
        Profile::DarkPort { sigma, phi, kappa } => dark_port_density_unchecked(x, sigma, phi, kappa, mass),
    }
}

/// Normalized transverse photon-arrival density.
#[derive(Debug, Clone)]
pub struct TransverseDistribution {
    profile: Profile,
    mass: f64,
    mean: f64,
    variance: f64,
    p_plus: f64,
    p_minus: f64,
    table: CdfTable,
}

impl TransverseDistribution {
    /// Plain Gaussian beam of radius `sigma` centered at `center`; mass 1.
    pub fn gaussian(center: f64, sigma: f64) -> Result<Self> {
        finite("center", center)?;
        positive("sigma", sigma)?;
        let profile = Profile::Gaussian { center, sigma };
        let arg = center / (SQRT_2 * sigma);
        Ok(Self {
            profile,
            mass: 1.0,
            mean: center,
            variance: sigma * sigma,
            p_plus: 0.5 * libm::erfc(-arg),
            p_minus: 0.5 * libm::erfc(arg),
            table: CdfTable::build(&profile, 1.0),
        })
    }

    /// Sagnac dark port with envelope radius `sigma`, phase `phi` and
    /// relative kick `kappa`; mass is the exact post-selection probability.
    pub fn dark_port(sigma: f64, phi: f64, kappa: f64) -> Result<Self> {
        check_phase(phi)?;
        let moments = dark_port_moments(sigma, phi, kappa)?;
        let profile = Profile::DarkPort { sigma, phi, kappa };
        let opts = QuadratureOptions {
            abs_tol: 0.0,
            rel_tol: 1e-14,
            max_panels: 8192,
        };
        let f = |x: f64| eval_density(&profile, moments.mass, x);
        let half = WINDOW_SIGMAS * sigma;
        let plus = integrate(f, 0.0, half, &opts).value;
        let minus = integrate(f, -half, 0.0, &opts).value;
        let total = plus + minus;
        Ok(Self {
            profile,
            mass: moments.mass,
            mean: moments.mean,
            variance: moments.variance,
            p_plus: plus / total,
            p_minus: minus / total,
            table: CdfTable::build(&profile, moments.mass),
        })
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Pre-normalization fractional power (1 for a plain beam).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Probability of landing on the `x > 0` half.
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn density(&self, x: f64) -> f64 {
        eval_density(&self.profile, self.mass, x)
    }

    /// Integration window `[lo, hi]` outside of which the density is < 1e-30 of its scale.
    pub fn support(&self) -> (f64, f64) {
        let (c, w) = window(&self.profile);
        (c - w, c + w)
    }

    pub fn cdf_table(&self) -> &CdfTable {
        &self.table
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.table.cdf(x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.table.quantile(rng.gen::<f64>())
    }
}

/// Draws `n` i.i.d. positions by inverse-CDF sampling.
pub fn sample_positions<R: Rng + ?Sized>(dist: &TransverseDistribution, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| dist.sample(rng)).collect()
}
