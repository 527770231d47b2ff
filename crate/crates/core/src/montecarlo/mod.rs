//! Monte Carlo photon counting on a split detector.
//!
//! Each trial is one integration window. Photon numbers are Poisson; the
//! arrival positions follow a [`TransverseDistribution`] (plain Gaussian for
//! standard detection, the exact dark port for the weak-value setup).
//! Technical noise is added to the inferred position after post-selection.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, trial)`, and
//! the per-trial signals are reduced in trial order, so results are
//! bit-identical for a given seed whatever the worker count.

pub mod poisson;

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analytics::{NoiseModel, PhotonBudget};
use crate::distribution::TransverseDistribution;
use crate::error::{non_negative, Error, Result};

/// Largest expected photon count per trial accepted in per-photon mode.
pub const PER_PHOTON_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Draw every photon position (exact counting picture, small N).
    PerPhoton,
    /// Draw the half-plane counts directly as independent Poissons.
    PoissonCount,
}

impl SamplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMode::PerPhoton => "per-photon",
            SamplingMode::PoissonCount => "poisson-count",
        }
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SamplingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "per-photon" => Ok(SamplingMode::PerPhoton),
            "poisson-count" => Ok(SamplingMode::PoissonCount),
            other => Err(format!("unknown mode `{other}` (per-photon | poisson-count)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Count difference `N₊ − N₋`.
    Split,
    /// Photon centroid (m).
    Centroid,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Split => "split",
            Estimator::Centroid => "centroid",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "split" => Ok(Estimator::Split),
            "centroid" => Ok(Estimator::Centroid),
            other => Err(format!("unknown estimator `{other}` (split | centroid)")),
        }
    }
}

/// One detection configuration (standard or weak-value).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub distribution: TransverseDistribution,
    /// Photons entering the setup per integration window.
    pub photon_budget: PhotonBudget,
    pub noise: NoiseModel,
    pub mode: SamplingMode,
    pub estimator: Estimator,
    /// Fraction of the input photons reaching the detector.
    pub post_selection_mass: f64,
}

impl Scenario {
    /// Standard detection: every input photon reaches the detector.
    pub fn standard(
        distribution: TransverseDistribution,
        photon_budget: PhotonBudget,
        noise: NoiseModel,
        mode: SamplingMode,
        estimator: Estimator,
    ) -> Result<Self> {
        Self::new(distribution, photon_budget, noise, mode, estimator, 1.0)
    }

    /// Post-selected detection; the detector sees `distribution.mass()` of
    /// the input photons.
    pub fn post_selected(
        distribution: TransverseDistribution,
        photon_budget: PhotonBudget,
        noise: NoiseModel,
        mode: SamplingMode,
        estimator: Estimator,
    ) -> Result<Self> {
        let mass = distribution.mass();
        Self::new(distribution, photon_budget, noise, mode, estimator, mass)
    }

    pub fn new(
        distribution: TransverseDistribution,
        photon_budget: PhotonBudget,
        noise: NoiseModel,
        mode: SamplingMode,
        estimator: Estimator,
        post_selection_mass: f64,
    ) -> Result<Self> {
        noise.validate()?;
        non_negative("N", photon_budget.n)?;
        if !(post_selection_mass > 0.0 && post_selection_mass <= 1.0) {
            return Err(Error::invalid(
                "post_selection_mass",
                format!("must lie in (0, 1] (got {post_selection_mass})"),
            ));
        }
        Ok(Self {
            distribution,
            photon_budget,
            noise,
            mode,
            estimator,
            post_selection_mass,
        })
    }

    /// Mean detected photon count per trial, after post-selection and
    /// quantum efficiency.
    pub fn expected_count(&self) -> f64 {
        self.photon_budget.n * self.noise.eta_q * self.post_selection_mass
    }

    /// Standard deviation of the technical noise per integration window (m).
    pub fn technical_sigma(&self) -> f64 {
        self.noise.s_xi / self.photon_budget.integration_time.sqrt()
    }

    pub fn with_technical_noise(&self, s_xi: f64) -> Self {
        let mut s = self.clone();
        s.noise.s_xi = s_xi;
        s
    }

    fn check_tractable(&self) -> Result<()> {
        let expected = self.expected_count();
        if self.mode == SamplingMode::PerPhoton && expected > PER_PHOTON_LIMIT {
            return Err(Error::Tractability {
                expected,
                limit: PER_PHOTON_LIMIT,
            });
        }
        Ok(())
    }
}

/// Seed for counter-based per-trial substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
enum Lane {
    Counts = 0,
    Technical = 1,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn stream(&self, trial: u64, lane: Lane) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * trial + lane as u64);
        rng
    }
}

/// Empirical SNR over trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrEstimate {
    pub snr: f64,
    /// Jackknife standard error of `snr`.
    pub std_error: f64,
    pub trials: usize,
    pub mean_signal: f64,
    pub signal_std: f64,
}

impl SnrEstimate {
    /// Mean over sample standard deviation, with a leave-one-out jackknife
    /// error.
    pub fn from_signals(signals: &[f64]) -> Result<Self> {
        let t = signals.len();
        if t < 2 {
            return Err(Error::TooFewTrials(t));
        }
        let tf = t as f64;
        let mean = signals.iter().sum::<f64>() / tf;
        let q: f64 = signals.iter().map(|x| (x - mean) * (x - mean)).sum();
        let std = (q / (tf - 1.0)).sqrt();
        let snr = ratio(mean, std);

        let std_error = if t >= 3 {
            let loo: Vec<f64> = signals
                .iter()
                .map(|x| {
                    let y = x - mean;
                    let m = mean - y / (tf - 1.0);
                    let v = ((q - y * y * tf / (tf - 1.0)) / (tf - 2.0)).max(0.0);
                    ratio(m, v.sqrt())
                })
                .collect();
            let bar = loo.iter().sum::<f64>() / tf;
            ((tf - 1.0) / tf * loo.iter().map(|s| (s - bar) * (s - bar)).sum::<f64>()).sqrt()
        } else {
            // Large-sample error of mean/std for a normal signal.
            ((1.0 + 0.5 * snr * snr) / tf).sqrt()
        };

        Ok(Self {
            snr,
            std_error,
            trials: t,
            mean_signal: mean,
            signal_std: std,
        })
    }

    /// `(self − other) / √(se₁² + se₂²)`.
    pub fn z_against(&self, other: &SnrEstimate) -> f64 {
        (self.snr - other.snr) / self.std_error.hypot(other.std_error)
    }

    /// `(self − value) / se`.
    pub fn z_against_value(&self, value: f64) -> f64 {
        (self.snr - value) / self.std_error
    }
}

fn ratio(mean: f64, std: f64) -> f64 {
    if std > 0.0 {
        mean / std
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    }
}

/// Poisson half-plane counts `(N₊, N₋)` with means `expected·p±`.
pub fn split_counts<R: Rng + ?Sized>(dist: &TransverseDistribution, expected: f64, rng: &mut R) -> (u64, u64) {
    let plus = poisson::sample(expected * dist.p_plus(), rng);
    let minus = poisson::sample(expected * dist.p_minus(), rng);
    (plus, minus)
}

/// Linearized split-detector inversion `√(π/2) σ (N₊ − N₋)/(N₊ + N₋)`.
pub fn estimate_deflection(n_plus: u64, n_minus: u64, sigma: f64) -> Result<f64> {
    let total = n_plus + n_minus;
    if total == 0 {
        return Err(Error::NoSignal);
    }
    Ok(FRAC_PI_2.sqrt() * sigma * (n_plus as f64 - n_minus as f64) / total as f64)
}

fn one_trial(scenario: &Scenario, rng: &RngSpec, trial: u64) -> Result<f64> {
    let dist = &scenario.distribution;
    let expected = scenario.expected_count();
    let mut counts = rng.stream(trial, Lane::Counts);

    let xi = if scenario.noise.s_xi > 0.0 {
        let mut tech = rng.stream(trial, Lane::Technical);
        let z: f64 = tech.sample(StandardNormal);
        z * scenario.technical_sigma()
    } else {
        0.0
    };

    match (scenario.mode, scenario.estimator) {
        (SamplingMode::PoissonCount, Estimator::Split) => {
            let (plus, minus) = split_counts(dist, expected, &mut counts);
            Ok(split_signal(plus, minus, xi, dist.std_dev()))
        }
        (SamplingMode::PoissonCount, Estimator::Centroid) => {
            let n = poisson::sample(expected, &mut counts);
            if n == 0 {
                return Err(Error::NoSignal);
            }
            // Sample mean of n arrivals, by the central limit theorem.
            let z: f64 = counts.sample(StandardNormal);
            Ok(dist.mean() + z * dist.std_dev() / (n as f64).sqrt() + xi)
        }
        (SamplingMode::PerPhoton, estimator) => {
            let n = poisson::sample(expected, &mut counts);
            match estimator {
                Estimator::Split => {
                    let mut plus = 0u64;
                    for _ in 0..n {
                        if dist.sample(&mut counts) > 0.0 {
                            plus += 1;
                        }
                    }
                    Ok(split_signal(plus, n - plus, xi, dist.std_dev()))
                }
                Estimator::Centroid => {
                    if n == 0 {
                        return Err(Error::NoSignal);
                    }
                    let sum: f64 = (0..n).map(|_| dist.sample(&mut counts)).sum();
                    Ok(sum / n as f64 + xi)
                }
            }
        }
    }
}

/// Count difference, with technical noise `xi` (m) mapped into count units
/// through the split-detector inversion.
fn split_signal(plus: u64, minus: u64, xi: f64, sigma: f64) -> f64 {
    let diff = plus as f64 - minus as f64;
    if xi == 0.0 {
        return diff;
    }
    diff + xi * (plus + minus) as f64 / (FRAC_PI_2.sqrt() * sigma)
}

/// Per-trial signals in trial order.
pub fn trial_signals(scenario: &Scenario, trials: usize, rng: &RngSpec) -> Result<Vec<f64>> {
    scenario.check_tractable()?;
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| one_trial(scenario, rng, trial))
        .collect()
}

pub fn run_trials(scenario: &Scenario, trials: usize, rng: &RngSpec) -> Result<SnrEstimate> {
    if trials < 2 {
        return Err(Error::TooFewTrials(trials));
    }
    SnrEstimate::from_signals(&trial_signals(scenario, trials, rng)?)
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `None`.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Outcome of the technical-noise suppression check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuppressionReport {
    /// Technical-noise variance of the standard readout (m²).
    pub variance_sd: f64,
    /// Technical-noise variance of the rescaled weak-value readout (m²).
    pub variance_wva_rescaled: f64,
    /// `variance_wva_rescaled / variance_sd`.
    pub ratio: f64,
    /// Expected ratio, the post-selection probability.
    pub expected: f64,
}

/// Compares the technical-noise variance of the standard readout with that
/// of the weak-value readout rescaled by `√P_ps`.
///
/// Both scenarios must use the centroid estimator. The technical
/// contribution is isolated by running each scenario twice on the same seed,
/// with and without technical noise, and differencing the variances.
/// Returns `Ok(None)` when `s_xi == 0`.
pub fn technical_noise_suppression_check(
    sd: &Scenario,
    wva: &Scenario,
    s_xi: f64,
    trials: usize,
    rng: &RngSpec,
) -> Result<Option<SuppressionReport>> {
    non_negative("s_xi", s_xi)?;
    if s_xi == 0.0 {
        return Ok(None);
    }
    for s in [sd, wva] {
        if s.estimator != Estimator::Centroid {
            return Err(Error::invalid("estimator", "suppression check needs the centroid estimator"));
        }
        let shot = s.distribution.std_dev() / s.expected_count().sqrt();
        let technical = s.with_technical_noise(s_xi).technical_sigma();
        if technical < 10.0 * shot {
            return Err(Error::invalid(
                "s_xi",
                format!("technical term {technical:e} m must exceed 10x the shot term {shot:e} m"),
            ));
        }
    }
    let induced = |s: &Scenario| -> Result<f64> {
        let noisy = trial_signals(&s.with_technical_noise(s_xi), trials, rng)?;
        let clean = trial_signals(&s.with_technical_noise(0.0), trials, rng)?;
        Ok(sample_variance(&noisy) - sample_variance(&clean))
    };
    let variance_sd = induced(sd)? * sd.post_selection_mass;
    let variance_wva_rescaled = induced(wva)? * wva.post_selection_mass;
    Ok(Some(SuppressionReport {
        variance_sd,
        variance_wva_rescaled,
        ratio: variance_wva_rescaled / variance_sd,
        expected: wva.post_selection_mass / sd.post_selection_mass,
    }))
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}
