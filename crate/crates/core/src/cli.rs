//! Subcommand implementations behind the `wvsnr` binary.
//!
//! Each command returns its text output instead of printing it, so the
//! binary stays a thin dispatcher and the outputs can be compared byte for
//! byte in tests.

use std::f64::consts::FRAC_2_PI;
use std::fmt::Write as _;

use crate::analytics::{
    measurement_uncertainty_sd, measurement_uncertainty_wva, photons_from_power, saturation_limited_snr,
    snr_diverging, snr_focused, snr_sd, snr_wva, weak_value_factors, PhotonBudget,
};
use crate::config::Config;
use crate::distribution::TransverseDistribution;
use crate::error::{Error, Result};
use crate::experiments::{run_sweep, to_csv, Engines, SweepParameter, SweepResult, SweepSpec};
use crate::montecarlo::{run_trials, Estimator, RngSpec, Scenario, SnrEstimate};
use crate::svg::sweep_chart;

/// Environment variable holding the Monte Carlo worker count.
pub const WORKERS_ENV: &str = "WVSNR_WORKERS";

/// Measured values from the large-interferometer runs. They depend on a
/// physical detector that is not modeled and are printed for reference only.
pub const REFERENCE_MEASUREMENTS: &[(&str, &str)] = &[
    ("SD setup below ideal (drive sweep)", "1.77 ± 0.07"),
    ("WVA improvement over SD setup (drive sweep)", "39 ± 3"),
    ("WVA over ideal SD (drive sweep)", "21.8 ± 0.5"),
    ("WVA over ideal SD (power sweep)", "22.5 ± 0.5"),
    ("SD setup below ideal (l_md sweep)", "3.2 ± 0.1"),
    ("WVA SNR, roughly constant in l_md", "29 ± 1"),
    ("alpha obtained from graphed data", "55"),
];

fn line(out: &mut String, name: &str, value: String, label: &str) {
    let _ = writeln!(out, "  {name:<22} = {value:<16} [{label}]");
}

/// The full closed-form report for one configuration.
pub fn cmd_analytic(cfg: &Config) -> Result<String> {
    let s = &cfg.setup;
    let budget = photons_from_power(s.power, s.tau, s.wavelength)?;
    let detected = budget.detected(s.noise.eta_q);
    let defl = s.deflection()?;
    let n = detected.n;
    let w = weak_value_factors(s.k0, s.sigma, s.phi, s.l_md, n, defl.d)?;
    let r_sd = snr_sd(n, defl.d, s.sigma);
    let r_wva = snr_wva(r_sd, w.alpha);
    let focused = snr_focused(n, s.k0 * defl.beam_deflection, s.l_md, s.k0, s.l_md, s.sigma)?;
    let div = snr_diverging(n, defl.d, s.sigma, &s.diverging_geometry(), s.k0, s.phi)?;
    let u_sd = measurement_uncertainty_sd(defl.d, s.sigma, detected.rate, s.tau, s.noise.s_xi)?;
    let u_wva = measurement_uncertainty_wva(defl.d, s.sigma, detected.rate, s.tau, s.noise.s_xi, &w)?;

    let mut out = String::new();
    let _ = writeln!(out, "analytic report (SI units)");
    for p in &cfg.provenance {
        let _ = writeln!(out, "  config: {p}");
    }
    let _ = writeln!(out, "photon budget");
    line(&mut out, "E_gamma (J)", format!("{:.6e}", budget.photon_energy), "E_gamma = h c / lambda");
    line(&mut out, "Gamma (1/s)", format!("{:.6e}", detected.rate), "Gamma = eta_q P / E_gamma");
    line(&mut out, "N", format!("{:.6e}", n), "N = eta_q P tau / E_gamma");
    let _ = writeln!(out, "deflection");
    line(&mut out, "drive (mV)", format!("{}", s.drive_mv), "input");
    line(&mut out, "mirror tilt (rad)", format!("{:.6e}", defl.mirror_tilt), "tilt = drive * displacement_per_mV / lever_arm");
    line(&mut out, "dtheta (rad)", format!("{:.6e}", defl.beam_deflection), "dtheta = reflection_factor * tilt");
    line(&mut out, "d (m)", format!("{:.6e}", defl.d), "d = l_md * dtheta");
    let _ = writeln!(out, "weak value");
    line(&mut out, "A", format!("{:.4}", w.amplification), "A = 2 k0 sigma^2 cot(phi/2) / l_md");
    line(&mut out, "P_ps", format!("{:.6}", w.p_ps), "P_ps = sin^2(phi/2)");
    line(&mut out, "alpha", format!("{:.4}", w.alpha), "alpha = 2 k0 sigma^2 cos(phi/2) / l_md");
    line(&mut out, "alpha_f", format!("{:.4}", focused.alpha_f), "alpha_f = 2 k0 sigma^2 / l_md");
    line(&mut out, "d_a (m)", format!("{:.6e}", w.d_a), "d_a = A d");
    line(&mut out, "N_a", format!("{:.6e}", w.n_a), "N_a = P_ps N");
    let _ = writeln!(out, "signal to noise");
    line(&mut out, "R_SD", format!("{:.6}", r_sd), "R = sqrt(2/pi) sqrt(N) d / sigma");
    line(&mut out, "R_WVA", format!("{:.6}", r_wva), "R_A = alpha R");
    line(&mut out, "R_f (lens f = l_md)", format!("{:.6}", focused.snr), "R_f = alpha_f R, d' = f k / k0, sigma' = f / (2 k0 sigma)");
    line(&mut out, "C (1/m)", format!("{:.6e}", div.slope), "C = sqrt(8N/pi) k0 l_lm d cos(phi/2) / (l_md (l_lm + l_md))");
    line(&mut out, "R'_A diverging", format!("{:.6}", div.snr), "R'_A = C (sigma + a l_md / l_lm)");
    let _ = writeln!(out, "noise budget (centroid estimator, terms in m)");
    line(&mut out, "SD shot", format!("{:.6e}", u_sd.shot), "sigma / sqrt(Gamma t)");
    line(&mut out, "SD technical", format!("{:.6e}", u_sd.technical), "S_xi / sqrt(t)");
    line(&mut out, "WVA prefactor", format!("{:.6}", u_wva.prefactor), "1 / sqrt(P_ps), multiplies the three terms below");
    line(&mut out, "WVA signal", format!("{:.6e}", u_wva.signal), "alpha d");
    line(&mut out, "WVA shot", format!("{:.6e}", u_wva.shot), "sigma / sqrt(Gamma t)");
    line(&mut out, "WVA technical", format!("{:.6e}", u_wva.technical), "S_xi sqrt(P_ps) / sqrt(t)");
    line(&mut out, "SD SNR (quadrature)", format!("{:.6}", u_sd.snr()), "d / sqrt(shot^2 + technical^2)");
    line(&mut out, "WVA SNR (quadrature)", format!("{:.6}", u_wva.snr()), "alpha d / sqrt(shot^2 + technical^2)");
    if let Some(p_sat) = s.noise.saturation_power {
        let sat = saturation_limited_snr(s.power, p_sat, s.tau, s.wavelength, defl.d, s.sigma, &w)?;
        let _ = writeln!(out, "detector saturation at {p_sat:e} W");
        line(&mut out, "R_SD max", format!("{:.6}", sat.snr_sd_max), "input power min(P, P_sat)");
        line(&mut out, "R_WVA max", format!("{:.6}", sat.snr_wva_max), "input power min(P, P_sat / P_ps)");
        line(&mut out, "ratio", format!("{:.4}", sat.ratio()), "alpha, or alpha / sqrt(P_ps) when saturation binds");
    }
    if w.alpha <= 1.0 {
        let _ = writeln!(
            out,
            "warning: alpha = {:.4} <= 1; weak-value amplification gives no SNR gain at phi/2 = {:.2} deg (move phi/2 toward 0)",
            w.alpha,
            s.phi.to_degrees() / 2.0
        );
    }
    let _ = writeln!(out, "reference measurements (annotation only, not reproduced by an ideal model)");
    for (what, value) in REFERENCE_MEASUREMENTS {
        let _ = writeln!(out, "  {what}: {value}");
    }
    Ok(out)
}

/// Output of [`cmd_simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub report: String,
    pub csv: String,
    pub sd: SnrEstimate,
    pub wva: SnrEstimate,
    pub alpha: f64,
}

impl SimulationOutput {
    pub fn ratio(&self) -> f64 {
        self.wva.snr / self.sd.snr
    }
}

/// Standard and post-selected scenarios for a config.
pub fn scenarios(cfg: &Config, estimator: Estimator) -> Result<(Scenario, Scenario, PhotonBudget)> {
    let s = &cfg.setup;
    let budget = photons_from_power(s.power, s.tau, s.wavelength)?;
    let defl = s.deflection()?;
    let sd = Scenario::standard(
        TransverseDistribution::gaussian(defl.d, s.sigma)?,
        budget,
        s.noise,
        s.mode,
        estimator,
    )?;
    let wva = Scenario::post_selected(
        TransverseDistribution::dark_port(s.sigma, s.phi, defl.kappa)?,
        budget,
        s.noise,
        s.mode,
        estimator,
    )?;
    Ok((sd, wva, budget))
}

/// Closed-form expectation for a scenario's empirical SNR. Technical noise
/// enters in quadrature with the shot term.
pub fn predicted_snr(scenario: &Scenario) -> f64 {
    let dist = &scenario.distribution;
    let n = scenario.expected_count();
    let shot = dist.std_dev() / n.sqrt();
    let tech = scenario.technical_sigma();
    match scenario.estimator {
        Estimator::Split => {
            let r = snr_sd(n, dist.mean(), dist.std_dev());
            if tech > 0.0 {
                let split_shot = shot / FRAC_2_PI.sqrt();
                r * split_shot / split_shot.hypot(tech)
            } else {
                r
            }
        }
        Estimator::Centroid => dist.mean() / shot.hypot(tech),
    }
}

const SIM_CSV_HEADER: &str = "setup,estimator,mode,trials,seed,snr_mc,snr_mc_se,snr_analytic,z";

/// Runs the standard and weak-value scenarios and compares each with its
/// closed-form expectation.
pub fn cmd_simulate(cfg: &Config, trials: usize, seed: u64) -> Result<SimulationOutput> {
    if trials < 2 {
        return Err(Error::TooFewTrials(trials));
    }
    let s = &cfg.setup;
    let (sd_s, wva_s, budget) = scenarios(cfg, s.estimator)?;
    let rng = RngSpec::new(seed);
    let sd = run_trials(&sd_s, trials, &rng)?;
    let wva = run_trials(&wva_s, trials, &RngSpec::new(seed.wrapping_add(1)))?;
    let defl = s.deflection()?;
    let w = weak_value_factors(s.k0, s.sigma, s.phi, s.l_md, budget.n, defl.d)?;
    let (pred_sd, pred_wva) = (predicted_snr(&sd_s), predicted_snr(&wva_s));

    let mut report = String::new();
    let _ = writeln!(
        report,
        "simulation: {trials} trials, seed {seed}, estimator {}, mode {}",
        s.estimator, s.mode
    );
    let _ = writeln!(report, "  expected photons per window: SD {:.6e}, WVA {:.6e}", sd_s.expected_count(), wva_s.expected_count());
    let _ = writeln!(report, "  {:<5} {:>14} {:>12} {:>14} {:>8}", "setup", "snr_mc", "se", "snr_analytic", "z");
    for (name, est, pred) in [("SD", &sd, pred_sd), ("WVA", &wva, pred_wva)] {
        let _ = writeln!(
            report,
            "  {name:<5} {:>14.6} {:>12.6} {:>14.6} {:>8.3}",
            est.snr,
            est.std_error,
            pred,
            est.z_against_value(pred)
        );
    }
    let ratio = wva.snr / sd.snr;
    let _ = writeln!(
        report,
        "  WVA/SD ratio {:.4} vs alpha {:.4} [R_A / R = alpha]: deviation {:+.2}%",
        ratio,
        w.alpha,
        100.0 * (ratio / w.alpha - 1.0)
    );

    let mut csv = String::from(SIM_CSV_HEADER);
    csv.push('\n');
    for (name, est, pred) in [("sd", &sd, pred_sd), ("wva", &wva, pred_wva)] {
        let _ = writeln!(
            csv,
            "{name},{},{},{trials},{seed},{:.8e},{:.8e},{:.8e},{:.8e}",
            s.estimator,
            s.mode,
            est.snr,
            est.std_error,
            pred,
            est.z_against_value(pred)
        );
    }
    Ok(SimulationOutput {
        report,
        csv,
        sd,
        wva,
        alpha: w.alpha,
    })
}

/// Analytic-versus-Monte-Carlo table for both estimators.
pub fn cmd_compare(cfg: &Config, trials: usize, seed: u64) -> Result<String> {
    if trials < 2 {
        return Err(Error::TooFewTrials(trials));
    }
    let mut out = String::new();
    let _ = writeln!(out, "analytic vs Monte Carlo ({trials} trials, seed {seed}, mode {})", cfg.setup.mode);
    let _ = writeln!(
        out,
        "  {:<5} {:<9} {:>14} {:>14} {:>12} {:>8}",
        "setup", "estimator", "analytic", "monte_carlo", "se", "z"
    );
    for (k, estimator) in [Estimator::Split, Estimator::Centroid].into_iter().enumerate() {
        let (sd, wva, _) = scenarios(cfg, estimator)?;
        for (j, (name, scenario)) in [("SD", &sd), ("WVA", &wva)].into_iter().enumerate() {
            let rng = RngSpec::new(seed.wrapping_add((2 * k + j) as u64));
            let est = run_trials(scenario, trials, &rng)?;
            let pred = predicted_snr(scenario);
            let _ = writeln!(
                out,
                "  {name:<5} {:<9} {:>14.6} {:>14.6} {:>12.6} {:>8.3}",
                estimator.as_str(),
                pred,
                est.snr,
                est.std_error,
                est.z_against_value(pred)
            );
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("unknown format `{other}` (csv | svg | both)")),
        }
    }
}

/// Sweep flags after unit conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepArgs {
    pub parameter: SweepParameter,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: usize,
    pub engines: Engines,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub result: SweepResult,
    pub csv: String,
    pub svg: String,
    pub summary: String,
}

pub fn sweep_spec(cfg: &Config, args: &SweepArgs, seed: u64) -> SweepSpec {
    let defaults = crate::experiments::default_spec(args.parameter);
    SweepSpec {
        parameter: args.parameter,
        from: args.from.unwrap_or(defaults.from),
        to: args.to.unwrap_or(defaults.to),
        steps: args.steps,
        setup: cfg.setup,
        engines: args.engines,
        trials: args.trials,
        seed,
    }
}

pub fn cmd_sweep(cfg: &Config, args: &SweepArgs, seed: u64) -> Result<SweepOutput> {
    let spec = sweep_spec(cfg, args, seed);
    let result = run_sweep(&spec)?;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "sweep {} over [{:e}, {:e}] in {} steps, estimator {}",
        spec.parameter, spec.from, spec.to, spec.steps, result.estimator
    );
    for f in &result.fits {
        let _ = writeln!(
            summary,
            "  fit {:<16} {:<24} slope {:.6e} (se {:.2e}) intercept {:.6e} residual {:.3e}",
            f.branch.name(),
            f.model.name(),
            f.slope,
            f.slope_se,
            f.intercept,
            f.residual_norm
        );
    }
    use crate::experiments::Branch;
    if let (Some(sd), Some(wva)) = (result.fit_for(Branch::StandardAnalytic), result.fit_for(Branch::WeakValueAnalytic)) {
        if spec.parameter == SweepParameter::DriveVoltage {
            let _ = writeln!(summary, "  analytic slope ratio WVA/SD = {:.4} [alpha]", wva.slope / sd.slope);
        }
    }
    Ok(SweepOutput {
        csv: to_csv(&result),
        svg: sweep_chart(&result),
        result,
        summary,
    })
}
