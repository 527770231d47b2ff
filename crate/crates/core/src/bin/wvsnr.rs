use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wvsnr::cli::{cmd_analytic, cmd_compare, cmd_simulate, cmd_sweep, OutputFormat, SweepArgs, WORKERS_ENV};
use wvsnr::config::{parse_config, Config};
use wvsnr::experiments::{Engines, SweepParameter};
use wvsnr::montecarlo::with_workers;
use wvsnr::units::parse_quantity;
use wvsnr::Error;

/// Split-detection and weak-value-amplified beam deflection: closed-form SNR
/// model and Monte Carlo photon-counting simulator.
#[derive(Debug, Parser)]
#[command(name = "wvsnr", version, after_long_help = Config::key_help(), after_help = "Run with --help for the list of config keys.")]
struct Cli {
    /// Config file of `key = value` lines (`#` starts a comment).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set sigma=1.2mm`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// RNG seed; defaults to the config `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path for CSV (or SVG when --format svg). Stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for sweeps.
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the closed-form model for the current config.
    Analytic,
    /// Monte Carlo estimate of the SD and WVA SNR against the closed forms.
    Simulate(TrialArgs),
    /// Sweep one parameter and emit CSV and/or SVG.
    Sweep(SweepFlags),
    /// Analytic-vs-Monte-Carlo table for both estimators.
    Compare(TrialArgs),
}

#[derive(Debug, Args)]
struct TrialArgs {
    /// Number of trials; defaults to the config `trials` key.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepFlags {
    /// drive_mV | beam_radius | detector_distance | power
    #[arg(long)]
    param: SweepParameter,
    /// First value; unit suffix accepted (bare drive values are mV, others SI).
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    /// Last value; unit suffix accepted.
    #[arg(long, allow_hyphen_values = true)]
    to: Option<String>,
    /// Number of grid points.
    #[arg(long, default_value_t = 11)]
    steps: usize,
    /// analytic | mc | both
    #[arg(long, default_value = "both")]
    engine: Engines,
    /// Trials per Monte Carlo point; defaults to the config `trials` key.
    #[arg(long)]
    trials: Option<usize>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn hint(err: &Error) -> Option<&'static str> {
    match err {
        Error::DegenerateDarkPort { .. } => Some("move phi_half_deg away from 0 and 180 deg"),
        Error::Tractability { .. } => Some("use mode = poisson-count, or lower power/tau"),
        Error::TooFewTrials(_) => Some("pass --trials 2 or more"),
        Error::Config { .. } => Some("run `wvsnr --help` for the list of config keys"),
        Error::NoSignal => Some("set a nonzero drive"),
        _ => None,
    }
}

fn workers() -> Result<Option<usize>, String> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| format!("{WORKERS_ENV} must be a positive integer, got `{v}`")),
        _ => Ok(None),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bound(raw: &Option<String>, param: SweepParameter, flag: &str) -> Result<Option<f64>, String> {
    raw.as_deref()
        .map(|t| parse_quantity(t, param.dimension(), param.bare_scale()).map_err(|e| format!("--{flag}: {e}")))
        .transpose()
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = parse_config(cli.config.as_deref(), &cli.overrides)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let workers = workers().map_err(Error::InvalidSweep)?;
    match cli.command {
        Command::Analytic => print!("{}", cmd_analytic(&cfg)?),
        Command::Simulate(t) => {
            let trials = t.trials.unwrap_or(cfg.trials);
            let out = with_workers(workers, || cmd_simulate(&cfg, trials, seed))?;
            print!("{}", out.report);
            if let Some(path) = cli.out.as_deref() {
                write_or_print(Some(path), &out.csv)?;
            }
        }
        Command::Compare(t) => {
            let trials = t.trials.unwrap_or(cfg.trials);
            print!("{}", with_workers(workers, || cmd_compare(&cfg, trials, seed))?);
        }
        Command::Sweep(f) => {
            let args = SweepArgs {
                parameter: f.param,
                from: bound(&f.from, f.param, "from").map_err(Error::InvalidSweep)?,
                to: bound(&f.to, f.param, "to").map_err(Error::InvalidSweep)?,
                steps: f.steps,
                engines: f.engine,
                trials: f.trials.unwrap_or(cfg.trials),
            };
            let out = with_workers(workers, || cmd_sweep(&cfg, &args, seed))?;
            eprint!("{}", out.summary);
            let out_path = cli.out.as_deref();
            match cli.format {
                OutputFormat::Csv => write_or_print(out_path, &out.csv)?,
                OutputFormat::Svg => write_or_print(out_path, &out.svg)?,
                OutputFormat::Both => {
                    write_or_print(out_path, &out.csv)?;
                    let svg_path = out_path
                        .map(|p| p.with_extension("svg"))
                        .unwrap_or_else(|| PathBuf::from(format!("sweep_{}.svg", args.parameter)));
                    write_or_print(Some(&svg_path), &out.svg)?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(h) = hint(&e) {
                eprintln!("hint: {h}");
            }
            ExitCode::FAILURE
        }
    }
}
