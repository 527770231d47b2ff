//! Split-detector beam-deflection SNR with interferometric weak-value
//! amplification.
//!
//! - [`optics`]: beam, piezo mirror, and the exact Sagnac dark-port model.
//! - [`analytics`]: closed-form SNR results and the noise budget.
//! - [`montecarlo`]: photon-counting simulator that checks the closed forms.
//! - [`experiments`]: parameter sweeps with CSV/SVG output.
//! - [`cli`]: config parsing and the `wvsnr` subcommands.

pub mod analytics;
pub mod cli;
pub mod config;
pub mod distribution;
pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod optics;
pub mod quadrature;
pub mod svg;
pub mod units;

pub use distribution::TransverseDistribution;
pub use error::{Error, Result};
