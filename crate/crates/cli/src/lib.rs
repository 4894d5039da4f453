//! Configuration, orchestration and reporting for the `nagumo` command.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod validate;

pub use artifacts::{RunSummary, HISTOGRAM_FILE, PLOT_FILE, SUMMARY_FILE};
pub use config::{ExperimentConfig, SEED_ENV};
pub use error::CliError;
pub use validate::{validate, ValidateOptions, Verdict};
