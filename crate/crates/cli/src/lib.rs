//! Experiment orchestration for the `kerr-rabi` command-line tool:
//! configuration, reference presets, seeded parallel ensembles, scans, and
//! CSV artifacts.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod presets;
pub mod scans;

pub use config::ExperimentConfig;
pub use ensemble::{compute, run_experiment, EnsembleResult, RunOptions};
pub use error::{AppError, ConfigError};
