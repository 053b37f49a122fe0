//! Declarative experiment runner for the `coopbandit` simulator.

pub mod config;
pub mod report;
pub mod run;
pub mod validate;

pub use config::{load_config, parse_config, parse_seeds, ConfigError, ExperimentConfig};
pub use run::{report_from_logs, run_experiment};
