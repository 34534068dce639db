//! Experiment runner for `crowdvote-core`: configuration files, CSV output
//! and the `crowdvote` command-line front end.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::{ExperimentConfig, ParamModeName, Sweep, SweepVariable};
pub use error::CliError;
