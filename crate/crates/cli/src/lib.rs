//! Experiment harness for `mcl-core`: config-driven runs that write CSV and
//! JSON artifacts, a report command that re-checks them, and the `mcl`
//! command-line front end.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod vc_demo;

pub use commands::{execute, Cli};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use experiments::{run, run_with_threads, Meta, RunOutput, SweepRow};
