//! Experiment drivers behind the `logipure` command-line tool.

pub mod config;
pub mod experiments;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{run, Artifact};
