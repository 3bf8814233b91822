//! Experiment driver around `bergman-core`: a TOML config in, CSV tables and a
//! JSON manifest out.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{Experiment, ExperimentConfig};
pub use error::CliError;
pub use experiment::{run_experiment, RunManifest, MANIFEST_FILE};
pub use output::{write_outputs, Table};
