//! Front end of the trace laboratory: TOML configs in, canonical JSON and
//! CSV artifacts out. See [`config`] for the config schema.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{dispatch, Command, Outcome};
pub use config::{load_config, parse_config, ExperimentConfig};
pub use error::CliError;
