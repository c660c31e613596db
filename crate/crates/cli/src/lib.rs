//! Config, file formats and subcommands of the `q4nl` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod series;

pub use commands::{check, scatter, simulate, verify, waveop, CheckArgs, Overrides, Report};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
