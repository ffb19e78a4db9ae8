//! Command-line front end for the slipping walker: configuration files,
//! run commands, CSV/SVG/manifest output and tracking metrics.

pub mod commands;
pub mod config;
pub mod metrics;
pub mod output;

pub use commands::{run, CliError, RunReport, EXIT_CONFIG, EXIT_CRASH, EXIT_OK, EXIT_SOLVER};
pub use config::{Command, ConfigError, RunConfig};
