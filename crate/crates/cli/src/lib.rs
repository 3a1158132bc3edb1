//! Command-line front end for the `directwf` library: configuration
//! loading, the four subcommands, and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;
