//! Command-line front end: configuration files, subcommands and writers.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CliError, Command, RunConfig};
