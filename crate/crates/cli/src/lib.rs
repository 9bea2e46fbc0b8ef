//! Command-line front end: configuration files, analytic sweeps, Monte
//! Carlo campaigns and analytic-versus-simulation reports.

pub mod campaign;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub use commands::{run, Cli, CliError};
