//! Command-line front end: configuration files, trajectory CSV files, and
//! the `simulate`, `verify-sde`, `verify-identities`, `collision-study` and
//! `gbe` subcommands.

pub mod commands;
pub mod config;
pub mod ranges;
pub mod trajectory;

pub use commands::{CliError, Outcome, RunOptions};
