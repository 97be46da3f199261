//! Front ends for the `polarcut` segmentation library: batch subcommands and
//! an HTTP service for interactive seeding.

pub mod api;
pub mod commands;
pub mod config;
pub mod error;

pub use error::{CliError, CliResult};
