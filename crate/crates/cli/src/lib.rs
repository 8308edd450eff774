//! Command implementations behind the `superarray` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod geometry;
pub mod output;

pub use error::{CliError, Result};
