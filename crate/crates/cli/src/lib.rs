//! Library side of the `flatflow` binary: config parsing, commands and
//! artifact writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;
