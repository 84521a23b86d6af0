//! Command-line harness for location-adjusted Wald inference: CSV and
//! config ingestion, parallel drivers, simulation studies and reports.
//! The numerics live in `adjwald-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod models;
pub mod proportion;
pub mod report;
pub mod simulate;

pub use cli::run;
pub use error::{CliError, CliResult};
