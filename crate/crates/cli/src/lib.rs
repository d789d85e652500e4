//! Command-line front end: stability reports, trajectory and deviation data
//! as CSV or JSON, and parameter sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod report;
pub mod table;

pub use commands::run;
pub use config::{Cli, RunConfig};
pub use error::CliError;
pub use table::Table;
