//! Command-line front end: reads system files, dispatches to the library
//! and writes deterministic run reports as JSON or CSV.

pub mod commands;
pub mod error;
pub mod report;
pub mod schema;

pub use commands::{run, Cli, Command};
pub use error::CliError;
pub use report::{write_report, Check, Format, RunReport};
pub use schema::{parse_system, LoadedSystem, SystemFile};
