//! Command-line front end: run configuration, braid-word parsing, the
//! subcommand pipelines and JSON reports. Argument parsing itself lives in
//! the binary so the library builds without `clap`.

pub mod parse;
pub mod report;
pub mod run;

pub use parse::{parse_algebra, parse_braid_word};
pub use report::{write_atomic, Report, SCHEMA};
pub use run::{exit_code, run, Command, RunConfig};
