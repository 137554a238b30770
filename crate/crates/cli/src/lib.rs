//! Configuration, orchestration and output for the `cbfem` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{load, parse_config, Order, Overrides, RunConfig};
pub use error::CliError;
pub use output::{Cell, Format, Report};
