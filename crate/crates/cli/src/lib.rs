//! File formats, configuration and command implementations for the
//! `wcosinor` tool, on top of `wcosinor-core`.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod numfmt;
pub mod panel;
pub mod svg;

pub use app::{run, Cli, Command};
pub use error::{CliError, CliResult};
pub use panel::{ingest_csv, write_panel, TimeSeriesPanel};
