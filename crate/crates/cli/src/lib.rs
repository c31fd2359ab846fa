//! Front end for `wgqed-core`: run configuration, subcommands and table
//! output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selftest;

pub use commands::run;
pub use config::{parse_config, Command, Document, Format, RunConfig, Units};
pub use error::CliError;
pub use output::{format_float, Cell, Table};

/// Serialises a table in the configured format.
pub fn render(cfg: &RunConfig, table: &Table) -> String {
    match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}
