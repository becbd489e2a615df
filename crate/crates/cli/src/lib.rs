//! Runner behind the `qhide` binary: configuration, the seven commands and versioned
//! JSON/CSV reports.
//!
//! Every command resolves an [`ExperimentConfig`] (defaults, then a flat config file,
//! then flags), runs, and returns a [`RunReport`] whose `passed` flag decides the exit
//! status. Reports are byte-identical across runs of the same config except for
//! `timestamp`.

pub mod commands;
pub mod config;
mod error;
pub mod report;

pub use commands::run;
pub use config::{parse_config_file, Command, ExperimentConfig, Format, MIN_TOLERANCE};
pub use error::{CliError, Result};
pub use report::{without_timestamp, Check, Entry, RunReport, SCHEMA};

/// Serializes `report` in `format`, writing to `out` when given.
pub fn emit(report: &RunReport, format: Format, out: Option<&str>) -> Result<String> {
    let text = match format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    if let Some(path) = out {
        error::write_file(path, &text)?;
    }
    Ok(text)
}
