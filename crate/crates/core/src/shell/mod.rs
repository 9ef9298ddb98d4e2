//! Scenario files, run artifacts and the command-line front end.

mod cli;
mod output;
mod scenario;

use std::path::Path;

use thiserror::Error;

pub use cli::cli;
pub use output::{
    csv_header, csv_rows, read_timeseries, write_json, write_report, write_run, write_timeseries, CsvTable, ECHO_FILE,
    INVERTER_COLUMNS, REPORT_FILE, TIMESERIES_FILE, TRAILING_COLUMNS,
};
pub use scenario::{echo, echo_toml, parse_scenario, parse_scenario_str, resolve, PerInverter, ScenarioFile};

use crate::engine::EngineError;

#[derive(Debug, Error)]
pub enum ShellError {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("physics violation: {0}")]
    Physics(String),
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl ShellError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            ShellError::NotFound(path.display().to_string())
        } else {
            ShellError::Io { path: path.display().to_string(), source }
        }
    }
}
