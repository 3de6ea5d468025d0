//! Benchmark harness comparing the five orbit-determination filters on
//! synthetic NavIC-like scenarios.
//!
//! A [`RunConfig`] lists scenarios and filters; [`run_benchmark`] runs every
//! (scenario, filter) cell, possibly in parallel, and [`write_outputs`]
//! emits the CSV reports.

pub mod config;
pub mod output;
pub mod runner;

use thiserror::Error;

pub use config::{RunConfig, CONFIG_VERSION};
pub use output::{write_outputs, HZ_FILE, METADATA_FILE, RMSE_FILE};
pub use runner::{run_benchmark, BenchReport, CellResult, HzRow, RmseRow, ScenarioSummary};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("scenario {scenario}: {message}")]
    Scenario { scenario: String, message: String },
    #[error("scenario {scenario}, filter {filter}: {message}")]
    Filter {
        scenario: String,
        filter: orbitfilter::FilterKind,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl BenchError {
    /// Process exit code: 1 for configuration problems, 2 for failures
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 1,
            _ => 2,
        }
    }
}
