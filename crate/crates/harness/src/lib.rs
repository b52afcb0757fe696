//! Experiment harness: configuration, seeded parallel trials, CSV and JSON
//! output, and the strict-benefit sweep.

pub mod config;
pub mod output;
pub mod runner;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, Family, HorizonSpec, Lpe, ModeName};
pub use runner::{run_experiment, ExperimentSummary, TrialSummary};

use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DRIFTEVO_OUT_DIR";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("property violation: {0}")]
    Violation(String),
    #[error("io error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Violation(_) => 1,
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) => 2,
        }
    }
}

impl From<driftevo_core::Error> for HarnessError {
    fn from(e: driftevo_core::Error) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
