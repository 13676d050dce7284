//! Experiment configuration, orchestration, result files and tables.

pub mod cli;
mod config;
mod experiment;
mod store;
mod tables;

pub use config::{parse_config, parse_config_text, ExperimentConfig, ReportConfig, DATA_ENV, KEYS};
pub use experiment::{run_experiment, run_experiment_on};
pub use store::{
    find_reports, read_embedding, read_labels, read_report, write_embedding, write_labels, ResultsStore,
    StoredReport,
};
pub use tables::{format_cell, render_tables, Tables, RESULT_COLUMNS};

use std::path::PathBuf;

use thiserror::Error;

use crate::data::DataError;
use crate::metrics::MetricError;
use crate::models::ModelError;
use crate::train::TrainError;
use crate::tsne::TsneError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{key}: {message}")]
    Usage { key: String, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Tsne(#[from] TsneError),
    #[error("run {index}: {source}")]
    Run {
        index: usize,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Aggregation(String),
}

impl HarnessError {
    /// 2 usage, 3 data or files, 4 numeric or training.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage { .. } => 2,
            Self::Data(_) | Self::Io { .. } | Self::Aggregation(_) => 3,
            Self::Tsne(TsneError::Io { .. }) => 3,
            Self::Train(TrainError::Data(_)) => 3,
            Self::Train(_) | Self::Model(_) | Self::Metric(_) | Self::Tsne(_) => 4,
            Self::Run { source, .. } => source.exit_code(),
        }
    }
}
