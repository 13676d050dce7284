//! Graph datasets, edge splits, negative sampling and the fixed sparse
//! operators used for message passing.

mod adjacency;
mod dataset;
pub mod pickle;
mod planetoid;
mod rng;
mod split;
pub mod synthetic;
mod wikics;

pub use adjacency::{mean_neighbor_operator, normalize_adjacency, AttentionEdges, NormalizedAdjacency};
pub use dataset::{DatasetName, Edge, EdgeSet, GraphDataset};
pub use planetoid::{load_planetoid, write_planetoid};
pub use rng::RngState;
pub use split::{sample_negative_edges, split_edges, EdgeSplit, TEST_FRACTION, VAL_FRACTION};
pub use wikics::{load_wikics, write_wikics};

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("dataset {name} not found; looked in {}", searched.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    NotFound { name: DatasetName, searched: Vec<PathBuf> },
    #[error("unknown dataset '{0}' (expected cora, citeseer, pubmed or wikics)")]
    UnknownDataset(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("edge split: {0}")]
    Split(String),
    #[error("negative sampling: {0}")]
    Sampling(String),
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn corrupt(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        DataError::Corrupt {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Directories (Planetoid) or files (Wiki-CS) tried for `name` under `root`,
/// in order.
pub fn dataset_candidates(name: DatasetName, root: &Path) -> Vec<PathBuf> {
    let id = name.id();
    match name {
        DatasetName::WikiCs => vec![
            root.join("wikics").join("data.json"),
            root.join("WikiCS").join("data.json"),
            root.join("WikiCS").join("raw").join("data.json"),
            root.join("data.json"),
        ],
        _ => {
            let display = match name {
                DatasetName::Cora => "Cora",
                DatasetName::CiteSeer => "CiteSeer",
                _ => "PubMed",
            };
            vec![root.join(id), root.join(display).join("raw"), root.join(id).join("raw"), root.to_path_buf()]
        }
    }
}

/// Loads `name` from the first candidate location under `root` that holds it.
pub fn load_dataset(name: DatasetName, root: impl AsRef<Path>) -> Result<GraphDataset, DataError> {
    let candidates = dataset_candidates(name, root.as_ref());
    for c in &candidates {
        match name {
            DatasetName::WikiCs if c.is_file() => return load_wikics(c),
            DatasetName::WikiCs => {}
            _ if c.join(format!("ind.{}.x", name.id())).is_file() => return load_planetoid(name, c),
            _ => {}
        }
    }
    Err(DataError::NotFound {
        name,
        searched: candidates,
    })
}
