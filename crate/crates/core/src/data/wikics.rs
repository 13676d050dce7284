//! Wiki-CS `data.json`: per-node `features`, `labels` and out-link lists
//! (`links`). The classification masks in the same file are ignored.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;

use super::{DataError, DatasetName, GraphDataset};

#[derive(Deserialize, Serialize)]
struct WikiCsFile {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    links: Vec<Vec<usize>>,
}

/// Loads Wiki-CS, symmetrizing the directed link lists.
pub fn load_wikics(path: impl AsRef<Path>) -> Result<GraphDataset, DataError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    let raw: WikiCsFile = serde_json::from_reader(BufReader::new(file)).map_err(|e| {
        DataError::corrupt(path, format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    let n = raw.features.len();
    if raw.labels.len() != n || raw.links.len() != n {
        return Err(DataError::corrupt(
            path,
            format!(
                "{n} feature rows, {} labels and {} link lists",
                raw.labels.len(),
                raw.links.len()
            ),
        ));
    }
    let f = raw.features.first().map_or(0, Vec::len);
    if let Some(i) = raw.features.iter().position(|r| r.len() != f) {
        return Err(DataError::corrupt(path, format!("feature row {i} has {} entries, expected {f}", raw.features[i].len())));
    }
    let mut edges = Vec::new();
    for (u, list) in raw.links.iter().enumerate() {
        for &v in list {
            if v >= n {
                return Err(DataError::corrupt(path, format!("node {u} links to {v}, outside 0..{n}")));
            }
            edges.push((u, v));
        }
    }
    let num_classes = raw.labels.iter().max().map_or(0, |m| m + 1);
    let features = Tensor::new(&[n, f], raw.features.concat()).expect("rows checked");
    let ds = GraphDataset::new(DatasetName::WikiCs.display_name(), features, raw.labels, edges, num_classes)?;
    let (_, reported_edges, _, _) = DatasetName::WikiCs.reported_stats();
    log::info!(
        "{}: {} nodes, {} canonical undirected edges (reported {}), mean degree {:.2}",
        ds.name,
        ds.num_nodes,
        ds.num_edges(),
        reported_edges,
        ds.mean_degree()
    );
    Ok(ds)
}

/// Writes `ds` in the Wiki-CS JSON layout, one link list entry per
/// undirected edge endpoint.
pub fn write_wikics(ds: &GraphDataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let mut links = vec![Vec::new(); ds.num_nodes];
    for &(u, v) in &ds.edges {
        links[u].push(v);
        links[v].push(u);
    }
    let file = WikiCsFile {
        features: (0..ds.num_nodes).map(|r| ds.features.row(r).to_vec()).collect(),
        labels: ds.labels.clone(),
        links,
    };
    let text = serde_json::to_string(&file).map_err(|e| DataError::corrupt(path, e.to_string()))?;
    fs::write(path, text).map_err(|e| DataError::io(path, e))
}
