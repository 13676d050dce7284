use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::autodiff::{SparseMatrix, Tensor};

use super::DataError;

/// Undirected edge stored once as `(u, v)` with `u < v`.
pub type Edge = (usize, usize);

/// The four benchmark graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DatasetName {
    Cora,
    CiteSeer,
    PubMed,
    WikiCs,
}

impl DatasetName {
    pub const ALL: [DatasetName; 4] = [Self::Cora, Self::CiteSeer, Self::PubMed, Self::WikiCs];

    /// Lower-case identifier used in file names and on the command line.
    pub fn id(self) -> &'static str {
        match self {
            Self::Cora => "cora",
            Self::CiteSeer => "citeseer",
            Self::PubMed => "pubmed",
            Self::WikiCs => "wikics",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Cora => "Cora",
            Self::CiteSeer => "CiteSeer",
            Self::PubMed => "PubMed",
            Self::WikiCs => "Wiki-CS",
        }
    }

    /// Published (nodes, edges, feature dim, classes).
    pub fn reported_stats(self) -> (usize, usize, usize, usize) {
        match self {
            Self::Cora => (2708, 5429, 1433, 7),
            Self::CiteSeer => (3327, 4732, 3703, 6),
            Self::PubMed => (19717, 44338, 500, 3),
            Self::WikiCs => (11701, 216213, 300, 10),
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DatasetName {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "cora" => Ok(Self::Cora),
            "citeseer" => Ok(Self::CiteSeer),
            "pubmed" => Ok(Self::PubMed),
            "wikics" => Ok(Self::WikiCs),
            _ => Err(DataError::UnknownDataset(s.to_string())),
        }
    }
}

/// Node features, labels and canonical undirected edges of one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    pub num_nodes: usize,
    pub features: Tensor,
    pub labels: Vec<usize>,
    /// Sorted, deduplicated, `u < v`, no self-loops.
    pub edges: Vec<Edge>,
    pub num_classes: usize,
}

impl GraphDataset {
    /// Canonicalizes `raw_edges` (either orientation, duplicates and
    /// self-loops allowed) and validates the result.
    pub fn new(
        name: impl Into<String>,
        features: Tensor,
        labels: Vec<usize>,
        raw_edges: impl IntoIterator<Item = Edge>,
        num_classes: usize,
    ) -> Result<Self, DataError> {
        let num_nodes = features.rows();
        let edges = canonical_edges(raw_edges);
        let ds = Self {
            name: name.into(),
            num_nodes,
            features,
            labels,
            edges,
            num_classes,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let invalid = |m: String| Err(DataError::Invalid(format!("{}: {m}", self.name)));
        if self.features.shape().len() != 2 || self.features.rows() != self.num_nodes {
            return invalid(format!(
                "feature matrix {:?} does not have {} rows",
                self.features.shape(),
                self.num_nodes
            ));
        }
        if self.labels.len() != self.num_nodes {
            return invalid(format!("{} labels for {} nodes", self.labels.len(), self.num_nodes));
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.num_classes) {
            return invalid(format!("label {l} >= num_classes {}", self.num_classes));
        }
        for w in self.edges.windows(2) {
            if w[0] >= w[1] {
                return invalid("edges are not sorted and unique".into());
            }
        }
        if let Some(&(u, v)) = self.edges.iter().find(|&&(u, v)| u >= v || v >= self.num_nodes) {
            return invalid(format!("edge ({u}, {v}) is not canonical or out of range"));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Average number of neighbors, `2|E| / N`.
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.num_nodes.max(1) as f64
    }

    pub fn edge_set(&self) -> EdgeSet {
        EdgeSet::from_edges(&self.edges)
    }

    /// Features as a constant sparse matrix (bag-of-words inputs are ~1%
    /// dense, which makes the first projection far cheaper).
    pub fn sparse_features(&self) -> SparseMatrix {
        SparseMatrix::from_dense(&self.features)
    }
}

/// Sorts and deduplicates edges in `u < v` form, dropping self-loops.
pub(crate) fn canonical_edges(raw: impl IntoIterator<Item = Edge>) -> Vec<Edge> {
    let mut edges: Vec<Edge> = raw
        .into_iter()
        .filter(|(u, v)| u != v)
        .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Membership set over unordered node pairs.
#[derive(Clone, Debug, Default)]
pub struct EdgeSet(HashSet<Edge>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: &[Edge]) -> Self {
        let mut s = Self(HashSet::with_capacity(edges.len()));
        for &(u, v) in edges {
            s.insert(u, v);
        }
        s
    }

    /// Returns false if the pair was already present.
    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        self.0.insert(ordered(u, v))
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.0.contains(&ordered(u, v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn ordered(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization_drops_loops_and_duplicates() {
        let e = canonical_edges([(2, 1), (1, 2), (0, 0), (0, 3), (3, 0)]);
        assert_eq!(e, vec![(0, 3), (1, 2)]);
    }

    #[test]
    fn rejects_out_of_range_labels() {
        let err = GraphDataset::new("t", Tensor::zeros(&[2, 1]), vec![0, 5], [(0, 1)], 2);
        assert!(matches!(err, Err(DataError::Invalid(_))));
    }

    #[test]
    fn rejects_out_of_range_edges() {
        let err = GraphDataset::new("t", Tensor::zeros(&[2, 1]), vec![0, 1], [(0, 2)], 2);
        assert!(err.is_err());
    }

    #[test]
    fn dataset_names_parse() {
        assert_eq!("Wiki-CS".parse::<DatasetName>().unwrap(), DatasetName::WikiCs);
        assert_eq!("CiteSeer".parse::<DatasetName>().unwrap(), DatasetName::CiteSeer);
        assert!("imagenet".parse::<DatasetName>().is_err());
    }
}
