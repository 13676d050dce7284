use std::sync::Arc;

use crate::autodiff::SparseMatrix;

use super::Edge;

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` for the message-passing graph.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency {
    pub matrix: Arc<SparseMatrix>,
}

/// Neighbor lists of `A + I` in both directions, sorted by node.
fn neighbor_lists(edges: &[Edge], num_nodes: usize, self_loops: bool) -> Vec<Vec<usize>> {
    let mut lists: Vec<Vec<usize>> = (0..num_nodes)
        .map(|u| if self_loops { vec![u] } else { Vec::new() })
        .collect();
    for &(u, v) in edges {
        lists[u].push(v);
        lists[v].push(u);
    }
    for l in &mut lists {
        l.sort_unstable();
        l.dedup();
    }
    lists
}

fn csr_from_lists(lists: &[Vec<usize>], value: impl Fn(usize, usize) -> f64) -> SparseMatrix {
    let n = lists.len();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for (u, l) in lists.iter().enumerate() {
        for &v in l {
            cols.push(v);
            vals.push(value(u, v));
        }
        offsets.push(cols.len());
    }
    SparseMatrix::from_csr(n, n, offsets, cols, vals).expect("lists are sorted and in range")
}

/// Symmetric normalized adjacency with self-loops built from `edges`
/// (the training positives).
pub fn normalize_adjacency(edges: &[Edge], num_nodes: usize) -> NormalizedAdjacency {
    let lists = neighbor_lists(edges, num_nodes, true);
    let inv_sqrt: Vec<f64> = lists.iter().map(|l| 1.0 / (l.len() as f64).sqrt()).collect();
    let matrix = csr_from_lists(&lists, |u, v| inv_sqrt[u] * inv_sqrt[v]);
    NormalizedAdjacency {
        matrix: Arc::new(matrix),
    }
}

/// Row-stochastic mean over neighbors, without self-loops. Isolated nodes
/// get an empty row, so their aggregated message is zero.
pub fn mean_neighbor_operator(edges: &[Edge], num_nodes: usize) -> Arc<SparseMatrix> {
    let lists = neighbor_lists(edges, num_nodes, false);
    let matrix = csr_from_lists(&lists, |u, _| 1.0 / lists[u].len() as f64);
    Arc::new(matrix)
}

/// Incoming attention edges grouped by target node, self-loops included.
///
/// Entry `k` in `offsets[i]..offsets[i+1]` says node `sources[k]` sends a
/// message to node `i`.
#[derive(Clone, Debug)]
pub struct AttentionEdges {
    pub num_nodes: usize,
    pub offsets: Arc<[usize]>,
    pub sources: Arc<[usize]>,
    pub targets: Arc<[usize]>,
}

impl AttentionEdges {
    pub fn new(edges: &[Edge], num_nodes: usize) -> Self {
        let lists = neighbor_lists(edges, num_nodes, true);
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        let mut sources = Vec::new();
        let mut targets = Vec::new();
        for (i, l) in lists.iter().enumerate() {
            sources.extend_from_slice(l);
            targets.extend(std::iter::repeat_n(i, l.len()));
            offsets.push(sources.len());
        }
        Self {
            num_nodes,
            offsets: offsets.into(),
            sources: sources.into(),
            targets: targets.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// True when every node attends to itself.
    pub fn has_self_loops(&self) -> bool {
        (0..self.num_nodes).all(|i| self.sources[self.offsets[i]..self.offsets[i + 1]].binary_search(&i).is_ok())
    }
}
