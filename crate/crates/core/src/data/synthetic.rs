//! Planted-partition graphs with bag-of-words features, for tests, examples
//! and offline smoke runs.

use rand::Rng;

use crate::autodiff::Tensor;

use super::{DataError, GraphDataset, RngState};

/// Parameters of a stochastic block model with class-topic features.
#[derive(Clone, Debug, PartialEq)]
pub struct SbmConfig {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    /// Expected neighbors inside the node's own class.
    pub degree_in: f64,
    /// Expected neighbors in other classes.
    pub degree_out: f64,
    /// Probability that a word of the node's class topic is present.
    pub topic_rate: f64,
    /// Probability that any other word is present.
    pub noise_rate: f64,
}

impl SbmConfig {
    /// 60 nodes, 3 classes, 24 features.
    pub fn small() -> Self {
        Self {
            num_nodes: 60,
            num_classes: 3,
            feature_dim: 24,
            degree_in: 4.0,
            degree_out: 0.8,
            topic_rate: 0.3,
            noise_rate: 0.03,
        }
    }

    /// Citation-network shaped graph: sparse binary features, mean degree
    /// near 4, seven classes.
    pub fn citation_like(num_nodes: usize) -> Self {
        Self {
            num_nodes,
            num_classes: 7,
            feature_dim: 350,
            degree_in: 3.2,
            degree_out: 0.7,
            topic_rate: 0.12,
            noise_rate: 0.01,
        }
    }
}

/// Samples a graph from `cfg`. Node `i` has class `i % num_classes`.
pub fn stochastic_block_model(cfg: &SbmConfig, seed: u64) -> Result<GraphDataset, DataError> {
    let (n, c, f) = (cfg.num_nodes, cfg.num_classes, cfg.feature_dim);
    if n < 2 || c == 0 || c > n || f < c {
        return Err(DataError::Invalid(format!(
            "block model needs 2 <= nodes, 1 <= classes <= nodes, classes <= features; got {n}, {c}, {f}"
        )));
    }
    let mut rng = RngState::derive(seed, 0);
    let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
    let class_size = n as f64 / c as f64;
    let p_in = (cfg.degree_in / (class_size - 1.0).max(1.0)).min(1.0);
    let p_out = (cfg.degree_out / (n as f64 - class_size).max(1.0)).min(1.0);

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let block = f / c;
    let mut features = vec![0.0; n * f];
    for (u, &label) in labels.iter().enumerate() {
        let topic = label * block..(label + 1) * block;
        for j in 0..f {
            let rate = if topic.contains(&j) { cfg.topic_rate } else { cfg.noise_rate };
            if rng.random::<f64>() < rate {
                features[u * f + j] = 1.0;
            }
        }
    }
    GraphDataset::new(
        format!("sbm-{n}-{seed}"),
        Tensor::matrix(n, f, features),
        labels,
        edges,
        c,
    )
}
