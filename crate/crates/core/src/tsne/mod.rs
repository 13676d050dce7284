//! Exact t-SNE for 2-D embedding plots.

mod affinity;
mod scatter;

pub use affinity::{conditional_affinities, pairwise_affinities};
pub use scatter::{emit_scatter, ScatterFormat, PALETTE};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::autodiff::Tensor;
use crate::data::RngState;

#[derive(Debug, Error)]
pub enum TsneError {
    #[error("invalid t-SNE configuration: {0}")]
    Config(String),
    #[error("bandwidth search did not reach the target perplexity for row {row}")]
    Bandwidth { row: usize },
    #[error("t-SNE objective became non-finite at iteration {iteration}")]
    Numeric { iteration: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated `P` and the initial momentum.
    pub exaggeration_iterations: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// Larger inputs are subsampled, stratified by label.
    pub max_points: usize,
    /// KL is recorded every `trace_every` iterations.
    pub trace_every: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            max_points: 8000,
            trace_every: 50,
            seed: 0,
        }
    }
}

impl TsneConfig {
    pub fn validate(&self, n: usize) -> Result<(), TsneError> {
        let bad = |m: String| Err(TsneError::Config(m));
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if self.max_points < 3 {
            return bad(format!("max_points must be at least 3, got {}", self.max_points));
        }
        if !(self.learning_rate > 0.0) || self.trace_every == 0 {
            return bad("learning_rate and trace_every must be positive".into());
        }
        if !(self.perplexity > 1.0 && self.perplexity < (n.saturating_sub(1)) as f64) {
            return bad(format!("perplexity {} is infeasible for {n} points", self.perplexity));
        }
        if self.perplexity >= (n - 1) as f64 / 3.0 {
            log::warn!("perplexity {} is large for {n} points", self.perplexity);
        }
        Ok(())
    }
}

/// 2-D coordinates of `nodes` (indices into the input rows).
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub coords: Tensor,
    pub labels: Vec<usize>,
    pub nodes: Vec<usize>,
    /// `(iteration, KL(P || Q))`, starting with the initialization.
    pub kl_trace: Vec<(usize, f64)>,
}

/// At most `max` indices, allocated to each label in proportion to its
/// frequency. Returned sorted.
pub fn stratified_subsample(labels: &[usize], max: usize, rng: &mut RngState) -> Vec<usize> {
    let n = labels.len();
    if n <= max {
        return (0..n).collect();
    }
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let exact: Vec<f64> = members.iter().map(|m| m.len() as f64 * max as f64 / n as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = max - quota.iter().sum::<usize>();
    for c in order {
        if left == 0 {
            break;
        }
        if quota[c] < members[c].len() {
            quota[c] += 1;
            left -= 1;
        }
    }
    let mut chosen = Vec::with_capacity(max);
    for (m, q) in members.iter_mut().zip(quota) {
        m.shuffle(rng);
        chosen.extend_from_slice(&m[..q]);
    }
    chosen.sort_unstable();
    chosen
}

/// Sums per-row results in row order, independent of thread scheduling.
fn ordered_sum(rows: impl IndexedParallelIterator<Item = f64>) -> f64 {
    rows.collect::<Vec<f64>>().iter().sum()
}

/// Student-t kernel `1 / (1 + |y_i - y_j|²)`.
fn kernel(y: &[f64], i: usize, j: usize) -> f64 {
    let dx = y[2 * i] - y[2 * j];
    let dy = y[2 * i + 1] - y[2 * j + 1];
    1.0 / (1.0 + dx * dx + dy * dy)
}

fn kl_divergence(p: &[f64], y: &[f64], n: usize) -> f64 {
    let z = ordered_sum((0..n).into_par_iter().map(|i| (0..n).filter(|&j| j != i).map(|j| kernel(y, i, j)).sum()));
    ordered_sum((0..n).into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && p[i * n + j] > 0.0)
                .map(|j| {
                    let pij = p[i * n + j];
                    pij * (pij / (kernel(y, i, j) / z)).ln()
                })
                .sum::<f64>()
        }))
}

/// Gradient of KL(exaggeration · P || Q), written into `grad`.
fn gradient(p: &[f64], y: &[f64], n: usize, exaggeration: f64, grad: &mut [f64]) {
    let parts: Vec<[f64; 5]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = [0.0; 5];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = kernel(y, i, j);
                let dx = y[2 * i] - y[2 * j];
                let dy = y[2 * i + 1] - y[2 * j + 1];
                let attract = exaggeration * p[i * n + j] * q;
                let repel = q * q;
                acc[0] += attract * dx;
                acc[1] += attract * dy;
                acc[2] += repel * dx;
                acc[3] += repel * dy;
                acc[4] += q;
            }
            acc
        })
        .collect();
    let z: f64 = parts.iter().map(|a| a[4]).sum();
    for (i, a) in parts.iter().enumerate() {
        grad[2 * i] = 4.0 * (a[0] - a[2] / z);
        grad[2 * i + 1] = 4.0 * (a[1] - a[3] / z);
    }
}

fn recenter(y: &mut [f64], n: usize) {
    for axis in 0..2 {
        let mean = (0..n).map(|i| y[2 * i + axis]).sum::<f64>() / n as f64;
        for i in 0..n {
            y[2 * i + axis] -= mean;
        }
    }
}

/// Projects the rows of `x` (labelled by `labels`) to two dimensions.
pub fn tsne_project(x: &Tensor, labels: &[usize], cfg: &TsneConfig) -> Result<Projection, TsneError> {
    if labels.len() != x.rows() {
        return Err(TsneError::Config(format!("{} labels for {} points", labels.len(), x.rows())));
    }
    let mut rng = RngState::new(cfg.seed);
    let nodes = stratified_subsample(labels, cfg.max_points, &mut rng);
    let n = nodes.len();
    cfg.validate(n)?;
    let x = if n == x.rows() {
        x.clone()
    } else {
        Tensor::from_rows(&nodes.iter().map(|&i| x.row(i).to_vec()).collect::<Vec<_>>())
    };
    let p = pairwise_affinities(&x, cfg.perplexity)?;
    let p = p.values();

    let mut y: Vec<f64> = (0..2 * n).map(|_| 1e-4 * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut update = vec![0.0; 2 * n];
    let mut gains = vec![1.0f64; 2 * n];
    let mut grad = vec![0.0; 2 * n];
    let mut kl_trace = vec![(0, kl_divergence(p, &y, n))];

    for it in 0..cfg.iterations {
        let early = it < cfg.exaggeration_iterations;
        let exaggeration = if early { cfg.early_exaggeration } else { 1.0 };
        let momentum = if early { cfg.initial_momentum } else { cfg.final_momentum };
        gradient(p, &y, n, exaggeration, &mut grad);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(TsneError::Numeric { iteration: it + 1 });
        }
        for k in 0..2 * n {
            gains[k] = if (grad[k] > 0.0) != (update[k] > 0.0) {
                gains[k] + 0.2
            } else {
                (gains[k] * 0.8).max(0.01)
            };
            update[k] = momentum * update[k] - cfg.learning_rate * gains[k] * grad[k];
            y[k] += update[k];
        }
        recenter(&mut y, n);
        let done = it + 1;
        if done % cfg.trace_every == 0 || done == cfg.iterations {
            let kl = kl_divergence(p, &y, n);
            if !kl.is_finite() {
                return Err(TsneError::Numeric { iteration: done });
            }
            log::debug!("t-SNE iteration {done}: KL {kl:.6}");
            kl_trace.push((done, kl));
        }
    }
    Ok(Projection {
        coords: Tensor::matrix(n, 2, y),
        labels: nodes.iter().map(|&i| labels[i]).collect(),
        nodes,
        kl_trace,
    })
}

/// Mean fraction of each point's `k` nearest neighbors (Euclidean, in
/// `coords`) that share its label.
pub fn knn_label_agreement(coords: &Tensor, labels: &[usize], k: usize) -> f64 {
    let n = coords.rows();
    if n < 2 || k == 0 {
        return 0.0;
    }
    let k = k.min(n - 1);
    let total = ordered_sum((0..n).into_par_iter()
        .map(|i| {
            let xi = coords.row(i);
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (xi.iter().zip(coords.row(j)).map(|(a, b)| (a - b) * (a - b)).sum(), j))
                .collect();
            d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d[..k].iter().filter(|&&(_, j)| labels[j] == labels[i]).count() as f64 / k as f64
        }));
    total / n as f64
}
