//! Ranking metrics for link prediction and bootstrap aggregation over runs.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::Tensor;
use crate::data::Edge;
use crate::models::edge_logits;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{0} scores but {1} labels")]
    Length(usize, usize),
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
    #[error("non-finite score at position {0}")]
    NonFinite(usize),
    #[error("edge index out of range: {0}")]
    Index(String),
}

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize), MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::Length(scores.len(), labels.len()));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(MetricError::NonFinite(i));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricError::Undefined("need at least one positive and one negative"));
    }
    Ok((pos, neg))
}

/// Indices ordered by ascending score.
fn ascending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    idx
}

/// Area under the ROC curve via the Mann-Whitney statistic, ties counted
/// as one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    let (p, n) = check(scores, labels)?;
    let order = ascending(scores);
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let midrank = (i + j + 2) as f64 / 2.0;
        let positives = order[i..=j].iter().filter(|&&k| labels[k]).count();
        rank_sum += midrank * positives as f64;
        i = j + 1;
    }
    let u = rank_sum - (p * (p + 1)) as f64 / 2.0;
    Ok(u / (p as f64 * n as f64))
}

/// Average precision: precision summed over recall increments at each
/// distinct score threshold, highest first.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    let (p, _) = check(scores, labels)?;
    let mut order = ascending(scores);
    order.reverse();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let recall = tp as f64 / p as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap interval for the mean of `values`.
///
/// Panics if `values` is empty or `resamples` is zero.
pub fn bootstrap_ci<R: Rng + ?Sized>(values: &[f64], level: f64, resamples: usize, rng: &mut R) -> (f64, f64) {
    assert!(!values.is_empty() && resamples > 0, "bootstrap needs values and resamples");
    let r = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let total: f64 = (0..r).map(|_| values[rng.random_range(0..r)]).sum();
            total / r as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile(&means, tail), quantile(&means, 1.0 - tail))
}

/// Scores held-out pairs with `sigmoid(<z_u, z_v>)` and returns (AUC, AP).
pub fn evaluate_split(z: &Tensor, pos: &[Edge], neg: &[Edge]) -> Result<(f64, f64), MetricError> {
    let logits = |pairs: &[Edge]| edge_logits(z, pairs).map_err(|e| MetricError::Index(e.to_string()));
    let mut scores: Vec<f64> = logits(pos)?;
    scores.extend(logits(neg)?);
    let scores: Vec<f64> = scores.into_iter().map(sigmoid).collect();
    let labels: Vec<bool> = (0..pos.len() + neg.len()).map(|i| i < pos.len()).collect();
    Ok((roc_auc(&scores, &labels)?, average_precision(&scores, &labels)?))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Summary of one model on one dataset over repeated runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub model: String,
    pub seed: u64,
    pub runs: usize,
    pub auc: Vec<f64>,
    pub ap: Vec<f64>,
    pub mean_auc: f64,
    pub mean_ap: f64,
    pub ci95_auc: (f64, f64),
    pub ci95_ap: (f64, f64),
    pub auc_ci_halfwidth: f64,
    pub ap_ci_halfwidth: f64,
    pub std_auc: f64,
    pub std_ap: f64,
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

impl RunReport {
    /// Aggregates per-run metrics with `resamples` bootstrap draws.
    pub fn from_runs<R: Rng + ?Sized>(
        dataset: impl Into<String>,
        model: impl Into<String>,
        seed: u64,
        auc: Vec<f64>,
        ap: Vec<f64>,
        resamples: usize,
        rng: &mut R,
    ) -> Self {
        assert_eq!(auc.len(), ap.len(), "one AUC and one AP per run");
        let ci95_auc = bootstrap_ci(&auc, 0.95, resamples, rng);
        let ci95_ap = bootstrap_ci(&ap, 0.95, resamples, rng);
        Self {
            dataset: dataset.into(),
            model: model.into(),
            seed,
            runs: auc.len(),
            mean_auc: mean(&auc),
            mean_ap: mean(&ap),
            auc_ci_halfwidth: (ci95_auc.1 - ci95_auc.0) / 2.0,
            ap_ci_halfwidth: (ci95_ap.1 - ci95_ap.0) / 2.0,
            std_auc: std_dev(&auc),
            std_ap: std_dev(&ap),
            ci95_auc,
            ci95_ap,
            auc,
            ap,
        }
    }
}
