//! Losses, the Adam optimizer and the full-batch training loop.

mod adam;
mod losses;

pub use adam::{adam_step, AdamState};
pub use losses::{bce_link_loss, elbo_loss, kl_to_standard_normal, sage_unsup_loss};

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::autodiff::{AutodiffError, Tape, Tensor};
use crate::data::{sample_negative_edges, DataError, DatasetName, Edge, EdgeSplit, GraphDataset, RngState};
use crate::metrics::roc_auc;
use crate::models::{decode_edges, edge_logits, forward, GraphInputs, ModelConfig, ModelError, ModelKind, ModelParams};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("{0}")]
    Contract(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    Bce,
    Elbo,
    SageUnsup,
}

impl FromStr for LossKind {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bce" => Ok(Self::Bce),
            "elbo" => Ok(Self::Elbo),
            "sage_unsup" => Ok(Self::SageUnsup),
            _ => Err(TrainError::Config(format!("unknown loss '{s}' (expected bce, elbo or sage_unsup)"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bce => "bce",
            Self::Elbo => "elbo",
            Self::SageUnsup => "sage_unsup",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub runs: usize,
    pub seed: u64,
    pub loss: LossKind,
    /// KL weight for the ELBO; `None` means `1 / num_nodes`.
    pub kl_weight: Option<f64>,
    /// Negatives per positive for the unsupervised GraphSAGE loss.
    pub sage_negatives: usize,
}

impl TrainConfig {
    /// Benchmark settings for `model` on `dataset`.
    pub fn new(model: ModelKind, dataset: DatasetName) -> Self {
        Self {
            epochs: 200,
            lr: if model == ModelKind::Gat && dataset == DatasetName::WikiCs { 0.001 } else { 0.01 },
            runs: 50,
            seed: 0,
            loss: if model == ModelKind::Vgae { LossKind::Elbo } else { LossKind::Bce },
            kl_weight: None,
            sage_negatives: 1,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(TrainError::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if self.runs == 0 {
            return Err(TrainError::Config("runs must be at least 1".into()));
        }
        if self.sage_negatives == 0 {
            return Err(TrainError::Config("sage_negatives must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: f64,
}

/// Result of one training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Evaluation-mode embedding from the final parameters.
    pub embedding: Tensor,
    pub trace: Vec<EpochRecord>,
}

/// RNG stream ids within one run seed.
const INIT_STREAM: u64 = 1;
const NEGATIVE_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;

/// Evaluation-mode embedding for `params`.
pub fn embed(cfg: &ModelConfig, params: &ModelParams, inputs: &GraphInputs) -> Result<Tensor, TrainError> {
    let tape = Tape::new();
    let bound = params.bind(&tape);
    // no randomness is drawn in evaluation mode
    let mut unused = RngState::new(0);
    let emb = forward(cfg, &bound, inputs, false, &mut unused)?;
    let z = emb.z.value();
    Ok((*z).clone())
}

fn validation_auc(z: &Tensor, split: &EdgeSplit) -> Result<f64, TrainError> {
    let mut scores = edge_logits(z, &split.val_pos)?;
    scores.extend(edge_logits(z, &split.val_neg)?);
    let labels: Vec<bool> = (0..scores.len()).map(|i| i < split.val_pos.len()).collect();
    // logits rank identically to probabilities but do not saturate
    Ok(roc_auc(&scores, &labels).unwrap_or(f64::NAN))
}

/// Trains one model for `train.epochs` full-batch steps.
///
/// Every epoch draws `|train_pos|` fresh negatives that avoid all dataset
/// edges, takes one Adam step, and scores the validation pairs for the
/// trace. Deterministic in `run_seed`.
pub fn train_run(
    dataset: &GraphDataset,
    split: &EdgeSplit,
    inputs: &GraphInputs,
    model: &ModelConfig,
    train: &TrainConfig,
    run_seed: u64,
) -> Result<TrainOutcome, TrainError> {
    train.validate()?;
    let mut init_rng = RngState::derive(run_seed, INIT_STREAM);
    let mut neg_rng = RngState::derive(run_seed, NEGATIVE_STREAM);
    let mut noise_rng = RngState::derive(run_seed, NOISE_STREAM);
    let mut params = ModelParams::init(model, &mut init_rng)?;
    let mut adam = AdamState::new(&params, train.lr);
    let all_edges = dataset.edge_set();
    let kl_weight = train.kl_weight.unwrap_or(1.0 / dataset.num_nodes as f64);
    let per_positive = if train.loss == LossKind::SageUnsup { train.sage_negatives } else { 1 };

    let mut trace = Vec::with_capacity(train.epochs);
    let mut embedding = embed(model, &params, inputs)?;
    for epoch in 1..=train.epochs {
        let negatives: Vec<Edge> = sample_negative_edges(
            dataset.num_nodes,
            split.train_pos.len() * per_positive,
            &all_edges,
            &mut neg_rng,
        )?;
        let tape = Tape::new();
        let bound = params.bind(&tape);
        let emb = forward(model, &bound, inputs, true, &mut noise_rng)?;
        let pos_logits = decode_edges(emb.z, &split.train_pos)?;
        let neg_logits = decode_edges(emb.z, &negatives)?;
        let loss = match train.loss {
            LossKind::Bce => bce_link_loss(pos_logits, neg_logits)?,
            LossKind::SageUnsup => sage_unsup_loss(pos_logits, neg_logits, per_positive)?,
            LossKind::Elbo => {
                let (mu, logsigma) = emb
                    .posterior
                    .ok_or_else(|| TrainError::Config(format!("the elbo loss needs vgae, not {}", model.kind)))?;
                elbo_loss(pos_logits, neg_logits, mu, logsigma, kl_weight)?
            }
        };
        let value = loss.value().values()[0];
        if !value.is_finite() {
            return Err(TrainError::Divergence { epoch, loss: value });
        }
        tape.backward(loss)?;
        let grads: Vec<Option<Tensor>> = bound.vars().iter().map(|(_, v)| tape.grad(*v)).collect();
        adam_step(&mut params, &grads, &mut adam)?;
        drop(tape);

        embedding = embed(model, &params, inputs)?;
        if !embedding.is_finite() {
            return Err(TrainError::Divergence { epoch, loss: value });
        }
        let val_auc = validation_auc(&embedding, split)?;
        log::debug!("epoch {epoch}: loss {value:.6} val_auc {val_auc:.4}");
        trace.push(EpochRecord {
            epoch,
            train_loss: value,
            val_auc,
        });
    }
    Ok(TrainOutcome {
        params,
        embedding,
        trace,
    })
}

/// Writes `epoch,train_loss,val_auc` rows.
pub fn write_trace_csv(path: impl AsRef<Path>, trace: &[EpochRecord]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "epoch,train_loss,val_auc")?;
    for r in trace {
        writeln!(out, "{},{},{}", r.epoch, r.train_loss, r.val_auc)?;
    }
    out.flush()
}
