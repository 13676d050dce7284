//! GCN, GraphSAGE, GAT and VGAE encoders with a shared inner-product
//! edge decoder.
//!
//! Parameters live outside the tape in [`ModelParams`]. Each training step
//! binds them onto a fresh [`Tape`](crate::autodiff::Tape), runs
//! [`forward`], and reads the gradients back out.

mod checkpoint;
mod layers;
mod params;

pub use checkpoint::{read_named_tensors, write_named_tensors, CHECKPOINT_VERSION};
pub use layers::{
    decode_edges, edge_logits, gat_layer, gcn_layer, reparameterize, sage_layer, vgae_encode, GatHead,
    GatLayerOutput, LayerInput,
};
pub use params::{BoundParams, ModelParams};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::autodiff::{AutodiffError, SparseMatrix, Var};
use crate::data::{mean_neighbor_operator, normalize_adjacency, AttentionEdges, Edge, GraphDataset, NormalizedAdjacency};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("parameters do not match the model configuration: {0}")]
    Contract(String),
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Gcn,
    Sage,
    Gat,
    Vgae,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::Gcn, Self::Sage, Self::Gat, Self::Vgae];

    pub fn id(self) -> &'static str {
        match self {
            Self::Gcn => "gcn",
            Self::Sage => "sage",
            Self::Gat => "gat",
            Self::Vgae => "vgae",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Gcn => "GCN",
            Self::Sage => "GraphSAGE",
            Self::Gat => "GAT",
            Self::Vgae => "VGAE",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(Self::Gcn),
            "sage" | "graphsage" => Ok(Self::Sage),
            "gat" => Ok(Self::Gat),
            "vgae" => Ok(Self::Vgae),
            _ => Err(ModelError::Config(format!("unknown model '{s}' (expected gcn, sage, gat or vgae)"))),
        }
    }
}

/// Activation between the two GAT layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GatActivation {
    Relu,
    Elu,
}

impl FromStr for GatActivation {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Self::Relu),
            "elu" => Ok(Self::Elu),
            _ => Err(ModelError::Config(format!("unknown activation '{s}' (expected relu or elu)"))),
        }
    }
}

impl fmt::Display for GatActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Relu => "relu",
            Self::Elu => "elu",
        })
    }
}

/// Architecture of one encoder.
///
/// `layer_dims` is `[input, hidden, output]`. For GAT the hidden and output
/// entries are per-head widths and `heads` gives the head count per layer,
/// so the hidden representation is `heads[0] * layer_dims[1]` wide. For
/// VGAE the output entry is the latent dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub layer_dims: Vec<usize>,
    pub heads: Vec<usize>,
    pub dropout: f64,
    pub latent_dim: usize,
    pub leaky_slope: f64,
    pub gat_activation: GatActivation,
}

impl ModelConfig {
    /// Benchmark architecture for `kind` on `feature_dim` input features.
    pub fn new(kind: ModelKind, feature_dim: usize) -> Self {
        let (dims, heads, dropout) = match kind {
            ModelKind::Gcn => (vec![feature_dim, 128, 64], vec![], 0.0),
            ModelKind::Sage => (vec![feature_dim, 64, 64], vec![], 0.0),
            ModelKind::Gat => (vec![feature_dim, 8, 16], vec![8, 1], 0.6),
            ModelKind::Vgae => (vec![feature_dim, 32, 16], vec![], 0.0),
        };
        Self {
            kind,
            latent_dim: if kind == ModelKind::Vgae { dims[2] } else { 0 },
            layer_dims: dims,
            heads,
            dropout,
            leaky_slope: 0.2,
            gat_activation: GatActivation::Relu,
        }
    }

    /// Width of the node embeddings the decoder sees.
    pub fn embedding_dim(&self) -> usize {
        match self.kind {
            ModelKind::Gat => self.layer_dims[2] * self.heads[1],
            _ => self.layer_dims[2],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if self.layer_dims.len() != 3 || self.layer_dims.contains(&0) {
            return bad(format!("layer_dims must be three positive widths, got {:?}", self.layer_dims));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        match self.kind {
            ModelKind::Gat if self.heads.len() != 2 || self.heads.contains(&0) => {
                bad(format!("gat needs two positive head counts, got {:?}", self.heads))
            }
            ModelKind::Vgae if self.latent_dim != self.layer_dims[2] => bad(format!(
                "latent_dim {} differs from the output width {}",
                self.latent_dim, self.layer_dims[2]
            )),
            _ => Ok(()),
        }
    }
}

/// Fixed graph operators shared by every forward pass on one split.
#[derive(Clone, Debug)]
pub struct GraphInputs {
    pub num_nodes: usize,
    pub features: Arc<SparseMatrix>,
    pub adjacency: NormalizedAdjacency,
    pub mean_neighbors: Arc<SparseMatrix>,
    pub attention: AttentionEdges,
}

impl GraphInputs {
    /// Operators over `message_edges`, normally the training positives.
    pub fn new(dataset: &GraphDataset, message_edges: &[Edge]) -> Self {
        let n = dataset.num_nodes;
        Self {
            num_nodes: n,
            features: Arc::new(dataset.sparse_features()),
            adjacency: normalize_adjacency(message_edges, n),
            mean_neighbors: mean_neighbor_operator(message_edges, n),
            attention: AttentionEdges::new(message_edges, n),
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }
}

/// Encoder output. `posterior` holds `(μ, logσ)` for VGAE.
#[derive(Clone, Copy, Debug)]
pub struct Embedding<'t> {
    pub z: Var<'t>,
    pub posterior: Option<(Var<'t>, Var<'t>)>,
}

/// Runs the two-layer encoder for `cfg`. In evaluation mode dropout is
/// off and VGAE returns μ, so the result is deterministic.
pub fn forward<'t, R: Rng + ?Sized>(
    cfg: &ModelConfig,
    params: &BoundParams<'t>,
    inputs: &GraphInputs,
    training: bool,
    rng: &mut R,
) -> Result<Embedding<'t>, ModelError> {
    cfg.validate()?;
    params.check(cfg, inputs.feature_dim())?;
    let x = LayerInput::Sparse(Arc::clone(&inputs.features));
    let adj = &inputs.adjacency;
    match cfg.kind {
        ModelKind::Gcn => {
            let h = gcn_layer(adj, &x, params.get("layer0.weight")?, true)?;
            let z = gcn_layer(adj, &LayerInput::Dense(h), params.get("layer1.weight")?, false)?;
            Ok(Embedding { z, posterior: None })
        }
        ModelKind::Sage => {
            let m = &inputs.mean_neighbors;
            let h = sage_layer(m, &x, params.get("layer0.w_self")?, params.get("layer0.w_neigh")?, true)?;
            let z = sage_layer(
                m,
                &LayerInput::Dense(h),
                params.get("layer1.w_self")?,
                params.get("layer1.w_neigh")?,
                false,
            )?;
            Ok(Embedding { z, posterior: None })
        }
        ModelKind::Gat => {
            let heads = |layer: usize| -> Result<Vec<GatHead<'t>>, ModelError> {
                (0..cfg.heads[layer])
                    .map(|h| {
                        Ok(GatHead {
                            weight: params.get(&format!("layer{layer}.head{h}.weight"))?,
                            attention: params.get(&format!("layer{layer}.head{h}.attention"))?,
                        })
                    })
                    .collect()
            };
            let e = &inputs.attention;
            let first = gat_layer(e, &x, &heads(0)?, cfg.dropout, training, cfg.leaky_slope, rng)?;
            let h = match cfg.gat_activation {
                GatActivation::Relu => first.output.relu(),
                GatActivation::Elu => first.output.elu(),
            };
            let second = gat_layer(e, &LayerInput::Dense(h), &heads(1)?, cfg.dropout, training, cfg.leaky_slope, rng)?;
            Ok(Embedding {
                z: second.output,
                posterior: None,
            })
        }
        ModelKind::Vgae => {
            let (mu, logsigma) = vgae_encode(
                adj,
                &x,
                params.get("hidden.weight")?,
                params.get("mu.weight")?,
                params.get("logsigma.weight")?,
            )?;
            let z = reparameterize(mu, logsigma, rng, training)?;
            Ok(Embedding {
                z,
                posterior: Some((mu, logsigma)),
            })
        }
    }
}
