use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::autodiff::{AutodiffError, SparseMatrix, Tensor, Var};
use crate::data::{AttentionEdges, Edge, NormalizedAdjacency};

type Result<T> = std::result::Result<T, AutodiffError>;

/// Input to a layer: the constant sparse feature matrix or a previous
/// layer's output.
#[derive(Clone, Debug)]
pub enum LayerInput<'t> {
    Sparse(Arc<SparseMatrix>),
    Dense(Var<'t>),
}

impl<'t> LayerInput<'t> {
    /// `input · w`.
    fn project(&self, w: Var<'t>) -> Result<Var<'t>> {
        match self {
            LayerInput::Sparse(s) => w.tape().spmm(s, w),
            LayerInput::Dense(h) => h.matmul(w),
        }
    }

    fn dropout<R: Rng + ?Sized>(&self, rate: f64, training: bool, rng: &mut R) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(AutodiffError::Config(format!("dropout rate must lie in [0, 1), got {rate}")));
        }
        if !training || rate == 0.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            LayerInput::Sparse(s) => LayerInput::Sparse(Arc::new(s.dropout_values(rate, rng))),
            LayerInput::Dense(h) => LayerInput::Dense(h.tape().dropout(*h, rate, true, rng)?),
        })
    }
}

/// `Â · (h · w)`, followed by ReLU when `activation` is set.
pub fn gcn_layer<'t>(adj: &NormalizedAdjacency, h: &LayerInput<'t>, w: Var<'t>, activation: bool) -> Result<Var<'t>> {
    let hw = h.project(w)?;
    let out = w.tape().spmm(&adj.matrix, hw)?;
    Ok(if activation { out.relu() } else { out })
}

/// Mean-aggregator GraphSAGE layer: `h·w_self + mean(h_N)·w_neigh`,
/// optional ReLU, then unit-norm rows.
pub fn sage_layer<'t>(
    mean: &Arc<SparseMatrix>,
    h: &LayerInput<'t>,
    w_self: Var<'t>,
    w_neigh: Var<'t>,
    activation: bool,
) -> Result<Var<'t>> {
    let own = h.project(w_self)?;
    // mean(h_N) · w = M · (h · w)
    let neigh = w_self.tape().spmm(mean, h.project(w_neigh)?)?;
    let out = own.add(neigh)?;
    let out = if activation { out.relu() } else { out };
    Ok(out.rows_l2_normalize())
}

/// Weight matrix and attention vector of one GAT head. The attention
/// vector has `2 * out_width` rows: target half first, then source half.
#[derive(Clone, Copy, Debug)]
pub struct GatHead<'t> {
    pub weight: Var<'t>,
    pub attention: Var<'t>,
}

#[derive(Clone, Debug)]
pub struct GatLayerOutput<'t> {
    /// Head outputs concatenated column-wise.
    pub output: Var<'t>,
    /// Per head, the coefficient of every entry of the edge list (after
    /// attention dropout when training).
    pub attention: Vec<Var<'t>>,
}

/// Multi-head graph attention over `edges`, which must contain a self-loop
/// for every node.
pub fn gat_layer<'t, R: Rng + ?Sized>(
    edges: &AttentionEdges,
    h: &LayerInput<'t>,
    heads: &[GatHead<'t>],
    dropout: f64,
    training: bool,
    slope: f64,
    rng: &mut R,
) -> Result<GatLayerOutput<'t>> {
    let Some(first) = heads.first() else {
        return Err(AutodiffError::Config("gat layer needs at least one head".into()));
    };
    if !edges.has_self_loops() {
        return Err(AutodiffError::Precondition(
            "gat layer: every node needs a self-loop in the attention edge list".into(),
        ));
    }
    let tape = first.weight.tape();
    let width = first.weight.shape()[1];
    let mut w_all = first.weight;
    for head in &heads[1..] {
        w_all = w_all.concat_cols(head.weight)?;
    }
    let x = h.dropout(dropout, training, rng)?;
    let wh_all = x.project(w_all)?;

    let mut outputs = Vec::with_capacity(heads.len());
    let mut coefficients = Vec::with_capacity(heads.len());
    for (k, head) in heads.iter().enumerate() {
        let wh = if heads.len() == 1 { wh_all } else { wh_all.slice_cols(k * width, width)? };
        let a = head.attention;
        if a.shape() != [2 * width, 1] {
            return Err(AutodiffError::Shape {
                op: "gat attention vector",
                left: a.shape(),
                right: vec![2 * width, 1],
            });
        }
        let s_target = wh.matmul(a.slice_rows(0, width)?)?;
        let s_source = wh.matmul(a.slice_rows(width, width)?)?;
        let scores = s_target
            .gather_rows(Arc::clone(&edges.targets))?
            .add(s_source.gather_rows(Arc::clone(&edges.sources))?)?
            .leaky_relu(slope);
        let alpha = tape.segment_softmax_offsets(scores, Arc::clone(&edges.offsets));
        let alpha = tape.dropout(alpha, dropout, training, rng)?;
        outputs.push(tape.segment_weighted_sum(alpha, wh, Arc::clone(&edges.sources), Arc::clone(&edges.offsets))?);
        coefficients.push(alpha);
    }
    let mut output = outputs[0];
    for o in &outputs[1..] {
        output = output.concat_cols(*o)?;
    }
    Ok(GatLayerOutput {
        output,
        attention: coefficients,
    })
}

/// Shared ReLU hidden layer followed by separate linear μ and logσ heads.
pub fn vgae_encode<'t>(
    adj: &NormalizedAdjacency,
    x: &LayerInput<'t>,
    w_hidden: Var<'t>,
    w_mu: Var<'t>,
    w_logsigma: Var<'t>,
) -> Result<(Var<'t>, Var<'t>)> {
    let hidden = LayerInput::Dense(gcn_layer(adj, x, w_hidden, true)?);
    let mu = gcn_layer(adj, &hidden, w_mu, false)?;
    let logsigma = gcn_layer(adj, &hidden, w_logsigma, false)?;
    Ok((mu, logsigma))
}

/// `μ + exp(logσ) ⊙ ε` with `ε ~ N(0, 1)` when training, `μ` otherwise.
pub fn reparameterize<'t, R: Rng + ?Sized>(
    mu: Var<'t>,
    logsigma: Var<'t>,
    rng: &mut R,
    training: bool,
) -> Result<Var<'t>> {
    if mu.shape() != logsigma.shape() {
        return Err(AutodiffError::Shape {
            op: "reparameterize",
            left: mu.shape(),
            right: logsigma.shape(),
        });
    }
    if !training {
        return Ok(mu);
    }
    let shape = mu.shape();
    let eps: Vec<f64> = (0..shape.iter().product::<usize>()).map(|_| rng.sample(StandardNormal)).collect();
    let eps = mu.tape().constant(Tensor::new(&shape, eps)?);
    mu.add(logsigma.exp().mul(eps)?)
}

fn endpoints(pairs: &[Edge]) -> (Arc<[usize]>, Arc<[usize]>) {
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
}

/// Inner-product logits `⟨z_u, z_v⟩`, one per pair, as a vector.
pub fn decode_edges<'t>(z: Var<'t>, pairs: &[Edge]) -> Result<Var<'t>> {
    let (us, vs) = endpoints(pairs);
    Ok(z.gather_rows(us)?.mul(z.gather_rows(vs)?)?.row_sums())
}

/// [`decode_edges`] on a plain tensor.
pub fn edge_logits(z: &Tensor, pairs: &[Edge]) -> Result<Vec<f64>> {
    let n = z.rows();
    pairs
        .iter()
        .map(|&(u, v)| {
            if u >= n || v >= n {
                return Err(AutodiffError::Index { index: u.max(v), len: n });
            }
            Ok(z.row(u).iter().zip(z.row(v)).map(|(a, b)| a * b).sum())
        })
        .collect()
}
