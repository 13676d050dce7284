use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use rand::Rng;

use super::tensor::gemm;
use super::{AutodiffError, SparseMatrix, Tensor};

type Result<T> = std::result::Result<T, AutodiffError>;

/// Position of a node in its tape. Parents always have smaller ids than
/// their children, so id order is a topological order.
pub type NodeId = usize;

/// Floor applied to row norms by [`Var::rows_l2_normalize`].
pub const NORM_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UnaryOp {
    Relu,
    LeakyRelu(f64),
    Sigmoid,
    Exp,
    Log,
    Neg,
    /// `ln(1 + e^x)`, evaluated without overflow.
    Softplus,
    /// ELU with alpha 1.
    Elu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
}

enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    SpMM(Arc<SparseMatrix>, NodeId),
    Unary(UnaryOp, NodeId),
    Binary(BinaryOp, NodeId, NodeId),
    Scale(f64, NodeId),
    AddScalar(NodeId),
    Sum(NodeId),
    Mean(NodeId),
    SegmentSoftmax(NodeId, Arc<[usize]>),
    RowsL2Normalize(NodeId, Vec<f64>),
    MaskMul(NodeId, Vec<f64>),
    ConcatCols(NodeId, NodeId),
    SliceCols(NodeId, usize),
    SliceRows(NodeId, usize),
    GatherRows(NodeId, Arc<[usize]>),
    RowSums(NodeId),
    SegmentWeightedSum {
        weights: NodeId,
        x: NodeId,
        src: Arc<[usize]>,
        offsets: Arc<[usize]>,
    },
}

struct Node {
    value: Rc<Tensor>,
    op: Op,
    requires_grad: bool,
    needs_grad: bool,
    grad: Option<Tensor>,
}

/// Record of one forward computation.
///
/// A tape is single-threaded; independent training runs each own one.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a recorded value.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: NodeId,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var#{} {:?}", self.id, self.value())
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Trainable leaf; receives gradients on [`Tape::backward`].
    pub fn param(&self, value: Tensor) -> Var<'_> {
        self.leaf(value, true)
    }

    pub fn constant(&self, value: Tensor) -> Var<'_> {
        self.leaf(value, false)
    }

    fn leaf(&self, value: Tensor, requires_grad: bool) -> Var<'_> {
        self.push(value, Op::Leaf, requires_grad, requires_grad)
    }

    fn push(&self, value: Tensor, op: Op, requires_grad: bool, needs_grad: bool) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value: Rc::new(value),
            op,
            requires_grad,
            needs_grad,
            grad: None,
        });
        Var {
            tape: self,
            id: nodes.len() - 1,
        }
    }

    fn record(&self, value: Tensor, op: Op, parents: &[NodeId]) -> Var<'_> {
        let needs = {
            let nodes = self.nodes.borrow();
            parents.iter().any(|&p| nodes[p].needs_grad)
        };
        self.push(value, op, false, needs)
    }

    fn value_of(&self, id: NodeId) -> Rc<Tensor> {
        Rc::clone(&self.nodes.borrow()[id].value)
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Accumulated gradient of a trainable leaf, if any has been computed.
    pub fn grad(&self, var: Var<'_>) -> Option<Tensor> {
        self.nodes.borrow()[var.id].grad.clone()
    }

    pub fn zero_grad(&self) {
        for n in self.nodes.borrow_mut().iter_mut() {
            n.grad = None;
        }
    }

    /// Matrix product `a · b`.
    pub fn matmul<'t>(&'t self, a: Var<'t>, b: Var<'t>) -> Result<Var<'t>> {
        let out = a.value().matmul(&b.value())?;
        Ok(self.record(out, Op::MatMul(a.id, b.id), &[a.id, b.id]))
    }

    /// Sparse-dense product; the gradient flows into `d` only.
    pub fn spmm<'t>(&'t self, s: &Arc<SparseMatrix>, d: Var<'t>) -> Result<Var<'t>> {
        let out = s.matmul_dense(&d.value())?;
        Ok(self.record(out, Op::SpMM(Arc::clone(s), d.id), &[d.id]))
    }

    pub fn unary<'t>(&'t self, op: UnaryOp, x: Var<'t>) -> Result<Var<'t>> {
        let v = x.value();
        if op == UnaryOp::Log {
            if let Some(&bad) = v.values().iter().find(|&&x| !(x > 0.0)) {
                return Err(AutodiffError::Domain {
                    op: "log",
                    value: bad,
                });
            }
        }
        let f: fn(f64, f64) -> f64 = match op {
            UnaryOp::Relu => |x, _| x.max(0.0),
            UnaryOp::LeakyRelu(_) => |x, s| if x > 0.0 { x } else { s * x },
            UnaryOp::Sigmoid => |x, _| sigmoid(x),
            UnaryOp::Exp => |x, _| x.exp(),
            UnaryOp::Log => |x, _| x.ln(),
            UnaryOp::Neg => |x, _| -x,
            UnaryOp::Softplus => |x, _| softplus(x),
            UnaryOp::Elu => |x, _| if x > 0.0 { x } else { x.exp_m1() },
        };
        let slope = match op {
            UnaryOp::LeakyRelu(s) => s,
            _ => 0.0,
        };
        let out = v.map(|x| f(x, slope));
        Ok(self.record(out, Op::Unary(op, x.id), &[x.id]))
    }

    /// Elementwise binary op. Shapes must match, except that either side may
    /// hold a single element, which is broadcast.
    pub fn binary<'t>(&'t self, op: BinaryOp, a: Var<'t>, b: Var<'t>) -> Result<Var<'t>> {
        let (av, bv) = (a.value(), b.value());
        let f: fn(f64, f64) -> f64 = match op {
            BinaryOp::Add => |x, y| x + y,
            BinaryOp::Sub => |x, y| x - y,
            BinaryOp::Mul => |x, y| x * y,
        };
        let out = if av.shape() == bv.shape() {
            let data = av
                .values()
                .iter()
                .zip(bv.values())
                .map(|(&x, &y)| f(x, y))
                .collect();
            Tensor::with_shape_of(&av, data)
        } else if bv.len() == 1 {
            let y = bv.values()[0];
            av.map(|x| f(x, y))
        } else if av.len() == 1 {
            let x = av.values()[0];
            bv.map(|y| f(x, y))
        } else {
            return Err(AutodiffError::Shape {
                op: "elementwise",
                left: av.shape().to_vec(),
                right: bv.shape().to_vec(),
            });
        };
        Ok(self.record(out, Op::Binary(op, a.id, b.id), &[a.id, b.id]))
    }

    /// Softmax within each run of equal `segment_ids`.
    pub fn segment_softmax<'t>(&'t self, scores: Var<'t>, segment_ids: &[usize]) -> Result<Var<'t>> {
        let v = scores.value();
        if v.len() != segment_ids.len() {
            return Err(AutodiffError::Shape {
                op: "segment_softmax",
                left: v.shape().to_vec(),
                right: vec![segment_ids.len()],
            });
        }
        if segment_ids.windows(2).any(|w| w[0] > w[1]) {
            return Err(AutodiffError::Precondition(
                "segment_softmax: segment ids must be sorted non-decreasing".into(),
            ));
        }
        let mut offsets = vec![0usize];
        for i in 1..segment_ids.len() {
            if segment_ids[i] != segment_ids[i - 1] {
                offsets.push(i);
            }
        }
        if !segment_ids.is_empty() {
            offsets.push(segment_ids.len());
        }
        Ok(self.segment_softmax_offsets(scores, offsets.into()))
    }

    /// Softmax over `scores[offsets[s]..offsets[s+1]]` for every segment `s`.
    /// Segments must be nonempty.
    pub(crate) fn segment_softmax_offsets<'t>(&'t self, scores: Var<'t>, offsets: Arc<[usize]>) -> Var<'t> {
        let v = scores.value();
        let x = v.values();
        let mut out = vec![0.0; x.len()];
        for w in offsets.windows(2) {
            let seg = &x[w[0]..w[1]];
            let max = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for (o, &s) in out[w[0]..w[1]].iter_mut().zip(seg) {
                *o = (s - max).exp();
                total += *o;
            }
            for o in &mut out[w[0]..w[1]] {
                *o /= total;
            }
        }
        let out = Tensor::with_shape_of(&v, out);
        self.record(out, Op::SegmentSoftmax(scores.id, offsets), &[scores.id])
    }

    /// Inverted dropout. Identity when `training` is false or `rate` is 0.
    pub fn dropout<'t, R: Rng + ?Sized>(
        &'t self,
        x: Var<'t>,
        rate: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<Var<'t>> {
        if !(0.0..1.0).contains(&rate) {
            return Err(AutodiffError::Config(format!(
                "dropout rate must lie in [0, 1), got {rate}"
            )));
        }
        if !training || rate == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 - rate;
        let v = x.value();
        let mask: Vec<f64> = (0..v.len())
            .map(|_| if rng.random::<f64>() < rate { 0.0 } else { 1.0 / keep })
            .collect();
        let data = v.values().iter().zip(&mask).map(|(a, m)| a * m).collect();
        let out = Tensor::with_shape_of(&v, data);
        Ok(self.record(out, Op::MaskMul(x.id, mask), &[x.id]))
    }

    /// `out[s] = Σ_{e in segment s} weights[e] · x[src[e]]`.
    ///
    /// This is a sparse-dense product whose sparse values are themselves
    /// differentiable, used for attention-weighted neighbor aggregation.
    pub fn segment_weighted_sum<'t>(
        &'t self,
        weights: Var<'t>,
        x: Var<'t>,
        src: Arc<[usize]>,
        offsets: Arc<[usize]>,
    ) -> Result<Var<'t>> {
        let (wv, xv) = (weights.value(), x.value());
        let segments = offsets.len().saturating_sub(1);
        if wv.len() != src.len() || offsets.last().copied().unwrap_or(0) != src.len() {
            return Err(AutodiffError::Shape {
                op: "segment_weighted_sum",
                left: wv.shape().to_vec(),
                right: vec![src.len()],
            });
        }
        if xv.shape().len() != 2 {
            return Err(AutodiffError::Shape {
                op: "segment_weighted_sum",
                left: xv.shape().to_vec(),
                right: vec![],
            });
        }
        if let Some(&bad) = src.iter().find(|&&s| s >= xv.rows()) {
            return Err(AutodiffError::Index {
                index: bad,
                len: xv.rows(),
            });
        }
        let d = xv.cols();
        let w = wv.values();
        let mut out = vec![0.0; segments * d];
        for s in 0..segments {
            let dst = &mut out[s * d..(s + 1) * d];
            for e in offsets[s]..offsets[s + 1] {
                for (o, v) in dst.iter_mut().zip(xv.row(src[e])) {
                    *o += w[e] * v;
                }
            }
        }
        let out = Tensor::matrix(segments, d, out);
        Ok(self.record(
            out,
            Op::SegmentWeightedSum {
                weights: weights.id,
                x: x.id,
                src,
                offsets,
            },
            &[weights.id, x.id],
        ))
    }

    /// Propagates gradients from a single-element `root` into every
    /// trainable leaf it depends on. Gradients accumulate across calls
    /// until [`Tape::zero_grad`].
    pub fn backward(&self, root: Var<'_>) -> Result<()> {
        let leaf_grads = {
            let nodes = self.nodes.borrow();
            let root_value = &nodes[root.id].value;
            if root_value.len() != 1 {
                return Err(AutodiffError::Contract(format!(
                    "backward needs a scalar root, got shape {:?}",
                    root_value.shape()
                )));
            }
            let mut grads: Vec<Option<Tensor>> = vec![None; root.id + 1];
            grads[root.id] = Some(Tensor::ones(root_value.shape()));
            let mut leaf_grads = Vec::new();
            for id in (0..=root.id).rev() {
                let Some(g) = grads[id].take() else {
                    continue;
                };
                let node = &nodes[id];
                if !node.needs_grad {
                    continue;
                }
                if let Op::Leaf = node.op {
                    if node.requires_grad {
                        leaf_grads.push((id, g));
                    }
                    continue;
                }
                backprop(&nodes, node, &g, &mut grads);
            }
            leaf_grads
        };
        let mut nodes = self.nodes.borrow_mut();
        for (id, g) in leaf_grads {
            match &mut nodes[id].grad {
                Some(acc) => acc.add_assign(&g),
                slot => *slot = Some(g),
            }
        }
        Ok(())
    }
}

fn accumulate(nodes: &[Node], grads: &mut [Option<Tensor>], id: NodeId, g: Tensor) {
    if !nodes[id].needs_grad {
        return;
    }
    match &mut grads[id] {
        Some(acc) => acc.add_assign(&g),
        slot => *slot = Some(g),
    }
}

/// Reduces a gradient to the shape of a broadcast operand.
fn unbroadcast(g: Tensor, target: &Tensor) -> Tensor {
    if g.shape() == target.shape() {
        g
    } else {
        Tensor::with_shape_of(target, vec![g.sum()])
    }
}

fn backprop(nodes: &[Node], node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
    let out = &node.value;
    let val = |id: NodeId| Rc::clone(&nodes[id].value);
    let needs = |id: NodeId| nodes[id].needs_grad;
    match &node.op {
        Op::Leaf => {}
        &Op::MatMul(a, b) => {
            let (av, bv) = (val(a), val(b));
            let (m, k, n) = (av.rows(), av.cols(), bv.cols());
            if needs(a) {
                // dA = G · Bᵀ
                let mut da = vec![0.0; m * k];
                gemm(m, n, k, g.values(), (n as isize, 1), bv.values(), (1, n as isize), &mut da);
                accumulate(nodes, grads, a, Tensor::matrix(m, k, da));
            }
            if needs(b) {
                // dB = Aᵀ · G
                let mut db = vec![0.0; k * n];
                gemm(k, m, n, av.values(), (1, k as isize), g.values(), (n as isize, 1), &mut db);
                accumulate(nodes, grads, b, Tensor::matrix(k, n, db));
            }
        }
        Op::SpMM(s, d) => {
            let dv = val(*d);
            let mut dd = vec![0.0; dv.len()];
            s.transpose_matmul_into(g, &mut dd);
            accumulate(nodes, grads, *d, Tensor::with_shape_of(&dv, dd));
        }
        &Op::Unary(op, x) => {
            let xv = val(x);
            let gx: Vec<f64> = match op {
                UnaryOp::Relu => zip_map(g, &xv, |g, x| if x > 0.0 { g } else { 0.0 }),
                UnaryOp::LeakyRelu(s) => zip_map(g, &xv, |g, x| if x > 0.0 { g } else { s * g }),
                UnaryOp::Sigmoid => zip_map(g, out, |g, y| g * y * (1.0 - y)),
                UnaryOp::Exp => zip_map(g, out, |g, y| g * y),
                UnaryOp::Log => zip_map(g, &xv, |g, x| g / x),
                UnaryOp::Neg => g.values().iter().map(|g| -g).collect(),
                UnaryOp::Softplus => zip_map(g, &xv, |g, x| g * sigmoid(x)),
                UnaryOp::Elu => zip_map(g, out, |g, y| if y > 0.0 { g } else { g * (y + 1.0) }),
            };
            accumulate(nodes, grads, x, Tensor::with_shape_of(&xv, gx));
        }
        &Op::Binary(op, a, b) => {
            let (av, bv) = (val(a), val(b));
            let at = |t: &Tensor, i: usize| if t.len() == 1 { t.values()[0] } else { t.values()[i] };
            if needs(a) {
                let ga: Vec<f64> = match op {
                    BinaryOp::Add | BinaryOp::Sub => g.values().to_vec(),
                    BinaryOp::Mul => g.values().iter().enumerate().map(|(i, g)| g * at(&bv, i)).collect(),
                };
                let ga = unbroadcast(Tensor::with_shape_of(out, ga), &av);
                accumulate(nodes, grads, a, ga);
            }
            if needs(b) {
                let gb: Vec<f64> = match op {
                    BinaryOp::Add => g.values().to_vec(),
                    BinaryOp::Sub => g.values().iter().map(|g| -g).collect(),
                    BinaryOp::Mul => g.values().iter().enumerate().map(|(i, g)| g * at(&av, i)).collect(),
                };
                let gb = unbroadcast(Tensor::with_shape_of(out, gb), &bv);
                accumulate(nodes, grads, b, gb);
            }
        }
        &Op::Scale(c, x) => accumulate(nodes, grads, x, g.map(|g| g * c)),
        &Op::AddScalar(x) => accumulate(nodes, grads, x, g.clone()),
        &Op::Sum(x) => {
            let xv = val(x);
            accumulate(nodes, grads, x, Tensor::full(xv.shape(), g.values()[0]));
        }
        &Op::Mean(x) => {
            let xv = val(x);
            let scale = g.values()[0] / xv.len() as f64;
            accumulate(nodes, grads, x, Tensor::full(xv.shape(), scale));
        }
        Op::SegmentSoftmax(x, offsets) => {
            let y = out.values();
            let gv = g.values();
            let mut gx = vec![0.0; y.len()];
            for w in offsets.windows(2) {
                let dot: f64 = (w[0]..w[1]).map(|i| y[i] * gv[i]).sum();
                for i in w[0]..w[1] {
                    gx[i] = y[i] * (gv[i] - dot);
                }
            }
            accumulate(nodes, grads, *x, Tensor::with_shape_of(out, gx));
        }
        Op::RowsL2Normalize(x, norms) => {
            let cols = out.cols();
            let mut gx = vec![0.0; out.len()];
            for (r, &norm) in norms.iter().enumerate() {
                let y = out.row(r);
                let gr = g.row(r);
                let dst = &mut gx[r * cols..(r + 1) * cols];
                if norm > NORM_EPS {
                    let dot: f64 = y.iter().zip(gr).map(|(a, b)| a * b).sum();
                    for ((o, &yi), &gi) in dst.iter_mut().zip(y).zip(gr) {
                        *o = (gi - yi * dot) / norm;
                    }
                } else {
                    for (o, &gi) in dst.iter_mut().zip(gr) {
                        *o = gi / NORM_EPS;
                    }
                }
            }
            accumulate(nodes, grads, *x, Tensor::with_shape_of(out, gx));
        }
        Op::MaskMul(x, mask) => {
            let gx = g.values().iter().zip(mask).map(|(g, m)| g * m).collect();
            accumulate(nodes, grads, *x, Tensor::with_shape_of(out, gx));
        }
        &Op::ConcatCols(a, b) => {
            let (av, bv) = (val(a), val(b));
            let (p, q) = (av.cols(), bv.cols());
            let rows = out.rows();
            let mut ga = Vec::with_capacity(rows * p);
            let mut gb = Vec::with_capacity(rows * q);
            for r in 0..rows {
                let gr = g.row(r);
                ga.extend_from_slice(&gr[..p]);
                gb.extend_from_slice(&gr[p..]);
            }
            accumulate(nodes, grads, a, Tensor::matrix(rows, p, ga));
            accumulate(nodes, grads, b, Tensor::matrix(rows, q, gb));
        }
        &Op::SliceCols(x, start) => {
            let xv = val(x);
            let (cols, width) = (xv.cols(), out.cols());
            let mut gx = vec![0.0; xv.len()];
            for r in 0..out.rows() {
                gx[r * cols + start..r * cols + start + width].copy_from_slice(g.row(r));
            }
            accumulate(nodes, grads, x, Tensor::with_shape_of(&xv, gx));
        }
        &Op::SliceRows(x, start) => {
            let xv = val(x);
            let cols = xv.cols();
            let mut gx = vec![0.0; xv.len()];
            gx[start * cols..start * cols + g.len()].copy_from_slice(g.values());
            accumulate(nodes, grads, x, Tensor::with_shape_of(&xv, gx));
        }
        Op::GatherRows(x, idx) => {
            let xv = val(*x);
            let cols = xv.cols();
            let mut gx = vec![0.0; xv.len()];
            for (i, &src) in idx.iter().enumerate() {
                for (o, v) in gx[src * cols..(src + 1) * cols].iter_mut().zip(g.row(i)) {
                    *o += v;
                }
            }
            accumulate(nodes, grads, *x, Tensor::with_shape_of(&xv, gx));
        }
        &Op::RowSums(x) => {
            let xv = val(x);
            let cols = xv.cols();
            let gx = (0..xv.len()).map(|i| g.values()[i / cols]).collect();
            accumulate(nodes, grads, x, Tensor::with_shape_of(&xv, gx));
        }
        Op::SegmentWeightedSum {
            weights,
            x,
            src,
            offsets,
        } => {
            let (wv, xv) = (val(*weights), val(*x));
            let d = xv.cols();
            let w = wv.values();
            if needs(*weights) {
                let mut gw = vec![0.0; w.len()];
                for s in 0..offsets.len() - 1 {
                    let gr = g.row(s);
                    for e in offsets[s]..offsets[s + 1] {
                        gw[e] = gr.iter().zip(xv.row(src[e])).map(|(a, b)| a * b).sum();
                    }
                }
                accumulate(nodes, grads, *weights, Tensor::with_shape_of(&wv, gw));
            }
            if needs(*x) {
                let mut gx = vec![0.0; xv.len()];
                for s in 0..offsets.len() - 1 {
                    let gr = g.row(s);
                    for e in offsets[s]..offsets[s + 1] {
                        let j = src[e];
                        for (o, v) in gx[j * d..(j + 1) * d].iter_mut().zip(gr) {
                            *o += w[e] * v;
                        }
                    }
                }
                accumulate(nodes, grads, *x, Tensor::with_shape_of(&xv, gx));
            }
        }
    }
}

fn zip_map(g: &Tensor, t: &Tensor, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    g.values().iter().zip(t.values()).map(|(&g, &t)| f(g, t)).collect()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl<'t> Var<'t> {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn value(&self) -> Rc<Tensor> {
        self.tape.value_of(self.id)
    }

    pub fn shape(&self) -> Vec<usize> {
        self.value().shape().to_vec()
    }

    pub fn matmul(self, other: Var<'t>) -> Result<Var<'t>> {
        self.tape.matmul(self, other)
    }

    fn unary_ok(self, op: UnaryOp) -> Var<'t> {
        self.tape.unary(op, self).expect("total unary op")
    }

    pub fn relu(self) -> Var<'t> {
        self.unary_ok(UnaryOp::Relu)
    }

    pub fn leaky_relu(self, slope: f64) -> Var<'t> {
        self.unary_ok(UnaryOp::LeakyRelu(slope))
    }

    pub fn sigmoid(self) -> Var<'t> {
        self.unary_ok(UnaryOp::Sigmoid)
    }

    pub fn exp(self) -> Var<'t> {
        self.unary_ok(UnaryOp::Exp)
    }

    /// Fails with a domain error on any non-positive entry.
    pub fn log(self) -> Result<Var<'t>> {
        self.tape.unary(UnaryOp::Log, self)
    }

    pub fn neg(self) -> Var<'t> {
        self.unary_ok(UnaryOp::Neg)
    }

    pub fn softplus(self) -> Var<'t> {
        self.unary_ok(UnaryOp::Softplus)
    }

    pub fn elu(self) -> Var<'t> {
        self.unary_ok(UnaryOp::Elu)
    }

    pub fn add(self, other: Var<'t>) -> Result<Var<'t>> {
        self.tape.binary(BinaryOp::Add, self, other)
    }

    pub fn sub(self, other: Var<'t>) -> Result<Var<'t>> {
        self.tape.binary(BinaryOp::Sub, self, other)
    }

    pub fn mul(self, other: Var<'t>) -> Result<Var<'t>> {
        self.tape.binary(BinaryOp::Mul, self, other)
    }

    pub fn scale(self, c: f64) -> Var<'t> {
        let out = self.value().map(|x| x * c);
        self.tape.record(out, Op::Scale(c, self.id), &[self.id])
    }

    pub fn add_scalar(self, c: f64) -> Var<'t> {
        let out = self.value().map(|x| x + c);
        self.tape.record(out, Op::AddScalar(self.id), &[self.id])
    }

    /// Sum of all elements, as a 0-D tensor.
    pub fn sum(self) -> Var<'t> {
        let out = Tensor::scalar(self.value().sum());
        self.tape.record(out, Op::Sum(self.id), &[self.id])
    }

    pub fn mean(self) -> Result<Var<'t>> {
        let v = self.value();
        if v.is_empty() {
            return Err(AutodiffError::Contract("mean of an empty tensor".into()));
        }
        let out = Tensor::scalar(v.sum() / v.len() as f64);
        Ok(self.tape.record(out, Op::Mean(self.id), &[self.id]))
    }

    /// Divides each row by `max(‖row‖₂, 1e-12)`.
    pub fn rows_l2_normalize(self) -> Var<'t> {
        let v = self.value();
        let cols = v.cols();
        let mut norms = Vec::with_capacity(v.rows());
        let mut data = Vec::with_capacity(v.len());
        for r in 0..v.rows() {
            let row = v.row(r);
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            let denom = norm.max(NORM_EPS);
            data.extend(row.iter().map(|x| x / denom));
            norms.push(norm);
        }
        debug_assert_eq!(data.len(), v.rows() * cols);
        let out = Tensor::with_shape_of(&v, data);
        self.tape
            .record(out, Op::RowsL2Normalize(self.id, norms), &[self.id])
    }

    pub fn concat_cols(self, other: Var<'t>) -> Result<Var<'t>> {
        let (a, b) = (self.value(), other.value());
        if a.shape().len() != 2 || b.shape().len() != 2 || a.rows() != b.rows() {
            return Err(AutodiffError::Shape {
                op: "concat_cols",
                left: a.shape().to_vec(),
                right: b.shape().to_vec(),
            });
        }
        let (p, q) = (a.cols(), b.cols());
        let mut data = Vec::with_capacity(a.rows() * (p + q));
        for r in 0..a.rows() {
            data.extend_from_slice(a.row(r));
            data.extend_from_slice(b.row(r));
        }
        let out = Tensor::matrix(a.rows(), p + q, data);
        Ok(self
            .tape
            .record(out, Op::ConcatCols(self.id, other.id), &[self.id, other.id]))
    }

    /// Columns `start..start + width` of a matrix.
    pub fn slice_cols(self, start: usize, width: usize) -> Result<Var<'t>> {
        let v = self.value();
        if v.shape().len() != 2 || start + width > v.cols() {
            return Err(AutodiffError::Shape {
                op: "slice_cols",
                left: v.shape().to_vec(),
                right: vec![start, width],
            });
        }
        let mut data = Vec::with_capacity(v.rows() * width);
        for r in 0..v.rows() {
            data.extend_from_slice(&v.row(r)[start..start + width]);
        }
        let out = Tensor::matrix(v.rows(), width, data);
        Ok(self.tape.record(out, Op::SliceCols(self.id, start), &[self.id]))
    }

    /// Rows `start..start + count`.
    pub fn slice_rows(self, start: usize, count: usize) -> Result<Var<'t>> {
        let v = self.value();
        if v.shape().is_empty() || start + count > v.rows() {
            return Err(AutodiffError::Shape {
                op: "slice_rows",
                left: v.shape().to_vec(),
                right: vec![start, count],
            });
        }
        let cols = v.cols();
        let data = v.values()[start * cols..(start + count) * cols].to_vec();
        let mut shape = v.shape().to_vec();
        shape[0] = count;
        let out = Tensor::new(&shape, data)?;
        Ok(self.tape.record(out, Op::SliceRows(self.id, start), &[self.id]))
    }

    /// Row `i` of the output is row `idx[i]` of `self`. Duplicate indices
    /// accumulate in the backward pass.
    pub fn gather_rows(self, idx: impl Into<Arc<[usize]>>) -> Result<Var<'t>> {
        let idx: Arc<[usize]> = idx.into();
        let v = self.value();
        if v.shape().is_empty() {
            return Err(AutodiffError::Shape {
                op: "gather_rows",
                left: vec![],
                right: vec![idx.len()],
            });
        }
        let cols = v.cols();
        let mut data = Vec::with_capacity(idx.len() * cols);
        for &i in idx.iter() {
            if i >= v.rows() {
                return Err(AutodiffError::Index {
                    index: i,
                    len: v.rows(),
                });
            }
            data.extend_from_slice(v.row(i));
        }
        let mut shape = v.shape().to_vec();
        shape[0] = idx.len();
        let out = Tensor::new(&shape, data)?;
        Ok(self.tape.record(out, Op::GatherRows(self.id, idx), &[self.id]))
    }

    /// Sum of each row, as a vector.
    pub fn row_sums(self) -> Var<'t> {
        let v = self.value();
        let data = (0..v.rows()).map(|r| v.row(r).iter().sum()).collect();
        self.tape
            .record(Tensor::vector(data), Op::RowSums(self.id), &[self.id])
    }
}
