//! Reverse-mode automatic differentiation over dense `f64` tensors.
//!
//! A [`Tape`] records every operation applied to [`Var`] handles during a
//! forward pass. [`Tape::backward`] then walks the record in reverse and
//! accumulates gradients into the leaves created with [`Tape::param`].
//!
//! Sparse operands ([`SparseMatrix`]) enter only as constants: the
//! normalized adjacency and the node-feature matrix are data, never
//! parameters.
//!
//! ```
//! use linkbench::autodiff::{Tape, Tensor};
//!
//! let tape = Tape::new();
//! let x = tape.param(Tensor::vector(vec![1.0, -2.0, 3.0]));
//! let loss = x.mul(x).unwrap().sum();
//! tape.backward(loss).unwrap();
//! assert_eq!(tape.grad(x).unwrap().values(), &[2.0, -4.0, 6.0]);
//! ```

mod sparse;
mod tape;
mod tensor;

pub use sparse::SparseMatrix;
pub use tape::{BinaryOp, NodeId, Tape, UnaryOp, Var};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    Shape {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },
    #[error("{op}: argument {value} outside the function domain")]
    Domain { op: &'static str, value: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Contract(String),
}
