use rand::Rng;

use super::{AutodiffError, Tensor};

/// Compressed sparse row matrix with canonical (strictly increasing) column
/// order inside each row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Validates and wraps raw CSR arrays.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, AutodiffError> {
        let bad = |msg: String| Err(AutodiffError::Contract(format!("invalid CSR: {msg}")));
        if row_offsets.len() != rows + 1 || row_offsets[0] != 0 {
            return bad(format!(
                "row_offsets has length {} for {rows} rows",
                row_offsets.len()
            ));
        }
        if row_offsets[rows] != col_indices.len() || col_indices.len() != values.len() {
            return bad("offsets, indices and values disagree in length".into());
        }
        for r in 0..rows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return bad(format!("row_offsets decreases at row {r}"));
            }
            let row = &col_indices[lo..hi];
            if row.iter().any(|&c| c >= cols) {
                return bad(format!("column index out of range in row {r}"));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns not strictly increasing in row {r}"));
            }
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicate
    /// coordinates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, AutodiffError> {
        let mut sorted = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            if r >= rows || c >= cols {
                return Err(AutodiffError::Index {
                    index: r.max(c),
                    len: rows.min(cols),
                });
            }
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            last = Some((r, c));
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Self::from_csr(rows, cols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Keeps the nonzero entries of a dense matrix.
    pub fn from_dense(t: &Tensor) -> Self {
        let (rows, cols) = (t.rows(), t.cols());
        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for r in 0..rows {
            for (c, &v) in t.row(r).iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn to_dense(&self) -> Tensor {
        let mut out = Tensor::zeros(&[self.rows, self.cols]);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                out.values_mut()[r * self.cols + c] = v;
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        self.col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        self.col_indices[lo..hi]
            .binary_search(&c)
            .ok()
            .map(|i| self.values[lo + i])
    }

    /// Sparse times dense, without recording anything.
    pub fn matmul_dense(&self, d: &Tensor) -> Result<Tensor, AutodiffError> {
        if d.shape().len() != 2 || self.cols != d.rows() {
            return Err(AutodiffError::Shape {
                op: "spmm",
                left: vec![self.rows, self.cols],
                right: d.shape().to_vec(),
            });
        }
        let n = d.cols();
        let mut out = vec![0.0; self.rows * n];
        for r in 0..self.rows {
            let dst = &mut out[r * n..(r + 1) * n];
            for (c, v) in self.row(r) {
                for (o, x) in dst.iter_mut().zip(d.row(c)) {
                    *o += v * x;
                }
            }
        }
        Ok(Tensor::matrix(self.rows, n, out))
    }

    /// `selfᵀ · g` accumulated into `out` (`cols x n`).
    pub(crate) fn transpose_matmul_into(&self, g: &Tensor, out: &mut [f64]) {
        let n = g.cols();
        for r in 0..self.rows {
            let grow = g.row(r);
            for (c, v) in self.row(r) {
                for (o, x) in out[c * n..(c + 1) * n].iter_mut().zip(grow) {
                    *o += v * x;
                }
            }
        }
    }

    /// Inverted dropout over the stored entries. Entries that are
    /// structurally zero stay zero, so this matches dense dropout of the
    /// densified matrix.
    pub fn dropout_values<R: Rng + ?Sized>(&self, rate: f64, rng: &mut R) -> Self {
        let keep = 1.0 - rate;
        let values = self
            .values
            .iter()
            .map(|&v| {
                if rng.random::<f64>() < rate {
                    0.0
                } else {
                    v / keep
                }
            })
            .collect();
        Self {
            values,
            ..self.clone()
        }
    }

    /// Fraction of entries that are stored.
    pub fn density(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
    }
}
