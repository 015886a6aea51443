//! Sparse and dense linear-algebra kernels.
//!
//! All reductions run sequentially left to right so that residual histories
//! are bit-reproducible between runs.

mod mtx;
mod problem;

pub use mtx::{parse_matrix_market, read_matrix_market, write_matrix_market};
pub use problem::{gen_convdiff, generate_problem, scale_rows_geometric, Problem};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptrs: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating the structure.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptrs: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        let bad = |msg: String| Err(LinalgError::InvalidStructure(msg));
        if row_ptrs.len() != n_rows + 1 {
            return bad(format!("{} row pointers for {n_rows} rows", row_ptrs.len()));
        }
        if row_ptrs[0] != 0 {
            return bad("first row pointer is not zero".into());
        }
        if col_idx.len() != values.len() || row_ptrs[n_rows] != values.len() {
            return bad(format!(
                "last row pointer {} does not match {} indices and {} values",
                row_ptrs[n_rows],
                col_idx.len(),
                values.len()
            ));
        }
        for (i, w) in row_ptrs.windows(2).enumerate() {
            if w[1] < w[0] {
                return bad(format!("row pointers decrease at row {i}"));
            }
            let cols = &col_idx[w[0]..w[1]];
            if cols.windows(2).any(|c| c[1] <= c[0]) {
                return bad(format!("column indices in row {i} are not strictly increasing"));
            }
            if let Some(&c) = cols.last() {
                if c >= n_cols {
                    return bad(format!("column index {c} in row {i} exceeds {n_cols} columns"));
                }
            }
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return bad(format!("non-finite value at position {k}"));
        }
        Ok(Self { n_rows, n_cols, row_ptrs, col_idx, values })
    }

    /// Builds a matrix from `(row, col, value)` triplets in any order;
    /// duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= n_rows || j >= n_cols) {
            return Err(LinalgError::InvalidStructure(format!(
                "entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
            )));
        }
        let mut sorted = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptrs = vec![0; n_rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptrs[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_ptrs[i + 1] += row_ptrs[i];
        }
        Self::new(n_rows, n_cols, row_ptrs, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptrs: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let n = diag.len();
        Self::new(n, n, (0..=n).collect(), (0..n).collect(), diag.to_vec())
    }

    /// Builds a matrix from dense rows, keeping only nonzero entries.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(LinalgError::DimensionMismatch { expected: n_cols, got: row.len() });
            }
            triplets.extend(row.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, &v)| (i, j, v)));
        }
        Self::from_triplets(rows.len(), n_cols, &triplets)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        dense
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptrs(&self) -> &[usize] {
        &self.row_ptrs
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptrs[i]..self.row_ptrs[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            triplets.extend(cols.iter().zip(vals).map(|(&j, &v)| (j, i, v)));
        }
        Self::from_triplets(self.n_cols, self.n_rows, &triplets).expect("transpose of a valid matrix")
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.values)
    }

    /// Multiplies row `i` by `factors[i]`.
    pub fn scale_rows(&mut self, factors: &[f64]) -> Result<(), LinalgError> {
        if factors.len() != self.n_rows {
            return Err(LinalgError::DimensionMismatch { expected: self.n_rows, got: factors.len() });
        }
        for (i, &f) in factors.iter().enumerate() {
            for v in &mut self.values[self.row_ptrs[i]..self.row_ptrs[i + 1]] {
                *v *= f;
            }
        }
        Ok(())
    }

    /// `y := A x`.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), LinalgError> {
        if x.len() != self.n_cols {
            return Err(LinalgError::DimensionMismatch { expected: self.n_cols, got: x.len() });
        }
        if y.len() != self.n_rows {
            return Err(LinalgError::DimensionMismatch { expected: self.n_rows, got: y.len() });
        }
        for (i, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *out = cols.iter().zip(vals).fold(0.0, |acc, (&j, &v)| acc + v * x[j]);
        }
        Ok(())
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }
}

fn check_same_len(x: &[f64], y: &[f64]) -> Result<(), LinalgError> {
    if x.len() != y.len() {
        return Err(LinalgError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(())
}

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64, LinalgError> {
    check_same_len(x, y)?;
    Ok(x.iter().zip(y).fold(0.0, |acc, (&a, &b)| acc + a * b))
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, &a| acc + a * a).sqrt()
}

/// `y := y + alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<(), LinalgError> {
    check_same_len(x, y)?;
    for (y, &x) in y.iter_mut().zip(x) {
        *y += alpha * x;
    }
    Ok(())
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}
