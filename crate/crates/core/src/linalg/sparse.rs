//! CSR sparse matrices, SpMM, and adjacency normalization.

use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;
use crate::scalar::Scalar;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a raw adjacency is rewritten before entering a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyMode {
    /// Leave A untouched.
    Raw,
    /// D^-1 A; rows of isolated nodes stay all-zero.
    RowMean,
    /// D^-1/2 (A+I) D^-1/2 with degrees taken from A+I.
    SymSelfloop,
}

/// Compressed sparse row matrix in canonical form: row_ptr nondecreasing,
/// column indices strictly increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn new(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        let m = CsrMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Build from an unordered edge list; duplicates collapse to one entry
    /// (keeping the last value).
    pub fn from_entries(rows: usize, cols: usize, mut entries: Vec<(usize, usize, T)>) -> Result<Self> {
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::Range(format!(
                    "entry ({r},{c}) outside {rows}x{cols}"
                )));
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        entries.dedup_by(|later, earlier| {
            if later.0 == earlier.0 && later.1 == earlier.1 {
                earlier.2 = later.2;
                true
            } else {
                false
            }
        });
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = entries.iter().map(|e| e.1).collect();
        let values = entries.iter().map(|e| e.2).collect();
        CsrMatrix::new(rows, cols, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.row_ptr.len() != self.rows + 1 {
            return Err(Error::Csr(format!(
                "row_ptr length {} != rows+1 {}",
                self.row_ptr.len(),
                self.rows + 1
            )));
        }
        if self.row_ptr[0] != 0 || self.row_ptr[self.rows] != self.col_idx.len() {
            return Err(Error::Csr("row_ptr endpoints wrong".into()));
        }
        if self.col_idx.len() != self.values.len() {
            return Err(Error::Csr("col_idx/values length mismatch".into()));
        }
        for i in 0..self.rows {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::Csr(format!("row_ptr decreases at row {i}")));
            }
            for k in lo..hi {
                if self.col_idx[k] >= self.cols {
                    return Err(Error::Csr(format!(
                        "col {} out of bounds in row {i}",
                        self.col_idx[k]
                    )));
                }
                if k > lo && self.col_idx[k] <= self.col_idx[k - 1] {
                    return Err(Error::Csr(format!("row {i} not strictly increasing")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices of row i (the neighbor list when this is an adjacency).
    #[inline]
    pub fn row_indices(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    #[inline]
    pub fn row_values(&self, i: usize) -> &[T] {
        &self.values[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn has_entry(&self, i: usize, j: usize) -> bool {
        self.row_indices(i).binary_search(&j).is_ok()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (&j, &v) in self.row_indices(i).iter().zip(self.row_values(i)) {
                out.set(i, j, v);
            }
        }
        out
    }

    /// Counting-sort transpose; output is canonical.
    pub fn transpose(&self) -> CsrMatrix<T> {
        let mut row_ptr = vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            row_ptr[j + 1] += 1;
        }
        for i in 0..self.cols {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut cursor = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.rows {
            for (&j, &v) in self.row_indices(i).iter().zip(self.row_values(i)) {
                let dst = cursor[j];
                col_idx[dst] = i;
                values[dst] = v;
                cursor[j] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Structure equality ignoring values.
    pub fn same_structure(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }

    pub fn cast<U: Scalar>(&self) -> CsrMatrix<U> {
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| U::from_f64(v.as_f64())).collect(),
        }
    }
}

#[inline]
fn spmm_row<T: Scalar>(s: &CsrMatrix<T>, b: &DenseMatrix<T>, i: usize, out_row: &mut [T]) {
    for v in out_row.iter_mut() {
        *v = T::zero();
    }
    // fixed left-to-right accumulation per row
    for (&j, &v) in s.row_indices(i).iter().zip(s.row_values(i)) {
        let b_row = b.row(j);
        for (o, &bkj) in out_row.iter_mut().zip(b_row) {
            *o = *o + v * bkj;
        }
    }
}

fn spmm_checked<T: Scalar>(s: &CsrMatrix<T>, b: &DenseMatrix<T>) -> Result<()> {
    if s.cols != b.rows() {
        return Err(Error::shape(
            "spmm",
            format!("{}x{} * {}x{}", s.rows, s.cols, b.rows(), b.cols()),
        ));
    }
    Ok(())
}

/// Sequential SpMM reference path.
pub fn spmm_seq<T: Scalar>(s: &CsrMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    spmm_checked(s, b)?;
    let mut out = DenseMatrix::zeros(s.rows, b.cols());
    for i in 0..s.rows {
        spmm_row(s, b, i, out.row_mut(i));
    }
    Ok(out)
}

/// Rayon SpMM, parallel across output rows, bit-identical to `spmm_seq`.
#[cfg(feature = "parallel")]
pub fn spmm_par<T: Scalar>(s: &CsrMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    spmm_checked(s, b)?;
    let cols = b.cols();
    let mut out = DenseMatrix::zeros(s.rows, cols);
    out.data_mut()
        .par_chunks_mut(cols.max(1))
        .enumerate()
        .for_each(|(i, out_row)| spmm_row(s, b, i, out_row));
    Ok(out)
}

/// Sparse-dense product S * B.
pub fn spmm<T: Scalar>(s: &CsrMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    #[cfg(feature = "parallel")]
    {
        if s.rows >= 64 {
            return spmm_par(s, b);
        }
    }
    spmm_seq(s, b)
}

/// Rewrite a square adjacency according to `mode`.
pub fn normalize_adjacency<T: Scalar>(a: &CsrMatrix<T>, mode: AdjacencyMode) -> Result<CsrMatrix<T>> {
    if a.rows != a.cols {
        return Err(Error::shape(
            "normalize_adjacency",
            format!("{}x{} not square", a.rows, a.cols),
        ));
    }
    match mode {
        AdjacencyMode::Raw => Ok(a.clone()),
        AdjacencyMode::RowMean => {
            let mut out = a.clone();
            for i in 0..out.rows {
                let deg = out.degree(i);
                if deg == 0 {
                    continue;
                }
                let inv = T::from_f64(1.0 / deg as f64);
                let (lo, hi) = (out.row_ptr[i], out.row_ptr[i + 1]);
                for v in &mut out.values[lo..hi] {
                    *v = *v * inv;
                }
            }
            Ok(out)
        }
        AdjacencyMode::SymSelfloop => {
            let n = a.rows;
            let mut entries: Vec<(usize, usize, T)> = Vec::with_capacity(a.nnz() + n);
            for i in 0..n {
                for (&j, &v) in a.row_indices(i).iter().zip(a.row_values(i)) {
                    entries.push((i, j, v));
                }
                if !a.has_entry(i, i) {
                    entries.push((i, i, T::one()));
                } else {
                    // self edge already present: A+I bumps it by one
                    let pos = entries
                        .iter_mut()
                        .rev()
                        .find(|e| e.0 == i && e.1 == i)
                        .expect("just scanned row");
                    pos.2 = pos.2 + T::one();
                }
            }
            let with_loops = CsrMatrix::from_entries(n, n, entries)?;
            let mut deg = vec![0.0f64; n];
            for i in 0..n {
                deg[i] = with_loops.row_values(i).iter().map(|v| v.as_f64()).sum();
            }
            let inv_sqrt: Vec<T> = deg
                .iter()
                .map(|&d| {
                    if d > 0.0 {
                        T::from_f64(1.0 / d.sqrt())
                    } else {
                        T::zero()
                    }
                })
                .collect();
            let mut out = with_loops;
            for i in 0..n {
                let (lo, hi) = (out.row_ptr[i], out.row_ptr[i + 1]);
                for k in lo..hi {
                    let j = out.col_idx[k];
                    out.values[k] = inv_sqrt[i] * out.values[k] * inv_sqrt[j];
                }
            }
            Ok(out)
        }
    }
}
