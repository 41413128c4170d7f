//! Row-major dense matrices and the matmul kernel.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "from_vec",
                format!("data length {} != {rows}x{cols}", data.len()),
            ));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Build from a row-major closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
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
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Gather the given rows into a new matrix.
    pub fn gather_rows(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(indices.len(), self.cols);
        for (local, &g) in indices.iter().enumerate() {
            out.row_mut(local).copy_from_slice(self.row(g));
        }
        out
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// self + other, elementwise.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(
                "add",
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// self += other, elementwise (shapes must already match).
    pub fn add_assign_from(&mut self, other: &Self) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
    }

    /// self += alpha * other (shapes must already match).
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: T) {
        for v in &mut self.data {
            *v = *v * alpha;
        }
    }

    /// Add a bias row vector to every row.
    pub fn add_bias(&mut self, bias: &[T]) {
        debug_assert_eq!(bias.len(), self.cols);
        for i in 0..self.rows {
            for (v, &b) in self.row_mut(i).iter_mut().zip(bias) {
                *v = *v + b;
            }
        }
    }

    /// Column sums, used for bias gradients.
    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (acc, &v) in out.iter_mut().zip(self.row(i)) {
                *acc = *acc + v;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a.as_f64() - b.as_f64()).abs())
            .fold(0.0, f64::max)
    }

    /// Reinterpret precision elementwise.
    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::from_f64(v.as_f64())).collect(),
        }
    }
}

/// Writes one output row of a * b; the fixed k-then-j order keeps the
/// summation order deterministic for any thread partition.
#[inline]
fn matmul_row<T: Scalar>(a_row: &[T], b: &DenseMatrix<T>, out_row: &mut [T]) {
    for v in out_row.iter_mut() {
        *v = T::zero();
    }
    for (k, &aik) in a_row.iter().enumerate() {
        if aik == T::zero() {
            continue;
        }
        let b_row = b.row(k);
        for (o, &bkj) in out_row.iter_mut().zip(b_row) {
            *o = *o + aik * bkj;
        }
    }
}

fn matmul_checked<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<()> {
    if a.cols != b.rows {
        return Err(Error::shape(
            "dense_matmul",
            format!("{}x{} * {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    Ok(())
}

/// Sequential reference path; always available.
pub fn dense_matmul_seq<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    matmul_checked(a, b)?;
    let mut out = DenseMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let (a_row, out_row) = (a.row(i), i);
        matmul_row(a_row, b, out.row_mut(out_row));
    }
    Ok(out)
}

/// Rayon path, parallel across output rows. Row contents are bit-identical
/// to the sequential path.
#[cfg(feature = "parallel")]
pub fn dense_matmul_par<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    matmul_checked(a, b)?;
    let cols = b.cols;
    let mut out = DenseMatrix::zeros(a.rows, cols);
    out.data
        .par_chunks_mut(cols.max(1))
        .enumerate()
        .for_each(|(i, out_row)| matmul_row(a.row(i), b, out_row));
    Ok(out)
}

/// Matrix product a * b.
pub fn dense_matmul<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    #[cfg(feature = "parallel")]
    {
        if a.rows >= 64 {
            return dense_matmul_par(a, b);
        }
    }
    dense_matmul_seq(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn identity_times_b_is_b() {
        let b = DenseMatrix::from_vec(2, 3, vec![1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let i2 = DenseMatrix::identity(2);
        let out = dense_matmul(&i2, &b).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn hand_multiplied_2x2_times_2x1() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseMatrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        let out = dense_matmul(&a, &b).unwrap();
        assert_eq!(out.data(), &[3.0, 7.0]);
    }

    #[test]
    fn matches_naive_triple_loop_oracle() {
        let mut r = rng::stream(11, "matmul-oracle");
        let a = DenseMatrix::from_fn(5, 7, |_, _| rng::standard_normal::<f64>(&mut r));
        let b = DenseMatrix::from_fn(7, 3, |_, _| rng::standard_normal::<f64>(&mut r));
        let out = dense_matmul(&a, &b).unwrap();
        // independent oracle: j-inner-last triple loop
        let mut expect = DenseMatrix::zeros(5, 3);
        for i in 0..5 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..7 {
                    s += a.get(i, k) * b.get(k, j);
                }
                expect.set(i, j, s);
            }
        }
        assert!(out.max_abs_diff(&expect) <= 1e-12);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = DenseMatrix::<f64>::zeros(2, 3);
        let b = DenseMatrix::<f64>::zeros(2, 3);
        assert!(dense_matmul(&a, &b).is_err());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_bit_identical() {
        let mut r = rng::stream(5, "par-eq");
        let a = DenseMatrix::from_fn(130, 40, |_, _| rng::standard_normal::<f32>(&mut r));
        let b = DenseMatrix::from_fn(40, 17, |_, _| rng::standard_normal::<f32>(&mut r));
        let s = dense_matmul_seq(&a, &b).unwrap();
        let p = dense_matmul_par(&a, &b).unwrap();
        assert_eq!(s.data(), p.data());
    }
}
