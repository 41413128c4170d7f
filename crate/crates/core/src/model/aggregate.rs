//! Neighbor aggregators: mean, max, median, and temperature softmax.
//!
//! Aggregation reads the adjacency's neighbor lists only; edge weights do
//! not enter. Degree-0 nodes aggregate to zero for every kind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::scalar::Scalar;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AggregatorKind {
    Mean,
    Max,
    Median,
    /// Weights neighbors by a per-feature softmax of their values scaled by
    /// `t`; t = 0 is the mean, large t approaches the max.
    Softmax { t: f64 },
}

impl AggregatorKind {
    pub fn validate(&self) -> Result<()> {
        if let AggregatorKind::Softmax { t } = self {
            if !t.is_finite() || *t < 0.0 {
                return Err(Error::config("aggregator.t", format!("{t} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

fn check_shapes<T: Scalar>(adj: &CsrMatrix<T>, h: &DenseMatrix<T>) -> Result<()> {
    if adj.cols() != h.rows() {
        return Err(Error::shape(
            "aggregate",
            format!("adjacency {}x{} vs {} feature rows", adj.rows(), adj.cols(), h.rows()),
        ));
    }
    Ok(())
}

fn aggregate_row<T: Scalar>(
    kind: &AggregatorKind,
    neighbors: &[usize],
    h: &DenseMatrix<T>,
    out_row: &mut [T],
    scratch: &mut Vec<T>,
) {
    let k = neighbors.len();
    if k == 0 {
        for v in out_row.iter_mut() {
            *v = T::zero();
        }
        return;
    }
    match kind {
        AggregatorKind::Mean => {
            let inv = T::from_f64(1.0 / k as f64);
            for (f, v) in out_row.iter_mut().enumerate() {
                let mut s = T::zero();
                for &j in neighbors {
                    s = s + h.get(j, f);
                }
                *v = s * inv;
            }
        }
        AggregatorKind::Max => {
            for (f, v) in out_row.iter_mut().enumerate() {
                let mut m = h.get(neighbors[0], f);
                for &j in &neighbors[1..] {
                    let x = h.get(j, f);
                    if x > m {
                        m = x;
                    }
                }
                *v = m;
            }
        }
        AggregatorKind::Median => {
            for (f, v) in out_row.iter_mut().enumerate() {
                scratch.clear();
                scratch.extend(neighbors.iter().map(|&j| h.get(j, f)));
                scratch.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
                let mid = k / 2;
                *v = if k % 2 == 1 {
                    scratch[mid]
                } else {
                    (scratch[mid - 1] + scratch[mid]) * T::from_f64(0.5)
                };
            }
        }
        AggregatorKind::Softmax { t } => {
            let t = T::from_f64(*t);
            for (f, v) in out_row.iter_mut().enumerate() {
                let mut m = h.get(neighbors[0], f);
                for &j in &neighbors[1..] {
                    let x = h.get(j, f);
                    if x > m {
                        m = x;
                    }
                }
                let mut wsum = T::zero();
                let mut acc = T::zero();
                for &j in neighbors {
                    let x = h.get(j, f);
                    let w = (t * (x - m)).exp();
                    wsum = wsum + w;
                    acc = acc + w * x;
                }
                *v = acc / wsum;
            }
        }
    }
}

/// Per-node, per-feature aggregation over neighbor rows.
pub fn aggregate<T: Scalar>(
    kind: &AggregatorKind,
    adj: &CsrMatrix<T>,
    h: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    kind.validate()?;
    check_shapes(adj, h)?;
    let cols = h.cols();
    let mut out = DenseMatrix::zeros(adj.rows(), cols);
    #[cfg(feature = "parallel")]
    {
        if adj.rows() >= 64 {
            out.data_mut()
                .par_chunks_mut(cols.max(1))
                .enumerate()
                .for_each(|(i, out_row)| {
                    let mut scratch = Vec::new();
                    aggregate_row(kind, adj.row_indices(i), h, out_row, &mut scratch);
                });
            return Ok(out);
        }
    }
    let mut scratch = Vec::new();
    for i in 0..adj.rows() {
        aggregate_row(kind, adj.row_indices(i), h, out.row_mut(i), &mut scratch);
    }
    Ok(out)
}

/// Gradient of [`aggregate`] with respect to `h`.
///
/// Max and median route the incoming gradient to the selected neighbors,
/// splitting equally on value ties; the even-count median splits between
/// the two central values.
pub fn aggregate_backward<T: Scalar>(
    kind: &AggregatorKind,
    adj: &CsrMatrix<T>,
    h: &DenseMatrix<T>,
    aggregated: &DenseMatrix<T>,
    grad_out: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    kind.validate()?;
    check_shapes(adj, h)?;
    let cols = h.cols();
    let mut grad_h = DenseMatrix::zeros(h.rows(), cols);
    let mut scratch: Vec<T> = Vec::new();
    for i in 0..adj.rows() {
        let neighbors = adj.row_indices(i);
        let k = neighbors.len();
        if k == 0 {
            continue;
        }
        match kind {
            AggregatorKind::Mean => {
                let inv = T::from_f64(1.0 / k as f64);
                for f in 0..cols {
                    let g = grad_out.get(i, f) * inv;
                    for &j in neighbors {
                        grad_h.set(j, f, grad_h.get(j, f) + g);
                    }
                }
            }
            AggregatorKind::Max => {
                for f in 0..cols {
                    let g = grad_out.get(i, f);
                    if g == T::zero() {
                        continue;
                    }
                    let m = aggregated.get(i, f);
                    let ties = neighbors.iter().filter(|&&j| h.get(j, f) == m).count();
                    let share = g * T::from_f64(1.0 / ties as f64);
                    for &j in neighbors {
                        if h.get(j, f) == m {
                            grad_h.set(j, f, grad_h.get(j, f) + share);
                        }
                    }
                }
            }
            AggregatorKind::Median => {
                for f in 0..cols {
                    let g = grad_out.get(i, f);
                    if g == T::zero() {
                        continue;
                    }
                    scratch.clear();
                    scratch.extend(neighbors.iter().map(|&j| h.get(j, f)));
                    scratch.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
                    let mid = k / 2;
                    let selected: [(T, T); 2] = if k % 2 == 1 {
                        [(scratch[mid], T::one()), (scratch[mid], T::zero())]
                    } else {
                        let half = T::from_f64(0.5);
                        [(scratch[mid - 1], half), (scratch[mid], half)]
                    };
                    // merge equal selected values so ties share one pot
                    let merged: Vec<(T, T)> = if selected[0].0 == selected[1].0 {
                        vec![(selected[0].0, selected[0].1 + selected[1].1)]
                    } else {
                        selected.iter().filter(|(_, w)| *w != T::zero()).cloned().collect()
                    };
                    for (value, weight) in merged {
                        let ties = neighbors.iter().filter(|&&j| h.get(j, f) == value).count();
                        let share = g * weight * T::from_f64(1.0 / ties as f64);
                        for &j in neighbors {
                            if h.get(j, f) == value {
                                grad_h.set(j, f, grad_h.get(j, f) + share);
                            }
                        }
                    }
                }
            }
            AggregatorKind::Softmax { t } => {
                let t = T::from_f64(*t);
                for f in 0..cols {
                    let g = grad_out.get(i, f);
                    if g == T::zero() {
                        continue;
                    }
                    let out = aggregated.get(i, f);
                    let mut m = h.get(neighbors[0], f);
                    for &j in &neighbors[1..] {
                        let x = h.get(j, f);
                        if x > m {
                            m = x;
                        }
                    }
                    let mut wsum = T::zero();
                    for &j in neighbors {
                        wsum = wsum + (t * (h.get(j, f) - m)).exp();
                    }
                    for &j in neighbors {
                        let x = h.get(j, f);
                        let w = (t * (x - m)).exp() / wsum;
                        // d out / d x_j = w_j (1 + t (x_j - out))
                        let d = w * (T::one() + t * (x - out));
                        grad_h.set(j, f, grad_h.get(j, f) + g * d);
                    }
                }
            }
        }
    }
    Ok(grad_h)
}
