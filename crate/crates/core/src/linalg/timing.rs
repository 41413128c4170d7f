//! Wall-clock comparison of the two operations inside a graph-convolution
//! layer: the dense feature transform Z = X W and the sparse neighbor
//! aggregation H = A Z, forward and backward.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dense::{dense_matmul, DenseMatrix};
use crate::linalg::sparse::{spmm, CsrMatrix};
use crate::rng::{self, RngExt};

/// Median wall-clock milliseconds per pass, plus the aggregate ratio.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpTimingReport {
    pub n: usize,
    pub d: usize,
    pub density: f64,
    pub repeats: usize,
    pub forward_xw_ms: f64,
    pub backward_xw_ms: f64,
    pub forward_az_ms: f64,
    pub backward_az_ms: f64,
    /// total(AZ) / total(XW)
    pub ratio: f64,
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[m]
    } else {
        0.5 * (samples[m - 1] + samples[m])
    }
}

fn time_ms(mut f: impl FnMut()) -> f64 {
    let t = Instant::now();
    f();
    t.elapsed().as_secs_f64() * 1e3
}

/// Random sparse n x n matrix with i.i.d. Bernoulli(density) entries,
/// generated by geometric gap skipping so cost is O(nnz), not O(n^2).
fn random_sparse(n: usize, density: f64, rng: &mut rng::Rng) -> CsrMatrix<f32> {
    let mut entries = Vec::new();
    if density >= 1.0 {
        for i in 0..n {
            for j in 0..n {
                entries.push((i, j, 1.0f32));
            }
        }
    } else {
        let log1m = (1.0 - density).ln();
        let total = (n as u128) * (n as u128);
        let mut pos: u128 = 0;
        loop {
            let u: f64 = loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break u;
                }
            };
            let gap = (u.ln() / log1m).floor() as u128;
            pos = pos.saturating_add(gap);
            if pos >= total {
                break;
            }
            entries.push(((pos / n as u128) as usize, (pos % n as u128) as usize, 1.0f32));
            pos += 1;
        }
    }
    CsrMatrix::from_entries(n, n, entries).expect("generated entries are in range")
}

/// Time Z = X W and H = A Z (forward and backward) on synthetic operands.
///
/// Backward of the dense transform computes both dX = G W^T and dW = X^T G;
/// backward of the aggregation computes dZ = A^T G with A^T prepared once
/// outside the timed region, the way a training loop holds it.
pub fn measure_op_times(
    n: usize,
    d: usize,
    density: f64,
    repeats: usize,
    seed: u64,
) -> Result<OpTimingReport> {
    if n == 0 || d == 0 {
        return Err(Error::config("n", "operand sizes must be >= 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::config("density", format!("{density} not in (0, 1]")));
    }
    if repeats == 0 {
        return Err(Error::config("repeats", "need at least one repeat"));
    }

    let mut r = rng::stream(seed, "op-timing");
    let x = DenseMatrix::<f32>::from_fn(n, d, |_, _| rng::standard_normal(&mut r));
    let w = DenseMatrix::<f32>::from_fn(d, d, |_, _| rng::standard_normal(&mut r));
    let g = DenseMatrix::<f32>::from_fn(n, d, |_, _| rng::standard_normal(&mut r));
    let a = random_sparse(n, density, &mut r);
    let a_t = a.transpose();
    let w_t = w.transpose();
    let x_t = x.transpose();
    let z = dense_matmul(&x, &w)?;

    let mut fwd_xw = Vec::with_capacity(repeats);
    let mut bwd_xw = Vec::with_capacity(repeats);
    let mut fwd_az = Vec::with_capacity(repeats);
    let mut bwd_az = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        fwd_xw.push(time_ms(|| {
            std::hint::black_box(dense_matmul(&x, &w).unwrap());
        }));
        bwd_xw.push(time_ms(|| {
            std::hint::black_box(dense_matmul(&g, &w_t).unwrap());
            std::hint::black_box(dense_matmul(&x_t, &g).unwrap());
        }));
        fwd_az.push(time_ms(|| {
            std::hint::black_box(spmm(&a, &z).unwrap());
        }));
        bwd_az.push(time_ms(|| {
            std::hint::black_box(spmm(&a_t, &g).unwrap());
        }));
    }

    let forward_xw_ms = median(&mut fwd_xw);
    let backward_xw_ms = median(&mut bwd_xw);
    let forward_az_ms = median(&mut fwd_az);
    let backward_az_ms = median(&mut bwd_az);
    let ratio = (forward_az_ms + backward_az_ms) / (forward_xw_ms + backward_xw_ms);

    Ok(OpTimingReport {
        n,
        d,
        density,
        repeats,
        forward_xw_ms,
        backward_xw_ms,
        forward_az_ms,
        backward_az_ms,
        ratio,
    })
}
