//! Analysis instruments: 2D loss-landscape slices with filter-normalized
//! directions, PCA projection of weight trajectories, and weight histograms.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{ModelConfig, ParamSet, Tensor, TensorValue};
use crate::rng;
use crate::scalar::Scalar;
use crate::train::{format_sig6, Evaluator, TaskData};

/// Loss samples over a 2D slice of weight space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// losses[i][j] at (alphas[i], betas[j]); +inf marks a diverged point.
    pub losses: Vec<Vec<f64>>,
    pub direction_seed: u64,
    pub base_loss: f64,
}

impl LandscapeGrid {
    /// Fraction of grid cells with loss <= base_loss + delta.
    pub fn low_loss_area(&self, delta: f64) -> f64 {
        let total = self.alphas.len() * self.betas.len();
        let low = self
            .losses
            .iter()
            .flatten()
            .filter(|&&l| l <= self.base_loss + delta)
            .count();
        low as f64 / total as f64
    }

    /// Text table: comment header with the seed and base loss, then
    /// `alpha,beta,loss` row-major.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "# direction_seed={} base_loss={}\nalpha,beta,loss\n",
            self.direction_seed,
            format_sig6(self.base_loss)
        );
        for (i, &a) in self.alphas.iter().enumerate() {
            for (j, &b) in self.betas.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    format_sig6(a),
                    format_sig6(b),
                    format_sig6(self.losses[i][j])
                ));
            }
        }
        out
    }
}

/// 2D projection of a snapshot path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub epochs: Vec<usize>,
    /// One (x, y) per snapshot.
    pub coords: Vec<(f64, f64)>,
    /// Fractions of total variance captured by the two components,
    /// nonincreasing.
    pub variance_fractions: [f64; 2],
}

/// Two Gaussian directions whose rows are rescaled to the corresponding
/// parameter row norms (filter normalization); zero-norm rows stay zero.
/// Bias vectors are scaled to the bias norm as a whole.
pub fn filter_normalized_directions<T: Scalar>(
    params: &ParamSet<T>,
    seed: u64,
) -> (ParamSet<T>, ParamSet<T>) {
    let make = |which: &str| -> ParamSet<T> {
        let mut r = rng::stream(seed, which);
        let tensors = params
            .tensors
            .iter()
            .map(|t| Tensor {
                name: t.name.clone(),
                value: match &t.value {
                    TensorValue::Matrix(m) => {
                        let mut d = crate::linalg::DenseMatrix::<T>::from_fn(m.rows(), m.cols(), |_, _| {
                            rng::standard_normal(&mut r)
                        });
                        for i in 0..m.rows() {
                            let p_norm = norm(m.row(i));
                            let d_norm = norm(d.row(i));
                            let scale = if p_norm == 0.0 || d_norm == 0.0 {
                                0.0
                            } else {
                                p_norm / d_norm
                            };
                            for v in d.row_mut(i) {
                                *v = T::from_f64(v.as_f64() * scale);
                            }
                        }
                        TensorValue::Matrix(d)
                    }
                    TensorValue::Vector(b) => {
                        let mut d: Vec<T> = (0..b.len()).map(|_| rng::standard_normal(&mut r)).collect();
                        let p_norm = norm(b);
                        let d_norm = norm(&d);
                        let scale = if p_norm == 0.0 || d_norm == 0.0 {
                            0.0
                        } else {
                            p_norm / d_norm
                        };
                        for v in &mut d {
                            *v = T::from_f64(v.as_f64() * scale);
                        }
                        TensorValue::Vector(d)
                    }
                },
            })
            .collect();
        ParamSet { tensors }
    };
    (make("direction-1"), make("direction-2"))
}

fn norm<T: Scalar>(row: &[T]) -> f64 {
    row.iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_range: f64,
    /// Odd, >= 3, so (0,0) is a grid point.
    pub steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_range: 1.0,
            steps: 21,
        }
    }
}

fn grid_coords(spec: &GridSpec) -> Vec<f64> {
    let mid = (spec.steps / 2) as f64;
    (0..spec.steps)
        .map(|i| (i as f64 - mid) / mid * spec.half_range)
        .collect()
}

/// Full-data training loss (eval mode) over the slice
/// `params + alpha d1 + beta d2`. The center point reuses `params` itself,
/// so its loss equals the base loss exactly. A non-finite loss at any
/// other point is recorded as +inf rather than aborting the grid.
pub fn loss_grid<T: Scalar>(
    config: &ModelConfig,
    params: &ParamSet<T>,
    d1: &ParamSet<T>,
    d2: &ParamSet<T>,
    graph: &Graph<T>,
    task: &TaskData<T>,
    spec: &GridSpec,
    direction_seed: u64,
) -> Result<LandscapeGrid> {
    if spec.steps < 3 || spec.steps % 2 == 0 {
        return Err(Error::config("steps", "grid steps must be odd and >= 3"));
    }
    let ev = Evaluator::new(config, graph, task, direction_seed)?;
    let alphas = grid_coords(spec);
    let betas = grid_coords(spec);
    let base_loss = ev.train_loss(params)?;

    let point = |&(i, j): &(usize, usize)| -> f64 {
        let (a, b) = (alphas[i], betas[j]);
        if a == 0.0 && b == 0.0 {
            return base_loss;
        }
        let mut p = params.clone();
        p.axpy(T::from_f64(a), d1);
        p.axpy(T::from_f64(b), d2);
        match ev.train_loss(&p) {
            Ok(l) if l.is_finite() => l,
            _ => f64::INFINITY,
        }
    };

    let cells: Vec<(usize, usize)> = (0..alphas.len())
        .flat_map(|i| (0..betas.len()).map(move |j| (i, j)))
        .collect();
    #[cfg(feature = "parallel")]
    let flat: Vec<f64> = cells.par_iter().map(point).collect();
    #[cfg(not(feature = "parallel"))]
    let flat: Vec<f64> = cells.iter().map(point).collect();

    let losses = flat.chunks(betas.len()).map(<[f64]>::to_vec).collect();
    Ok(LandscapeGrid {
        alphas,
        betas,
        losses,
        direction_seed,
        base_loss,
    })
}

/// Jacobi eigendecomposition of a small symmetric matrix; returns
/// (eigenvalues, eigenvectors as columns), descending.
fn sym_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row][col]).collect())
        .collect();
    (values, vectors)
}

/// Project weight snapshots onto their top-2 principal directions via the
/// eigendecomposition of the snapshot Gram matrix.
pub fn pca_project<T: Scalar>(snapshots: &[(usize, ParamSet<T>)]) -> Result<Trajectory> {
    if snapshots.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need >= 3 snapshots, have {}",
            snapshots.len()
        )));
    }
    let k = snapshots.len();
    let flat: Vec<Vec<f64>> = snapshots.iter().map(|(_, p)| p.flatten()).collect();
    let dim = flat[0].len();
    if flat.iter().any(|f| f.len() != dim) {
        return Err(Error::Consistency("snapshots have differing sizes".into()));
    }
    let mean: Vec<f64> = (0..dim)
        .map(|d| flat.iter().map(|f| f[d]).sum::<f64>() / k as f64)
        .collect();
    let centered: Vec<Vec<f64>> = flat
        .iter()
        .map(|f| f.iter().zip(&mean).map(|(a, m)| a - m).collect())
        .collect();

    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            gram[i][j] = dot;
            gram[j][i] = dot;
        }
    }
    let (values, vectors) = sym_eigen(gram);
    let total: f64 = values.iter().map(|&l| l.max(0.0)).sum();
    // identical snapshots center to rounding dust; measure against the
    // uncentered energy
    let energy: f64 = flat.iter().flatten().map(|v| v * v).sum();
    if total <= 1e-20 * energy.max(1.0) {
        return Err(Error::Degenerate("snapshots are identical (zero variance)".into()));
    }
    let sigma = |l: f64| l.max(0.0).sqrt();
    let coords: Vec<(f64, f64)> = (0..k)
        .map(|j| (sigma(values[0]) * vectors[0][j], sigma(values[1]) * vectors[1][j]))
        .collect();
    Ok(Trajectory {
        epochs: snapshots.iter().map(|(e, _)| *e).collect(),
        coords,
        variance_fractions: [
            values[0].max(0.0) / total,
            values[1].max(0.0) / total,
        ],
    })
}

/// Render a two-phase trajectory as `epoch,phase,x,y` rows.
pub fn trajectory_table(mlp: &PhaseTrack, gnn: &PhaseTrack) -> String {
    let mut out = String::from("epoch,phase,x,y\n");
    for (phase, t) in [("mlp", mlp), ("gnn", gnn)] {
        for (e, (x, y)) in t.epochs.iter().zip(&t.coords) {
            out.push_str(&format!("{e},{phase},{},{}\n", format_sig6(*x), format_sig6(*y)));
        }
    }
    out
}

/// Epochs plus coordinates for one phase of a trajectory file.
pub struct PhaseTrack {
    pub epochs: Vec<usize>,
    pub coords: Vec<(f64, f64)>,
}

/// Histogram of weight-matrix values (biases excluded); out-of-range
/// values clamp into the edge bins.
pub fn weight_histogram<T: Scalar>(
    params: &ParamSet<T>,
    bins: usize,
    range: (f64, f64),
) -> Result<Vec<(f64, f64, usize)>> {
    if bins == 0 {
        return Err(Error::config("bins", "need at least one bin"));
    }
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(Error::config("range", format!("bad range [{lo}, {hi})")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for t in &params.tensors {
        if let TensorValue::Matrix(m) = &t.value {
            for v in m.data() {
                let x = v.as_f64();
                let idx = ((x - lo) / width).floor() as isize;
                let idx = idx.clamp(0, bins as isize - 1) as usize;
                counts[idx] += 1;
            }
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect())
}

pub fn histogram_table(hist: &[(f64, f64, usize)]) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for (l, r, c) in hist {
        out.push_str(&format!("{},{},{c}\n", format_sig6(*l), format_sig6(*r)));
    }
    out
}
