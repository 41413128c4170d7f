//! Planted-partition generator with a feature/label correlation dial.
//!
//! Nodes get balanced random classes, intra-class pairs link with `p_in`,
//! cross-class pairs with `p_out`. Base features are class-mean Gaussians;
//! `lambda` then mixes them with scale-matched noise, so lambda = 1 keeps
//! the informative features and lambda = 0 destroys the correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{adjacency_from_edges, Graph, Splits};
use crate::linalg::DenseMatrix;
use crate::rng::{self, RngExt};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub c: usize,
    pub d: usize,
    /// Intra-class edge probability.
    pub p_in: f64,
    /// Inter-class edge probability.
    pub p_out: f64,
    /// Scale of the class-mean offsets (means drawn from N(0, class_sep^2 I)).
    pub class_sep: f64,
    /// Feature/label correlation mixer in [0, 1]; 1 keeps original features.
    pub lambda: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < self.c {
            return Err(Error::config("n", format!("{} nodes < {} classes", self.n, self.c)));
        }
        if self.c == 0 || self.d == 0 {
            return Err(Error::config("c", "class and feature counts must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.p_out)
            || !(0.0..=1.0).contains(&self.p_in)
            || self.p_out > self.p_in
        {
            return Err(Error::config(
                "p_in",
                format!("need 0 <= p_out <= p_in <= 1, got {} / {}", self.p_in, self.p_out),
            ));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config("lambda", format!("{} not in [0,1]", self.lambda)));
        }
        Ok(())
    }
}

/// lambda * x_orig + (1 - lambda) * x_rand, with x_rand i.i.d. standard
/// normal re-standardized to each column's empirical mean and scale.
pub fn mix_features<T: Scalar>(
    x_orig: &DenseMatrix<T>,
    lambda: f64,
    seed: u64,
) -> Result<DenseMatrix<T>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::config("lambda", format!("{lambda} not in [0,1]")));
    }
    let (n, d) = (x_orig.rows(), x_orig.cols());
    let mut mean = vec![0.0f64; d];
    let mut sq = vec![0.0f64; d];
    for i in 0..n {
        for (j, v) in x_orig.row(i).iter().enumerate() {
            let v = v.as_f64();
            mean[j] += v;
            sq[j] += v * v;
        }
    }
    let std: Vec<f64> = (0..d)
        .map(|j| {
            mean[j] /= n as f64;
            let var = (sq[j] / n as f64 - mean[j] * mean[j]).max(0.0);
            var.sqrt()
        })
        .collect();

    let mut r = rng::stream(seed, "mix-features");
    let lam = T::from_f64(lambda);
    let one_minus = T::from_f64(1.0 - lambda);
    let mut out = DenseMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            let z: f64 = rng::standard_normal(&mut r);
            let noise = T::from_f64(mean[j] + std[j] * z);
            out.set(i, j, lam * x_orig.get(i, j) + one_minus * noise);
        }
    }
    Ok(out)
}

/// Planted-partition graph with class-conditioned Gaussian features.
///
/// Splits are left empty; callers assign them with `split_nodes`.
pub fn generate_synthetic<T: Scalar>(cfg: &SyntheticConfig) -> Result<Graph<T>> {
    cfg.validate()?;
    let n = cfg.n;

    // balanced class assignment, then shuffled
    let mut labels: Vec<usize> = (0..n).map(|i| i % cfg.c).collect();
    let mut r_class = rng::stream(cfg.seed, "classes");
    rng::shuffle(&mut r_class, &mut labels);

    // Bernoulli links over unordered pairs
    let mut r_edge = rng::stream(cfg.seed, "edges");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if labels[i] == labels[j] { cfg.p_in } else { cfg.p_out };
            if p > 0.0 && r_edge.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let adjacency = adjacency_from_edges(n, &edges)?;

    // class means from N(0, class_sep^2 I), node features N(mean, I)
    let mut r_feat = rng::stream(cfg.seed, "features");
    let mut means = vec![vec![0.0f64; cfg.d]; cfg.c];
    for m in &mut means {
        for v in m.iter_mut() {
            *v = cfg.class_sep * rng::standard_normal::<f64>(&mut r_feat);
        }
    }
    let mut base = DenseMatrix::<T>::zeros(n, cfg.d);
    for i in 0..n {
        for j in 0..cfg.d {
            let z: f64 = rng::standard_normal(&mut r_feat);
            base.set(i, j, T::from_f64(means[labels[i]][j] + z));
        }
    }
    let features = mix_features(&base, cfg.lambda, cfg.seed)?;

    Graph::new(features, adjacency, labels, cfg.c, Splits::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> SyntheticConfig {
        SyntheticConfig {
            n: 60,
            c: 2,
            d: 4,
            p_in: 0.2,
            p_out: 0.02,
            class_sep: 1.0,
            lambda: 1.0,
            seed: 7,
        }
    }

    /// Union-find component count.
    fn components(g: &Graph<f64>) -> usize {
        let n = g.num_nodes();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for i in 0..n {
            for &j in g.adjacency.row_indices(i) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        (0..n).map(|i| find(&mut parent, i)).collect::<std::collections::HashSet<_>>().len()
    }

    #[test]
    fn two_cliques_when_p_in_one_p_out_zero() {
        let cfg = SyntheticConfig {
            p_in: 1.0,
            p_out: 0.0,
            ..base_cfg()
        };
        let g: Graph<f64> = generate_synthetic(&cfg).unwrap();
        assert_eq!(components(&g), 2);
    }

    #[test]
    fn edgeless_when_both_probabilities_zero() {
        let cfg = SyntheticConfig {
            p_in: 0.0,
            p_out: 0.0,
            ..base_cfg()
        };
        let g: Graph<f64> = generate_synthetic(&cfg).unwrap();
        assert_eq!(g.adjacency.nnz(), 0);
    }

    #[test]
    fn edge_count_concentrates_around_expectation() {
        let cfg = SyntheticConfig {
            n: 200,
            c: 4,
            p_in: 0.1,
            p_out: 0.01,
            ..base_cfg()
        };
        for seed in 0..10u64 {
            let g: Graph<f64> = generate_synthetic(&SyntheticConfig { seed, ..cfg.clone() }).unwrap();
            // balanced classes: 4 groups of 50
            let same_pairs = 4.0 * 50.0 * 49.0 / 2.0;
            let cross_pairs = 200.0f64 * 199.0 / 2.0 - same_pairs;
            let expect = 2.0 * (cfg.p_in * same_pairs + cfg.p_out * cross_pairs);
            let var = 4.0
                * (cfg.p_in * (1.0 - cfg.p_in) * same_pairs
                    + cfg.p_out * (1.0 - cfg.p_out) * cross_pairs);
            let sd = var.sqrt();
            let nnz = g.adjacency.nnz() as f64;
            assert!(
                (nnz - expect).abs() <= 5.0 * sd,
                "seed {seed}: nnz {nnz} vs expect {expect} (sd {sd})"
            );
        }
    }

    #[test]
    fn n_less_than_c_rejected() {
        let cfg = SyntheticConfig {
            n: 1,
            c: 2,
            ..base_cfg()
        };
        assert!(generate_synthetic::<f64>(&cfg).is_err());
    }

    #[test]
    fn lambda_one_returns_original() {
        let x = DenseMatrix::from_vec(2, 2, vec![1.0f64, -2.0, 3.5, 0.25]).unwrap();
        let out = mix_features(&x, 1.0, 3).unwrap();
        assert_eq!(out.data(), x.data());
    }

    #[test]
    fn lambda_zero_decorrelates() {
        let mut r = rng::stream(4, "orig");
        let x = DenseMatrix::from_fn(2000, 1, |_, _| rng::standard_normal::<f64>(&mut r));
        let out = mix_features(&x, 0.0, 5).unwrap();
        let n = 2000.0;
        let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..2000 {
            let (a, b) = (x.get(i, 0), out.get(i, 0));
            sx += a;
            sy += b;
            sxy += a * b;
            sxx += a * a;
            syy += b * b;
        }
        let cov = sxy / n - sx / n * (sy / n);
        let corr = cov / ((sxx / n - (sx / n).powi(2)).sqrt() * (syy / n - (sy / n).powi(2)).sqrt());
        assert!(corr.abs() < 0.08, "corr {corr}");
    }

    #[test]
    fn lambda_half_is_elementwise_average() {
        let x = DenseMatrix::from_vec(3, 2, vec![1.0f64, 2.0, -1.0, 0.5, 4.0, -3.0]).unwrap();
        let noise_only = mix_features(&x, 0.0, 9).unwrap();
        let mixed = mix_features(&x, 0.5, 9).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let expect = 0.5 * x.get(i, j) + 0.5 * noise_only.get(i, j);
                assert!((mixed.get(i, j) - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn correlation_with_original_is_monotone_in_lambda() {
        let cfg = SyntheticConfig {
            n: 1200,
            d: 3,
            ..base_cfg()
        };
        let mut r = rng::stream(12, "mono");
        let x = DenseMatrix::from_fn(cfg.n, cfg.d, |_, _| 2.0 * rng::standard_normal::<f64>(&mut r));
        let mut last = vec![-1.0f64; cfg.d];
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let out = mix_features(&x, lambda, 77).unwrap();
            for j in 0..cfg.d {
                let n = cfg.n as f64;
                let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..cfg.n {
                    let (a, b) = (x.get(i, j), out.get(i, j));
                    sx += a;
                    sy += b;
                    sxy += a * b;
                    sxx += a * a;
                    syy += b * b;
                }
                let cov = sxy / n - sx / n * (sy / n);
                let corr =
                    cov / ((sxx / n - (sx / n).powi(2)).sqrt() * (syy / n - (sy / n).powi(2)).sqrt());
                assert!(
                    corr >= last[j] - 1e-9,
                    "lambda {lambda} col {j}: corr {corr} < previous {}",
                    last[j]
                );
                last[j] = corr;
            }
        }
    }
}
