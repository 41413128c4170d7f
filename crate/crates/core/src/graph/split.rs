//! Node and edge splitting.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{adjacency_from_edges, Graph, Splits};
use crate::linalg::CsrMatrix;
use crate::rng::{self, RngExt};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("train", self.train), ("val", self.val), ("test", self.test)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config {
                    field: "fractions",
                    msg: format!("{name} fraction {v} outside [0,1]"),
                });
            }
        }
        if self.train + self.val + self.test > 1.0 + 1e-12 {
            return Err(Error::Config {
                field: "fractions",
                msg: "fractions sum above 1".into(),
            });
        }
        Ok(())
    }
}

/// Disjoint uniformly-sampled node splits of size floor(n * fraction);
/// leftover nodes stay unassigned.
pub fn split_nodes<T: Scalar>(
    graph: &Graph<T>,
    fractions: SplitFractions,
    seed: u64,
) -> Result<Splits> {
    fractions.validate()?;
    let n = graph.num_nodes();
    let sizes = [
        (fractions.train * n as f64).floor() as usize,
        (fractions.val * n as f64).floor() as usize,
        (fractions.test * n as f64).floor() as usize,
    ];
    for (frac, size, name) in [
        (fractions.train, sizes[0], "train"),
        (fractions.val, sizes[1], "val"),
        (fractions.test, sizes[2], "test"),
    ] {
        if frac > 0.0 && size == 0 {
            return Err(Error::Config {
                field: "fractions",
                msg: format!("{name} fraction {frac} selects zero of {n} nodes"),
            });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut r = rng::stream(seed, "node-split");
    rng::shuffle(&mut r, &mut order);
    let mut it = order.into_iter();
    let mut take = |k: usize| -> Vec<usize> {
        let mut v: Vec<usize> = it.by_ref().take(k).collect();
        v.sort_unstable();
        v
    };
    Ok(Splits {
        train: take(sizes[0]),
        val: take(sizes[1]),
        test: take(sizes[2]),
    })
}

/// Positive/negative edge sets for link prediction.
///
/// `message_adjacency` holds only the symmetrized training positives, so
/// evaluation edges never leak into message passing.
#[derive(Debug, Clone)]
pub struct EdgeSplit<T> {
    pub train_pos: Vec<(usize, usize)>,
    pub val_pos: Vec<(usize, usize)>,
    pub val_neg: Vec<(usize, usize)>,
    pub test_pos: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
    pub message_adjacency: CsrMatrix<T>,
}

/// Partition the undirected edges and sample non-edge negatives.
pub fn split_edges<T: Scalar>(
    graph: &Graph<T>,
    fractions: SplitFractions,
    neg_per_pos: usize,
    seed: u64,
) -> Result<EdgeSplit<T>> {
    fractions.validate()?;
    let n = graph.num_nodes();
    let mut edges = graph.undirected_edges();
    if edges.len() < 10 {
        return Err(Error::Config {
            field: "graph",
            msg: format!("need at least 10 edges to split, have {}", edges.len()),
        });
    }
    let mut r = rng::stream(seed, "edge-split");
    rng::shuffle(&mut r, &mut edges);

    let e = edges.len();
    let n_val = (fractions.val * e as f64).floor() as usize;
    let n_test = (fractions.test * e as f64).floor() as usize;
    let val_pos: Vec<_> = edges[..n_val].to_vec();
    let test_pos: Vec<_> = edges[n_val..n_val + n_test].to_vec();
    let train_pos: Vec<_> = edges[n_val + n_test..].to_vec();

    let needed = neg_per_pos * (n_val + n_test);
    let possible = n * (n - 1) / 2 - e;
    if needed > possible {
        return Err(Error::Sampling(format!(
            "requested {needed} negatives but only {possible} non-edges exist"
        )));
    }

    // uniform non-edges without replacement, by rejection
    let mut taken: HashSet<(usize, usize)> = HashSet::new();
    let mut r_neg = rng::stream(seed, "edge-neg");
    let mut negatives = Vec::with_capacity(needed);
    while negatives.len() < needed {
        let u = r_neg.random_range(0..n);
        let v = r_neg.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if graph.adjacency.has_entry(key.0, key.1) || taken.contains(&key) {
            continue;
        }
        taken.insert(key);
        negatives.push(key);
    }
    let val_neg: Vec<_> = negatives[..neg_per_pos * n_val].to_vec();
    let test_neg: Vec<_> = negatives[neg_per_pos * n_val..].to_vec();

    let message_adjacency = adjacency_from_edges(n, &train_pos)?;
    Ok(EdgeSplit {
        train_pos,
        val_pos,
        val_neg,
        test_pos,
        test_neg,
        message_adjacency,
    })
}
