//! Ranking metrics against brute-force oracles, plus property tests for
//! the kernel and metric invariants.

use std::collections::BTreeMap;

use proptest::prelude::*;

use mlpinit_core::eval::{accuracy, rank_metrics, RankMetrics};
use mlpinit_core::linalg::{dense_matmul, spmm, CsrMatrix, DenseMatrix};
use mlpinit_core::rng::{self, RngExt};

/// O(P*N) pairwise AUC, grouped-threshold AP, and threshold-scan Hits@K,
/// written without sorting the joint list the production path uses.
fn oracle(pos: &[f64], neg: &[f64], ks: &[usize]) -> RankMetrics {
    // AUC: count wins and ties pairwise, in exact integer halves
    let mut numerator2: u128 = 0;
    for &p in pos {
        for &n in neg {
            if p > n {
                numerator2 += 2;
            } else if p == n {
                numerator2 += 1;
            }
        }
    }
    let auc = numerator2 as f64 / (2.0 * pos.len() as f64 * neg.len() as f64);

    // AP: walk distinct thresholds in descending order
    let mut thresholds: Vec<f64> = pos.iter().chain(neg).copied().collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let p_total = pos.len() as f64;
    let (mut tp_prev, mut ap) = (0u64, 0.0);
    for &t in &thresholds {
        let tp = pos.iter().filter(|&&s| s >= t).count() as u64;
        let fp = neg.iter().filter(|&&s| s >= t).count() as u64;
        if tp > tp_prev {
            let group_tp = tp - tp_prev;
            let precision = tp as f64 / (tp + fp) as f64;
            ap += group_tp as f64 / p_total * precision;
        }
        tp_prev = tp;
    }

    // Hits@K: K-th largest negative as threshold
    let mut neg_desc = neg.to_vec();
    neg_desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut hits = BTreeMap::new();
    for &k in ks {
        let value = if neg_desc.len() < k {
            1.0
        } else {
            let thr = neg_desc[k - 1];
            pos.iter().filter(|&&p| p > thr).count() as f64 / pos.len() as f64
        };
        hits.insert(k, value);
    }
    RankMetrics { auc, ap, hits }
}

fn random_scores(seed: u64, quantized: bool) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng::stream(seed, "scores");
    let np = r.random_range(1..100usize);
    let nn = r.random_range(1..100usize);
    let draw = |r: &mut rng::Rng| {
        let v: f64 = r.random();
        if quantized {
            (v * 8.0).floor() / 8.0
        } else {
            v
        }
    };
    let pos = (0..np).map(|_| draw(&mut r) + 0.1).collect();
    let neg = (0..nn).map(|_| draw(&mut r)).collect();
    (pos, neg)
}

#[test]
fn rank_metrics_equals_pairwise_oracle_exactly() {
    let ks = [1, 3, 10, 20, 50, 100];
    for seed in 0..200u64 {
        // half the instances share quantized values to exercise ties
        let (pos, neg) = random_scores(seed, seed % 2 == 0);
        let got = rank_metrics(&pos, &neg, &ks).unwrap();
        let want = oracle(&pos, &neg, &ks);
        assert_eq!(got.auc, want.auc, "seed {seed} auc");
        assert_eq!(got.ap, want.ap, "seed {seed} ap");
        assert_eq!(got.hits, want.hits, "seed {seed} hits");
    }
}

#[test]
fn accuracy_equals_counting_oracle() {
    for seed in 0..50u64 {
        let mut r = rng::stream(seed, "acc");
        let n = r.random_range(5..60usize);
        let c = r.random_range(2..6usize);
        let logits = DenseMatrix::<f64>::from_fn(n, c, |_, _| rng::standard_normal(&mut r));
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..c)).collect();
        let mask: Vec<usize> = (0..n).filter(|_| r.random::<f64>() < 0.7).collect();
        if mask.is_empty() {
            continue;
        }
        let got = accuracy(&logits, &labels, &mask).unwrap();
        // independent count
        let mut correct = 0usize;
        for &i in &mask {
            let row = logits.row(i);
            let mut best = 0;
            for j in 1..c {
                if row[j] > row[best] {
                    best = j;
                }
            }
            if best == labels[i] {
                correct += 1;
            }
        }
        assert_eq!(got, correct as f64 / mask.len() as f64, "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// AUC only depends on the order of scores.
    #[test]
    fn auc_invariant_under_monotone_transform(seed in 0u64..500) {
        let (pos, neg) = random_scores(seed, false);
        let ks = [10];
        let base = rank_metrics(&pos, &neg, &ks).unwrap();
        let squash = |v: &f64| (3.0 * v).exp() / (1.0 + (3.0 * v).exp());
        let pos_t: Vec<f64> = pos.iter().map(squash).collect();
        let neg_t: Vec<f64> = neg.iter().map(squash).collect();
        let transformed = rank_metrics(&pos_t, &neg_t, &ks).unwrap();
        prop_assert!((base.auc - transformed.auc).abs() <= 1e-12);
    }

    /// Hits@K never decreases as K grows.
    #[test]
    fn hits_nondecreasing_in_k(seed in 0u64..500) {
        let (pos, neg) = random_scores(seed, seed % 3 == 0);
        let ks = [1, 2, 5, 10, 20, 50];
        let m = rank_metrics(&pos, &neg, &ks).unwrap();
        let values: Vec<f64> = ks.iter().map(|k| m.hits[k]).collect();
        for w in values.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-15);
        }
    }

    /// SpMM agrees with densify-then-multiply on random instances.
    #[test]
    fn spmm_matches_densified_matmul(seed in 0u64..200) {
        let mut r = rng::stream(seed, "spmm-prop");
        let rows = r.random_range(1..50usize);
        let cols = r.random_range(1..50usize);
        let width = r.random_range(1..8usize);
        let mut entries = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                if r.random::<f64>() < 0.15 {
                    entries.push((i, j, rng::standard_normal::<f64>(&mut r)));
                }
            }
        }
        let s = CsrMatrix::from_entries(rows, cols, entries).unwrap();
        let b = DenseMatrix::from_fn(cols, width, |_, _| rng::standard_normal::<f64>(&mut r));
        let sparse = spmm(&s, &b).unwrap();
        let dense = dense_matmul(&s.to_dense(), &b).unwrap();
        prop_assert!(sparse.max_abs_diff(&dense) <= 1e-12);
    }
}
