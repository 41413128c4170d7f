//! Task metrics: classification accuracy and the link-prediction ranking
//! suite (AUC, average precision, Hits@K), plus the inner-product decoder.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng;
use crate::scalar::Scalar;

/// Ranking metrics for one positive/negative score split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMetrics {
    pub auc: f64,
    pub ap: f64,
    /// K -> fraction of positives above the K-th best negative.
    pub hits: BTreeMap<usize, f64>,
}

/// How Hits@K picks its negative pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitsConvention {
    /// Every positive is ranked against the full negative set.
    SharedPool,
    /// Every positive is ranked against its own uniform subsample of the
    /// negative set.
    SampledPerPositive { per_pos: usize, seed: u64 },
}

/// Fraction of masked rows whose argmax matches the label; argmax ties go
/// to the lowest index.
pub fn accuracy<T: Scalar>(
    logits: &DenseMatrix<T>,
    labels: &[usize],
    mask: &[usize],
) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut correct = 0usize;
    for &i in mask {
        if i >= logits.rows() {
            return Err(Error::Range(format!("mask row {i} >= {}", logits.rows())));
        }
        let row = logits.row(i);
        let mut arg = 0usize;
        for (j, v) in row.iter().enumerate().skip(1) {
            if *v > row[arg] {
                arg = j;
            }
        }
        if arg == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / mask.len() as f64)
}

/// sigmoid(h_i . h_j) per pair.
pub fn decode_links<T: Scalar>(h: &DenseMatrix<T>, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    let n = h.rows();
    pairs
        .iter()
        .map(|&(i, j)| {
            if i >= n || j >= n {
                return Err(Error::Range(format!("pair ({i},{j}) >= {n} rows")));
            }
            let dot: f64 = h
                .row(i)
                .iter()
                .zip(h.row(j))
                .map(|(a, b)| a.as_f64() * b.as_f64())
                .sum();
            Ok(1.0 / (1.0 + (-dot).exp()))
        })
        .collect()
}

/// AUC by sorted rank counting: P(pos > neg) + 0.5 P(pos = neg). The
/// numerator is assembled in exact integer halves, so this equals the
/// brute-force pairwise count bit for bit.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Degenerate("auc needs both positive and negative scores".into()));
    }
    let mut neg_sorted: Vec<f64> = neg.to_vec();
    neg_sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let mut numerator2: u128 = 0; // 2*wins + ties
    for &p in pos {
        let below = neg_sorted.partition_point(|&x| x < p);
        let not_above = neg_sorted.partition_point(|&x| x <= p);
        numerator2 += 2 * below as u128 + (not_above - below) as u128;
    }
    Ok(numerator2 as f64 / (2.0 * pos.len() as f64 * neg.len() as f64))
}

/// Interpolation-free average precision: sum of (R_n - R_(n-1)) * P_n over
/// descending distinct-score groups, ties grouped.
fn average_precision(pos: &[f64], neg: &[f64]) -> f64 {
    let mut scored: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scores"));
    let p_total = pos.len() as f64;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut ap = 0.0;
    let mut idx = 0;
    while idx < scored.len() {
        let score = scored[idx].0;
        let mut group_tp = 0u64;
        let mut group_fp = 0u64;
        while idx < scored.len() && scored[idx].0 == score {
            if scored[idx].1 {
                group_tp += 1;
            } else {
                group_fp += 1;
            }
            idx += 1;
        }
        tp += group_tp;
        fp += group_fp;
        if group_tp > 0 {
            let precision = tp as f64 / (tp + fp) as f64;
            let recall_delta = group_tp as f64 / p_total;
            ap += recall_delta * precision;
        }
    }
    ap
}

/// Hits@K against a shared pool: fraction of positives strictly above the
/// K-th largest negative; with fewer than K negatives every positive hits.
fn hits_at_k(pos: &[f64], neg_desc: &[f64], k: usize) -> f64 {
    if neg_desc.len() < k {
        return 1.0;
    }
    let threshold = neg_desc[k - 1];
    pos.iter().filter(|&&p| p > threshold).count() as f64 / pos.len() as f64
}

/// Full ranking suite under the shared-pool Hits convention.
pub fn rank_metrics(pos: &[f64], neg: &[f64], ks: &[usize]) -> Result<RankMetrics> {
    rank_metrics_with(pos, neg, ks, HitsConvention::SharedPool)
}

pub fn rank_metrics_with(
    pos: &[f64],
    neg: &[f64],
    ks: &[usize],
    convention: HitsConvention,
) -> Result<RankMetrics> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Degenerate("rank_metrics needs both score lists".into()));
    }
    let auc = auc(pos, neg)?;
    let ap = average_precision(pos, neg);
    let mut neg_desc: Vec<f64> = neg.to_vec();
    neg_desc.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
    let mut hits = BTreeMap::new();
    for &k in ks {
        if k == 0 {
            return Err(Error::config("ks", "hits cutoff must be >= 1"));
        }
        let value = match convention {
            HitsConvention::SharedPool => hits_at_k(pos, &neg_desc, k),
            HitsConvention::SampledPerPositive { per_pos, seed } => {
                let mut r = rng::stream(seed, &format!("hits-sample/{k}"));
                let mut total = 0.0;
                for &p in pos {
                    let sample: Vec<f64> = if per_pos >= neg.len() {
                        neg_desc.clone()
                    } else {
                        let idx = rng::sample_indices(&mut r, neg.len(), per_pos);
                        let mut s: Vec<f64> = idx.into_iter().map(|i| neg[i]).collect();
                        s.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
                        s
                    };
                    total += hits_at_k(&[p], &sample, k);
                }
                total / pos.len() as f64
            }
        };
        hits.insert(k, value);
    }
    Ok(RankMetrics { auc, ap, hits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_all_correct_and_single_wrong() {
        let logits = DenseMatrix::from_vec(2, 2, vec![2.0f64, 1.0, 0.0, 3.0]).unwrap();
        assert_eq!(accuracy(&logits, &[0, 1], &[0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&logits, &[1, 0], &[0]).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_argmax_tie_takes_lowest_index() {
        let logits = DenseMatrix::from_vec(1, 3, vec![5.0f64, 5.0, 1.0]).unwrap();
        assert_eq!(accuracy(&logits, &[0], &[0]).unwrap(), 1.0);
        assert_eq!(accuracy(&logits, &[1], &[0]).unwrap(), 0.0);
    }

    #[test]
    fn decoder_closed_forms() {
        let h = DenseMatrix::from_vec(3, 2, vec![1.0f64, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
        let s = decode_links(&h, &[(0, 1), (0, 2), (1, 0)]).unwrap();
        assert!((s[0] - 1.0 / (1.0 + (-1.0f64).exp())).abs() <= 1e-12); // sigmoid(1)
        assert_eq!(s[1], 0.5); // orthogonal rows
        assert_eq!(s[0], s[2]); // symmetric in the pair
    }

    #[test]
    fn perfectly_separated_scores() {
        let m = rank_metrics(&[0.9, 0.8], &[0.2, 0.1, 0.05], &[1, 2]).unwrap();
        assert_eq!(m.auc, 1.0);
        assert_eq!(m.ap, 1.0);
        assert_eq!(m.hits[&1], 1.0);
    }

    #[test]
    fn auc_half_for_interleaved_example() {
        // pairwise: 0.8 beats 0.1, loses to 0.9 -> 1 win of 2
        let m = rank_metrics(&[0.8], &[0.9, 0.1], &[1]).unwrap();
        assert_eq!(m.auc, 0.5);
    }

    #[test]
    fn hits_threshold_scan_example() {
        // K=1: top negative is 0.8; only 0.9 beats it
        let m = rank_metrics(&[0.9, 0.5], &[0.8, 0.7, 0.6], &[1]).unwrap();
        assert_eq!(m.hits[&1], 0.5);
    }

    #[test]
    fn hits_with_fewer_negatives_than_k() {
        let m = rank_metrics(&[0.1], &[0.9], &[5]).unwrap();
        assert_eq!(m.hits[&5], 1.0);
    }

    #[test]
    fn auc_counts_ties_as_half() {
        let m = rank_metrics(&[0.5], &[0.5], &[1]).unwrap();
        assert_eq!(m.auc, 0.5);
    }

    #[test]
    fn sampled_convention_with_full_pool_matches_shared() {
        let pos = [0.9, 0.4, 0.6];
        let neg = [0.5, 0.3, 0.8];
        let shared = rank_metrics(&pos, &neg, &[1, 2]).unwrap();
        let sampled = rank_metrics_with(
            &pos,
            &neg,
            &[1, 2],
            HitsConvention::SampledPerPositive { per_pos: 3, seed: 1 },
        )
        .unwrap();
        assert_eq!(shared.hits, sampled.hits);
    }
}
