//! Classification and link losses with exact gradients.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Mean cross-entropy over the masked rows of `logits`, with the exact
/// gradient (zero on unmasked rows). The log-sum-exp subtracts the row max.
pub fn cross_entropy<T: Scalar>(
    logits: &DenseMatrix<T>,
    labels: &[usize],
    mask: &[usize],
) -> Result<(f64, DenseMatrix<T>)> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let c = logits.cols();
    for &i in mask {
        if i >= logits.rows() {
            return Err(Error::Range(format!("mask row {i} >= {}", logits.rows())));
        }
        if labels[i] >= c {
            return Err(Error::Range(format!("label {} >= {c}", labels[i])));
        }
    }
    let inv = 1.0 / mask.len() as f64;
    let mut grad = DenseMatrix::zeros(logits.rows(), c);
    let mut loss = 0.0;
    for &i in mask {
        let row = logits.row(i);
        let max = row.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v.as_f64()));
        let mut z = 0.0;
        for v in row {
            z += (v.as_f64() - max).exp();
        }
        let log_z = z.ln() + max;
        loss += log_z - row[labels[i]].as_f64();
        for (j, v) in row.iter().enumerate() {
            let p = (v.as_f64() - max).exp() / z;
            let indicator = if j == labels[i] { 1.0 } else { 0.0 };
            grad.set(i, j, T::from_f64((p - indicator) * inv));
        }
    }
    Ok((loss * inv, grad))
}

/// Mean binary cross-entropy on raw scores, using the stable
/// `max(x,0) - x y + ln(1 + e^-|x|)` form; gradient is `(sigma(x) - y)/n`.
pub fn bce_with_logits<T: Scalar>(scores: &[T], targets: &[u8]) -> Result<(f64, Vec<T>)> {
    if scores.len() != targets.len() {
        return Err(Error::shape(
            "bce_with_logits",
            format!("{} scores vs {} targets", scores.len(), targets.len()),
        ));
    }
    if scores.is_empty() {
        return Err(Error::EmptyMask);
    }
    if let Some(bad) = targets.iter().find(|t| **t > 1) {
        return Err(Error::Range(format!("target {bad} not in {{0,1}}")));
    }
    let inv = 1.0 / scores.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(scores.len());
    for (&s, &y) in scores.iter().zip(targets) {
        let x = s.as_f64();
        let y = y as f64;
        loss += x.max(0.0) - x * y + (1.0 + (-x.abs()).exp()).ln();
        let sigma = 1.0 / (1.0 + (-x).exp());
        grad.push(T::from_f64((sigma - y) * inv));
    }
    Ok((loss * inv, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn uniform_logits_give_ln_c() {
        let logits = DenseMatrix::<f64>::zeros(3, 4);
        let (loss, _) = cross_entropy(&logits, &[0, 1, 2], &[0, 1, 2]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn confident_correct_logit_drives_loss_to_zero() {
        let mut logits = DenseMatrix::<f64>::zeros(1, 3);
        logits.set(0, 1, 50.0);
        let (loss, _) = cross_entropy(&logits, &[1], &[0]).unwrap();
        assert!(loss < 1e-12);
    }

    #[test]
    fn unmasked_rows_do_not_move_loss_or_grad() {
        let mut r = rng::stream(3, "ce");
        let a = DenseMatrix::from_fn(4, 3, |_, _| rng::standard_normal::<f64>(&mut r));
        let mut b = a.clone();
        for v in b.row_mut(3) {
            *v += 100.0;
        }
        let labels = [0, 1, 2, 0];
        let (la, ga) = cross_entropy(&a, &labels, &[0, 2]).unwrap();
        let (lb, gb) = cross_entropy(&b, &labels, &[0, 2]).unwrap();
        assert_eq!(la, lb);
        assert_eq!(ga.row(0), gb.row(0));
        assert!(ga.row(3).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let mut r = rng::stream(7, "ce-fd");
        let logits = DenseMatrix::from_fn(6, 3, |_, _| rng::standard_normal::<f64>(&mut r));
        let labels = [0usize, 2, 1, 0, 1, 2];
        let mask = [0usize, 1, 3, 5];
        let (_, grad) = cross_entropy(&logits, &labels, &mask).unwrap();
        let h = 1e-6;
        for i in 0..6 {
            for j in 0..3 {
                let mut plus = logits.clone();
                plus.set(i, j, plus.get(i, j) + h);
                let mut minus = logits.clone();
                minus.set(i, j, minus.get(i, j) - h);
                let (lp, _) = cross_entropy(&plus, &labels, &mask).unwrap();
                let (lm, _) = cross_entropy(&minus, &labels, &mask).unwrap();
                let fd = (lp - lm) / (2.0 * h);
                let an = grad.get(i, j);
                let denom = an.abs().max(fd.abs()).max(1e-6);
                assert!((an - fd).abs() / denom <= 1e-6, "({i},{j}): {an} vs {fd}");
            }
        }
    }

    #[test]
    fn empty_mask_rejected() {
        let logits = DenseMatrix::<f64>::zeros(2, 2);
        assert!(matches!(cross_entropy(&logits, &[0, 1], &[]), Err(Error::EmptyMask)));
    }

    #[test]
    fn bce_score_zero_target_one_is_ln_two() {
        let (loss, _) = bce_with_logits(&[0.0f64], &[1]).unwrap();
        assert!((loss - 2.0f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn bce_huge_score_is_stable() {
        let (loss, grad) = bce_with_logits(&[50.0f64], &[1]).unwrap();
        assert!(loss.is_finite() && loss < 1e-12);
        assert!(grad[0].is_finite());
        let (loss_neg, _) = bce_with_logits(&[-50.0f64], &[0]).unwrap();
        assert!(loss_neg.is_finite() && loss_neg < 1e-12);
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        let mut r = rng::stream(8, "bce-fd");
        let scores: Vec<f64> = (0..10).map(|_| 2.0 * rng::standard_normal::<f64>(&mut r)).collect();
        let targets: Vec<u8> = (0..10).map(|i| (i % 2) as u8).collect();
        let (_, grad) = bce_with_logits(&scores, &targets).unwrap();
        let h = 1e-6;
        for k in 0..10 {
            let mut plus = scores.clone();
            plus[k] += h;
            let mut minus = scores.clone();
            minus[k] -= h;
            let (lp, _) = bce_with_logits(&plus, &targets).unwrap();
            let (lm, _) = bce_with_logits(&minus, &targets).unwrap();
            let fd = (lp - lm) / (2.0 * h);
            let an = grad[k];
            let denom = an.abs().max(fd.abs()).max(1e-6);
            assert!((an - fd).abs() / denom <= 1e-6, "{k}: {an} vs {fd}");
        }
    }

    #[test]
    fn bce_bad_target_rejected() {
        assert!(bce_with_logits(&[0.0f64], &[2]).is_err());
    }
}
