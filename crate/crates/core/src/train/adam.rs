//! Adam with classic L2 regularization folded into the gradient.

use crate::error::{Error, Result};
use crate::model::ParamSet;
use crate::scalar::Scalar;

/// First/second moment estimates per tensor, plus the step counter.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl OptimizerState {
    pub fn new<T: Scalar>(params: &ParamSet<T>) -> Self {
        let shapes: Vec<usize> = params.tensors.iter().map(|t| t.values().len()).collect();
        OptimizerState {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update. Weight decay adds `weight_decay * w` to
/// the gradient before the moment updates (the classic Adam+L2 coupling).
/// Moments are kept in f64 in both precisions.
pub fn adam_step<T: Scalar>(
    params: &mut ParamSet<T>,
    grads: &ParamSet<T>,
    state: &mut OptimizerState,
    lr: f64,
    weight_decay: f64,
) -> Result<()> {
    if params.tensors.len() != grads.tensors.len() || state.m.len() != params.tensors.len() {
        return Err(Error::shape(
            "adam_step",
            format!(
                "{} params, {} grads, {} moment slots",
                params.tensors.len(),
                grads.tensors.len(),
                state.m.len()
            ),
        ));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);

    for (idx, (p, g)) in params.tensors.iter_mut().zip(&grads.tensors).enumerate() {
        if p.values().len() != g.values().len() {
            return Err(Error::shape(
                "adam_step",
                format!("tensor {} length mismatch", p.name),
            ));
        }
        let (m, v) = (&mut state.m[idx], &mut state.v[idx]);
        for ((w, &gv), (mi, vi)) in p
            .values_mut()
            .iter_mut()
            .zip(g.values())
            .zip(m.iter_mut().zip(v.iter_mut()))
        {
            let grad = gv.as_f64() + weight_decay * w.as_f64();
            *mi = state.beta1 * *mi + (1.0 - state.beta1) * grad;
            *vi = state.beta2 * *vi + (1.0 - state.beta2) * grad * grad;
            let m_hat = *mi / bc1;
            let v_hat = *vi / bc2;
            let update = lr * m_hat / (v_hat.sqrt() + state.epsilon);
            *w = T::from_f64(w.as_f64() - update);
        }
    }
    Ok(())
}
