//! Manual reverse-mode differentiation of the forward pass.

use crate::error::{Error, Result};
use crate::linalg::{dense_matmul, spmm, DenseMatrix};
use crate::model::{
    aggregate_backward, Activation, ForwardCache, LayerKind, ModelConfig, ParamSet, PreparedGraph,
    Tensor, TensorValue,
};
use crate::scalar::Scalar;

/// Exact gradients of the cached computation with respect to every tensor
/// in `params`, and optionally the input features.
///
/// `adj` must be the prepared adjacency the forward pass ran with.
pub fn backward<T: Scalar>(
    config: &ModelConfig,
    params: &ParamSet<T>,
    adj: Option<&PreparedGraph<T>>,
    cache: &ForwardCache<T>,
    grad_output: &DenseMatrix<T>,
    want_input_grad: bool,
) -> Result<(ParamSet<T>, Option<DenseMatrix<T>>)> {
    let depth = config.depth();
    if cache.inputs.len() != depth {
        return Err(Error::Consistency(format!(
            "cache holds {} layers, config has {depth}",
            cache.inputs.len()
        )));
    }
    let out_rows = cache.outputs[depth - 1].rows();
    if grad_output.rows() != out_rows || grad_output.cols() != config.output_dim() {
        return Err(Error::shape(
            "backward",
            format!(
                "grad {}x{} vs output {}x{}",
                grad_output.rows(),
                grad_output.cols(),
                out_rows,
                config.output_dim()
            ),
        ));
    }

    let mut grads = ParamSet::<T> { tensors: Vec::new() };
    let mut g = grad_output.clone();

    for l in (0..depth).rev() {
        let spec = &config.layers[l];
        let x = &cache.inputs[l];

        // undo dropout applied to this layer's output
        if let Some(mask) = &cache.dropout_masks[l] {
            for (v, s) in g.data_mut().iter_mut().zip(mask) {
                *v = *v * *s;
            }
        }
        // relu: pass gradient where the activated output is positive
        if spec.activation == Activation::Relu {
            let out = &cache.outputs[l];
            for (v, &o) in g.data_mut().iter_mut().zip(out.data()) {
                if o <= T::zero() {
                    *v = T::zero();
                }
            }
        }

        let mut layer_grads: Vec<Tensor<T>> = Vec::with_capacity(3);
        let x_t = x.transpose();
        let next_g = match (spec.kind, config.peer) {
            (LayerKind::Gcn, true) => {
                let w = params.get(&format!("layers.{l}.weight")).expect("checked in forward");
                layer_grads.push(Tensor {
                    name: w.name.clone(),
                    value: TensorValue::Matrix(dense_matmul(&x_t, &g)?),
                });
                dense_matmul(&g, &w.as_matrix().transpose())?
            }
            (LayerKind::Gcn, false) => {
                let adj = adj.ok_or_else(|| Error::shape("backward", "gcn layer needs adjacency"))?;
                let w = params.get(&format!("layers.{l}.weight")).expect("checked in forward");
                // S = A (X W): dZ = A^T G, dW = X^T dZ, dX = dZ W^T
                let dz = spmm(&adj.layer(l).csr_t, &g)?;
                layer_grads.push(Tensor {
                    name: w.name.clone(),
                    value: TensorValue::Matrix(dense_matmul(&x_t, &dz)?),
                });
                dense_matmul(&dz, &w.as_matrix().transpose())?
            }
            (LayerKind::Sage, true) => {
                let w_root = params.get(&format!("layers.{l}.w_root")).expect("checked");
                let w_neigh = params.get(&format!("layers.{l}.w_neigh")).expect("checked");
                let dw = dense_matmul(&x_t, &g)?;
                layer_grads.push(Tensor {
                    name: w_root.name.clone(),
                    value: TensorValue::Matrix(dw.clone()),
                });
                layer_grads.push(Tensor {
                    name: w_neigh.name.clone(),
                    value: TensorValue::Matrix(dw),
                });
                let mut dx = dense_matmul(&g, &w_root.as_matrix().transpose())?;
                dx.add_assign_from(&dense_matmul(&g, &w_neigh.as_matrix().transpose())?);
                dx
            }
            (LayerKind::Sage, false) => {
                let adj = adj.ok_or_else(|| Error::shape("backward", "sage layer needs adjacency"))?;
                let w_root = params.get(&format!("layers.{l}.w_root")).expect("checked");
                let w_neigh = params.get(&format!("layers.{l}.w_neigh")).expect("checked");
                let m = cache.aggregated[l]
                    .as_ref()
                    .ok_or_else(|| Error::Consistency(format!("layer {l} cache missing aggregation")))?;
                layer_grads.push(Tensor {
                    name: w_root.name.clone(),
                    value: TensorValue::Matrix(dense_matmul(&x_t, &g)?),
                });
                layer_grads.push(Tensor {
                    name: w_neigh.name.clone(),
                    value: TensorValue::Matrix(dense_matmul(&m.transpose(), &g)?),
                });
                let g_m = dense_matmul(&g, &w_neigh.as_matrix().transpose())?;
                let agg = spec.aggregator.as_ref().expect("validated sage layer");
                let mut dx = dense_matmul(&g, &w_root.as_matrix().transpose())?;
                dx.add_assign_from(&aggregate_backward(agg, &adj.layer(l).csr, x, m, &g_m)?);
                dx
            }
        };

        if spec.bias {
            let name = format!("layers.{l}.bias");
            layer_grads.push(Tensor {
                name,
                value: TensorValue::Vector(g.col_sums()),
            });
        }

        let mut next_g = next_g;
        if spec.skip {
            next_g.add_assign_from(&g);
        }

        // keep declaration order: weights then bias, layers ascending
        for t in layer_grads.into_iter().rev() {
            grads.tensors.insert(0, t);
        }
        g = next_g;
    }

    let input_grad = want_input_grad.then_some(g);
    Ok((grads, input_grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;
    use crate::model::{derive_peermlp, forward_train, init_params, AggregatorKind, InitScheme};
    use crate::rng;

    fn setup(
        kind: LayerKind,
        agg: AggregatorKind,
    ) -> (ModelConfig, ParamSet<f64>, DenseMatrix<f64>, PreparedGraph<f64>) {
        let cfg = ModelConfig::layered(kind, &[3, 4, 2], Some(agg), 0.0).unwrap();
        let params = init_params(&cfg, 17, InitScheme::GlorotUniform);
        let mut r = rng::stream(23, "x");
        let x = DenseMatrix::from_fn(6, 3, |_, _| rng::standard_normal(&mut r));
        let mut entries = Vec::new();
        for i in 0..6usize {
            for j in (i + 1)..6 {
                if (i + j) % 2 == 0 {
                    entries.push((i, j, 1.0));
                    entries.push((j, i, 1.0));
                }
            }
        }
        let a = CsrMatrix::from_entries(6, 6, entries).unwrap();
        let adj = PreparedGraph::full(&a, cfg.adjacency_mode).unwrap();
        (cfg, params, x, adj)
    }

    #[test]
    fn zero_grad_output_gives_zero_grads() {
        let (cfg, params, x, adj) = setup(LayerKind::Sage, AggregatorKind::Mean);
        let mut r = rng::stream(0, "d");
        let (out, cache) = forward_train(&cfg, &params, &x, Some(&adj), &mut r).unwrap();
        let zero = DenseMatrix::zeros(out.rows(), out.cols());
        let (grads, _) = backward(&cfg, &params, Some(&adj), &cache, &zero, false).unwrap();
        assert!(grads.flatten().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn grads_match_shape_contract() {
        let (cfg, params, x, adj) = setup(LayerKind::Sage, AggregatorKind::Max);
        let mut r = rng::stream(1, "d");
        let (out, cache) = forward_train(&cfg, &params, &x, Some(&adj), &mut r).unwrap();
        let g = DenseMatrix::from_fn(out.rows(), out.cols(), |_, _| 1.0);
        let (grads, _) = backward(&cfg, &params, Some(&adj), &cache, &g, false).unwrap();
        assert_eq!(grads.shape_sig(), params.shape_sig());
    }

    #[test]
    fn peer_and_identity_gnn_gradients_match() {
        for kind in [LayerKind::Gcn, LayerKind::Sage] {
            let cfg = ModelConfig::layered(kind, &[3, 5, 2], Some(AggregatorKind::Softmax { t: 1.5 }), 0.0)
                .unwrap();
            let params: ParamSet<f64> = init_params(&cfg, 4, InitScheme::GlorotUniform);
            let mut r = rng::stream(2, "x");
            let x = DenseMatrix::from_fn(5, 3, |_, _| rng::standard_normal(&mut r));
            let g = DenseMatrix::from_fn(5, 2, |_, _| rng::standard_normal(&mut r));
            let adj = PreparedGraph::identity(5);

            let mut r1 = rng::stream(3, "d");
            let (_, cache_gnn) = forward_train(&cfg, &params, &x, Some(&adj), &mut r1).unwrap();
            let (grads_gnn, _) = backward(&cfg, &params, Some(&adj), &cache_gnn, &g, false).unwrap();

            let peer = derive_peermlp(&cfg);
            let mut r2 = rng::stream(3, "d");
            let (_, cache_peer) = forward_train(&peer, &params, &x, None, &mut r2).unwrap();
            let (grads_peer, _) = backward(&peer, &params, None, &cache_peer, &g, false).unwrap();

            assert!(grads_gnn.max_abs_diff(&grads_peer) <= 1e-12, "{kind:?}");
        }
    }
}
