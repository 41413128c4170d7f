//! Layered forward pass for GNNs and their aggregation-free peers.

use crate::error::{Error, Result};
use crate::graph::SubgraphBatch;
use crate::linalg::{dense_matmul, normalize_adjacency, spmm, AdjacencyMode, CsrMatrix, DenseMatrix};
use crate::model::{aggregate, Activation, LayerKind, ModelConfig, ParamSet, Tensor};
use crate::rng::{Rng, RngExt};
use crate::scalar::Scalar;

/// Normalized adjacency plus its transpose, prepared once per run.
/// The transpose backs the gcn backward pass and stays in lockstep with
/// the forward matrix.
#[derive(Debug, Clone)]
pub struct PreparedAdjacency<T> {
    pub csr: CsrMatrix<T>,
    pub csr_t: CsrMatrix<T>,
}

impl<T: Scalar> PreparedAdjacency<T> {
    pub fn new(a: &CsrMatrix<T>, mode: AdjacencyMode) -> Result<Self> {
        let csr = normalize_adjacency(a, mode)?;
        let csr_t = csr.transpose();
        Ok(PreparedAdjacency { csr, csr_t })
    }
}

/// Per-layer prepared adjacency; a single entry is shared by every layer.
#[derive(Debug, Clone)]
pub struct PreparedGraph<T> {
    layers: Vec<PreparedAdjacency<T>>,
}

impl<T: Scalar> PreparedGraph<T> {
    /// One adjacency for all layers (full-batch training and evaluation).
    pub fn full(a: &CsrMatrix<T>, mode: AdjacencyMode) -> Result<Self> {
        Ok(PreparedGraph {
            layers: vec![PreparedAdjacency::new(a, mode)?],
        })
    }

    /// The identity adjacency: every node's neighborhood is itself. A GNN
    /// run through this equals its derived peer MLP.
    pub fn identity(n: usize) -> Self {
        let id = CsrMatrix::identity(n);
        PreparedGraph {
            layers: vec![PreparedAdjacency {
                csr_t: id.clone(),
                csr: id,
            }],
        }
    }

    /// Normalize each sampled block of a mini-batch.
    pub fn from_batch(batch: &SubgraphBatch<T>, mode: AdjacencyMode) -> Result<Self> {
        let layers = batch
            .blocks
            .iter()
            .map(|b| PreparedAdjacency::new(b, mode))
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedGraph { layers })
    }

    pub fn layer(&self, l: usize) -> &PreparedAdjacency<T> {
        if self.layers.len() == 1 {
            &self.layers[0]
        } else {
            &self.layers[l]
        }
    }

    pub fn num_rows(&self) -> usize {
        self.layers[0].csr.rows()
    }
}

/// Everything backward needs from a training-mode forward pass.
#[derive(Debug)]
pub struct ForwardCache<T> {
    /// Input to each layer (after the previous layer's dropout).
    pub inputs: Vec<DenseMatrix<T>>,
    /// Aggregated neighbor features per sage layer.
    pub aggregated: Vec<Option<DenseMatrix<T>>>,
    /// Activated output of each layer, before dropout.
    pub outputs: Vec<DenseMatrix<T>>,
    /// Inverted-scaling dropout masks applied after each interior layer.
    pub dropout_masks: Vec<Option<Vec<T>>>,
}

fn layer_tensors<'p, T: Scalar>(
    params: &'p ParamSet<T>,
    l: usize,
    kind: LayerKind,
    bias: bool,
) -> Result<(Vec<&'p Tensor<T>>, Option<&'p Tensor<T>>)> {
    let missing = |name: String| Error::Transfer {
        mismatches: vec![format!("missing tensor {name}")],
    };
    let weights = match kind {
        LayerKind::Gcn => {
            let name = format!("layers.{l}.weight");
            vec![params.get(&name).ok_or_else(|| missing(name))?]
        }
        LayerKind::Sage => {
            let root = format!("layers.{l}.w_root");
            let neigh = format!("layers.{l}.w_neigh");
            vec![
                params.get(&root).ok_or_else(|| missing(root))?,
                params.get(&neigh).ok_or_else(|| missing(neigh))?,
            ]
        }
    };
    let b = if bias {
        let name = format!("layers.{l}.bias");
        Some(params.get(&name).ok_or_else(|| missing(name))?)
    } else {
        None
    };
    Ok((weights, b))
}

struct LayerEval<T> {
    output: DenseMatrix<T>,
    aggregated: Option<DenseMatrix<T>>,
}

fn eval_layer<T: Scalar>(
    config: &ModelConfig,
    params: &ParamSet<T>,
    l: usize,
    x: &DenseMatrix<T>,
    adj: Option<&PreparedGraph<T>>,
) -> Result<LayerEval<T>> {
    let spec = &config.layers[l];
    let (weights, bias) = layer_tensors(params, l, spec.kind, spec.bias)?;

    let mut aggregated = None;
    let mut pre = match (spec.kind, config.peer) {
        (LayerKind::Gcn, true) => dense_matmul(x, weights[0].as_matrix())?,
        (LayerKind::Gcn, false) => {
            let adj = adj.ok_or_else(|| Error::shape("forward", "gcn layer needs an adjacency"))?;
            let z = dense_matmul(x, weights[0].as_matrix())?;
            spmm(&adj.layer(l).csr, &z)?
        }
        (LayerKind::Sage, true) => {
            let mut s = dense_matmul(x, weights[0].as_matrix())?;
            s.add_assign_from(&dense_matmul(x, weights[1].as_matrix())?);
            s
        }
        (LayerKind::Sage, false) => {
            let adj = adj.ok_or_else(|| Error::shape("forward", "sage layer needs an adjacency"))?;
            let agg = spec.aggregator.as_ref().expect("validated sage layer");
            let m = aggregate(agg, &adj.layer(l).csr, x)?;
            let mut s = dense_matmul(x, weights[0].as_matrix())?;
            s.add_assign_from(&dense_matmul(&m, weights[1].as_matrix())?);
            aggregated = Some(m);
            s
        }
    };
    if let Some(b) = bias {
        pre.add_bias(b.as_vector());
    }
    if spec.skip {
        pre.add_assign_from(x);
    }
    let output = match spec.activation {
        Activation::Relu => pre.map(|v| if v > T::zero() { v } else { T::zero() }),
        Activation::None => pre,
    };
    if !output.is_finite() {
        return Err(Error::Numeric {
            layer: l,
            what: "layer output".into(),
        });
    }
    Ok(LayerEval { output, aggregated })
}

fn run<T: Scalar>(
    config: &ModelConfig,
    params: &ParamSet<T>,
    features: &DenseMatrix<T>,
    adj: Option<&PreparedGraph<T>>,
    mut dropout_rng: Option<&mut Rng>,
) -> Result<(DenseMatrix<T>, Option<ForwardCache<T>>)> {
    let depth = config.depth();
    let keep_cache = dropout_rng.is_some();
    let mut cache = keep_cache.then(|| ForwardCache {
        inputs: Vec::with_capacity(depth),
        aggregated: Vec::with_capacity(depth),
        outputs: Vec::with_capacity(depth),
        dropout_masks: Vec::with_capacity(depth),
    });

    let mut x = features.clone();
    for l in 0..depth {
        let LayerEval { output, aggregated } = eval_layer(config, params, l, &x, adj)?;

        let mut mask: Option<Vec<T>> = None;
        let next = if l + 1 < depth {
            if let Some(rng) = dropout_rng.as_deref_mut() {
                if config.dropout > 0.0 {
                    let keep = 1.0 - config.dropout;
                    let scale = T::from_f64(1.0 / keep);
                    let m: Vec<T> = (0..output.data().len())
                        .map(|_| {
                            if rng.random::<f64>() < keep {
                                scale
                            } else {
                                T::zero()
                            }
                        })
                        .collect();
                    let mut dropped = output.clone();
                    for (v, s) in dropped.data_mut().iter_mut().zip(&m) {
                        *v = *v * *s;
                    }
                    mask = Some(m);
                    dropped
                } else {
                    output.clone()
                }
            } else {
                output.clone()
            }
        } else {
            output.clone()
        };

        if let Some(c) = cache.as_mut() {
            c.inputs.push(x);
            c.aggregated.push(aggregated);
            c.outputs.push(output);
            c.dropout_masks.push(mask);
        }
        x = next;
    }
    Ok((x, cache))
}

/// Deterministic inference pass: no dropout, no cache.
pub fn forward_eval<T: Scalar>(
    config: &ModelConfig,
    params: &ParamSet<T>,
    features: &DenseMatrix<T>,
    adj: Option<&PreparedGraph<T>>,
) -> Result<DenseMatrix<T>> {
    Ok(run(config, params, features, adj, None)?.0)
}

/// Training pass: applies dropout between layers and returns the cache
/// consumed by [`super::backward`].
pub fn forward_train<T: Scalar>(
    config: &ModelConfig,
    params: &ParamSet<T>,
    features: &DenseMatrix<T>,
    adj: Option<&PreparedGraph<T>>,
    dropout_rng: &mut Rng,
) -> Result<(DenseMatrix<T>, ForwardCache<T>)> {
    let (out, cache) = run(config, params, features, adj, Some(dropout_rng))?;
    Ok((out, cache.expect("training run keeps its cache")))
}
