//! Layer specifications, parameter sets, forward/backward passes, and the
//! neighbor aggregators.
//!
//! A GNN layer and the layer obtained by deleting its aggregation take
//! parameters of identical names and shapes, so one `ParamSet` serves both
//! architectures. That shared weight space is what makes the transfer in
//! [`crate::mlpinit`] possible.

mod aggregate;
mod backward;
mod forward;
mod params;

pub use aggregate::{aggregate, aggregate_backward, AggregatorKind};
pub use backward::backward;
pub use forward::{forward_eval, forward_train, ForwardCache, PreparedGraph};
pub use params::{init_params, load_params, save_params, InitScheme, ParamSet, Tensor, TensorValue};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::AdjacencyMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Gcn,
    Sage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    None,
}

/// One layer of a GNN (or of its aggregation-free peer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub bias: bool,
    /// Neighbor aggregator; sage layers only.
    pub aggregator: Option<AggregatorKind>,
    /// Residual add of the layer input; requires in_dim == out_dim.
    pub skip: bool,
}

/// Architecture description shared verbatim between a GNN and its peer MLP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub layers: Vec<LayerSpec>,
    /// Dropout probability applied between layers at train time.
    pub dropout: f64,
    pub adjacency_mode: AdjacencyMode,
    /// True once aggregation has been removed; the forward pass then never
    /// touches an adjacency.
    #[serde(default)]
    pub peer: bool,
}

impl ModelConfig {
    /// Stacked layers of one kind: `dims = [in, hidden.., out]`, ReLU on all
    /// but the last layer, biases on, and the usual adjacency rewrite for
    /// the kind (symmetric self-loop for gcn, row mean for sage).
    pub fn layered(
        kind: LayerKind,
        dims: &[usize],
        aggregator: Option<AggregatorKind>,
        dropout: f64,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::config("dims", "need at least input and output sizes"));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| LayerSpec {
                kind,
                in_dim: w[0],
                out_dim: w[1],
                activation: if l == last { Activation::None } else { Activation::Relu },
                bias: true,
                aggregator: match kind {
                    LayerKind::Sage => Some(aggregator.clone().unwrap_or(AggregatorKind::Mean)),
                    LayerKind::Gcn => None,
                },
                skip: false,
            })
            .collect();
        let cfg = ModelConfig {
            layers,
            dropout,
            adjacency_mode: match kind {
                LayerKind::Gcn => AdjacencyMode::SymSelfloop,
                LayerKind::Sage => AdjacencyMode::RowMean,
            },
            peer: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::config("layers", "no layers"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config("dropout", format!("{} not in [0,1)", self.dropout)));
        }
        for (l, spec) in self.layers.iter().enumerate() {
            if spec.in_dim == 0 || spec.out_dim == 0 {
                return Err(Error::config("layers", format!("layer {l} has a zero dim")));
            }
            if spec.skip && spec.in_dim != spec.out_dim {
                return Err(Error::config(
                    "layers",
                    format!("layer {l} skip needs in_dim == out_dim"),
                ));
            }
            match (spec.kind, &spec.aggregator) {
                (LayerKind::Sage, Some(a)) => a.validate()?,
                (LayerKind::Sage, None) => {
                    return Err(Error::config("layers", format!("sage layer {l} missing aggregator")))
                }
                (LayerKind::Gcn, _) => {}
            }
            if l > 0 && self.layers[l - 1].out_dim != spec.in_dim {
                return Err(Error::config(
                    "layers",
                    format!(
                        "layer {l} in_dim {} != previous out_dim {}",
                        spec.in_dim,
                        self.layers[l - 1].out_dim
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// Parameter contract: ordered (name, dims) pairs. Identical for a
    /// config and its derived peer.
    pub fn param_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        for (l, spec) in self.layers.iter().enumerate() {
            match spec.kind {
                LayerKind::Gcn => {
                    out.push((format!("layers.{l}.weight"), vec![spec.in_dim, spec.out_dim]));
                }
                LayerKind::Sage => {
                    out.push((format!("layers.{l}.w_root"), vec![spec.in_dim, spec.out_dim]));
                    out.push((format!("layers.{l}.w_neigh"), vec![spec.in_dim, spec.out_dim]));
                }
            }
            if spec.bias {
                out.push((format!("layers.{l}.bias"), vec![spec.out_dim]));
            }
        }
        out
    }
}

/// Remove the aggregation: gcn layers become H W (+b), sage layers become
/// H W_root + H W_neigh (+b). Skip, activation, dropout, and the parameter
/// contract are untouched. Idempotent.
pub fn derive_peermlp(config: &ModelConfig) -> ModelConfig {
    ModelConfig {
        peer: true,
        ..config.clone()
    }
}
