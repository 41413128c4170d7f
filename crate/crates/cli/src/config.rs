//! Resolved run configurations and the manifest written beside every run.
//!
//! A manifest embeds the fully resolved config, so re-running a subcommand
//! with `--config manifest.json` reproduces the run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mlpinit_core::graph::{SamplerStrategy, SplitFractions, SyntheticConfig};
use mlpinit_core::linalg::AdjacencyMode;
use mlpinit_core::model::{AggregatorKind, LayerKind, ModelConfig};
use mlpinit_core::train::{Precision, Task, TrainConfig};
use mlpinit_core::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataPaths {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
    pub splits: PathBuf,
}

impl DataPaths {
    pub fn in_dir(dir: &Path) -> Self {
        DataPaths {
            edges: dir.join("edges.txt"),
            features: dir.join("features.bin"),
            labels: dir.join("labels.txt"),
            splits: dir.join("splits.json"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, p) in [
            ("edges", &self.edges),
            ("features", &self.features),
            ("labels", &self.labels),
            ("splits", &self.splits),
        ] {
            if !p.exists() {
                return Err(Error::Config {
                    field: match field {
                        "edges" => "dataset.edges",
                        "features" => "dataset.features",
                        "labels" => "dataset.labels",
                        _ => "dataset.splits",
                    },
                    msg: format!("{} does not exist", p.display()),
                });
            }
        }
        Ok(())
    }
}

/// Architecture description, resolved from flags or config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub arch: LayerKind,
    pub layers: usize,
    pub hidden: usize,
    pub out_dim: usize,
    pub aggregator: AggregatorKind,
    pub adjacency_mode: Option<AdjacencyMode>,
    pub skip: bool,
}

impl ModelSpec {
    pub fn build(&self, in_dim: usize) -> Result<ModelConfig> {
        if self.layers < 1 {
            return Err(Error::Config {
                field: "model.layers",
                msg: "need at least one layer".into(),
            });
        }
        let mut dims = vec![in_dim];
        for _ in 1..self.layers {
            dims.push(self.hidden);
        }
        dims.push(self.out_dim);
        let mut cfg = ModelConfig::layered(
            self.arch,
            &dims,
            match self.arch {
                LayerKind::Sage => Some(self.aggregator.clone()),
                LayerKind::Gcn => None,
            },
            0.0,
        )?;
        if let Some(mode) = self.adjacency_mode {
            cfg.adjacency_mode = mode;
        }
        if self.skip {
            for spec in &mut cfg.layers {
                if spec.in_dim == spec.out_dim {
                    spec.skip = true;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    /// Dataset directory; files use the fixed names from `synth`.
    pub data: PathBuf,
    pub model: ModelSpec,
    pub train: TrainConfig,
    /// Peer-phase epochs (m) for the transfer pipeline.
    pub mlp_epochs: usize,
    pub sampler: SamplerStrategy,
    /// Edge-split fractions and negatives for the link task.
    pub edge_split: SplitFractions,
    pub neg_per_pos: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            task: Task::NodeClf,
            data: PathBuf::from("data"),
            model: ModelSpec {
                arch: LayerKind::Sage,
                layers: 2,
                hidden: 32,
                out_dim: 0,
                aggregator: AggregatorKind::Mean,
                adjacency_mode: None,
                skip: false,
            },
            train: TrainConfig {
                epochs: 50,
                learning_rate: 1e-2,
                weight_decay: 1e-3,
                batch_size: 0,
                dropout: 0.5,
                seed: 1,
                eval_every: 1,
                precision: Precision::F32,
            },
            mlp_epochs: 50,
            sampler: SamplerStrategy::Full,
            edge_split: SplitFractions {
                train: 0.85,
                val: 0.05,
                test: 0.10,
            },
            neg_per_pos: 1,
            out: PathBuf::from("runs/out"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthRunConfig {
    pub synth: SyntheticConfig,
    pub node_split: SplitFractions,
    pub out: PathBuf,
}

/// Manifest written next to every run's artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest<C> {
    pub artifact_version: String,
    pub command: String,
    pub config: C,
}

impl<C: Serialize + for<'de> Deserialize<'de>> Manifest<C> {
    pub fn new(command: &str, config: C) -> Self {
        Manifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: command.to_string(),
            config,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let body = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("manifest.json"), body)?;
        Ok(())
    }
}

/// Load a config file that is either a bare config or a manifest wrapper.
pub fn load_config_file<C: for<'de> Deserialize<'de>>(path: &Path) -> Result<C> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let body = match value.get("config") {
        Some(inner) if value.get("artifact_version").is_some() => inner.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(body)?)
}
