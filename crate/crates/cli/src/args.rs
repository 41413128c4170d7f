//! Flag definitions and flag-over-config resolution.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use mlpinit_core::graph::{SamplerStrategy, SplitFractions, SyntheticConfig};
use mlpinit_core::linalg::AdjacencyMode;
use mlpinit_core::model::AggregatorKind;
use mlpinit_core::model::LayerKind;
use mlpinit_core::train::{Precision, Task};
use mlpinit_core::{Error, Result};

use crate::config::{load_config_file, RunConfig, SynthRunConfig};

/// GNN training engine with MLP weight-transfer initialization.
///
/// Flags override fields from `--config`; the config file may be a bare
/// run config or a manifest.json emitted by an earlier run. The worker
/// thread count follows the RAYON_NUM_THREADS environment variable.
#[derive(Parser)]
#[command(name = "mlpinit", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic planted-partition dataset.
    Synth(SynthArgs),
    /// Train a single model (GNN or its derived peer MLP).
    Train(TrainArgs),
    /// Two-phase pipeline: train the peer, transfer, fine-tune the GNN.
    Mlpinit(PipelineArgs),
    /// Random-vs-transfer speedup benchmark over seeds.
    Bench(BenchArgs),
    /// Link-prediction pipeline: edge split, training, ranking metrics.
    Linkpred(LinkpredArgs),
    /// Sample a 2D loss-landscape slice around saved parameters.
    Landscape(LandscapeArgs),
    /// Project the two-phase training trajectory to 2D.
    Trajectory(TrajectoryArgs),
    /// Histogram of trained weight magnitudes.
    Hist(HistArgs),
    /// Cartesian sweep over layer count and hidden width.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
pub struct CommonArgs {
    /// JSON config file; explicit flags take precedence over its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset directory (edges.txt, features.bin, labels.txt, splits.json).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for run artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// node_clf or link_pred.
    #[arg(long)]
    pub task: Option<String>,
    /// gcn or sage.
    #[arg(long)]
    pub arch: Option<String>,
    /// Total layer count.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Hidden width.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Output dimension: class count for node_clf (0 = infer), embedding
    /// width for link_pred.
    #[arg(long)]
    pub out_dim: Option<usize>,
    /// mean, max, median, or softmax (sage only).
    #[arg(long)]
    pub aggregator: Option<String>,
    /// Softmax aggregator temperature.
    #[arg(long)]
    pub softmax_t: Option<f64>,
    /// raw, row_mean, or sym_selfloop.
    #[arg(long)]
    pub adjacency: Option<String>,
    /// Residual-add layers where dimensions allow.
    #[arg(long)]
    pub skip: bool,
    /// Fine-tune (GNN-phase) epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Peer-phase epochs for transfer pipelines.
    #[arg(long)]
    pub mlp_epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// 0 trains full-batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eval_every: Option<usize>,
    /// 32 or 64.
    #[arg(long)]
    pub precision: Option<u32>,
    /// full, random_node, or neighbor.
    #[arg(long)]
    pub sampler: Option<String>,
    /// Comma-separated per-layer fanouts for the neighbor sampler.
    #[arg(long)]
    pub fanouts: Option<String>,
    /// Node budget for the random_node sampler.
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Edge-split fractions "train,val,test" for link_pred.
    #[arg(long)]
    pub edge_split: Option<String>,
    #[arg(long)]
    pub neg_per_pos: Option<usize>,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub p_in: Option<f64>,
    #[arg(long)]
    pub p_out: Option<f64>,
    #[arg(long)]
    pub class_sep: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Node-split fractions "train,val,test".
    #[arg(long)]
    pub node_split: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Train the derived peer MLP instead of the GNN.
    #[arg(long)]
    pub peer: bool,
}

#[derive(Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Alias for --epochs: fine-tuning epochs n (0 = deployment mode).
    #[arg(long)]
    pub gnn_epochs: Option<usize>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of paired trials; seeds are 1..=count offset by --seed.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Comparable-performance tolerance.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args)]
pub struct LinkpredArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// random or mlpinit.
    #[arg(long)]
    pub init: Option<String>,
    /// Comma-separated Hits cutoffs.
    #[arg(long)]
    pub hits_ks: Option<String>,
    /// Rank each positive against its own sampled negatives instead of the
    /// shared pool.
    #[arg(long)]
    pub sampled_hits: Option<usize>,
}

#[derive(Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Saved parameter file (.mlpw) at the slice center.
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub half_range: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub direction_seed: Option<u64>,
    /// Loss offset defining the reported low-loss area.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub gnn_epochs: Option<usize>,
    #[arg(long)]
    pub snapshot_every: Option<usize>,
}

#[derive(Args)]
pub struct HistArgs {
    /// Saved parameter file (.mlpw).
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 41)]
    pub bins: usize,
    #[arg(long, default_value_t = -1.0)]
    pub min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated layer counts.
    #[arg(long, default_value = "2,3,4")]
    pub layers_list: String,
    /// Comma-separated hidden widths.
    #[arg(long, default_value = "32,64")]
    pub hidden_list: String,
    /// random or mlpinit arm per combination.
    #[arg(long)]
    pub init: Option<String>,
}

fn parse_fractions(text: &str, field: &'static str) -> Result<SplitFractions> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config {
            field,
            msg: format!("bad fractions `{text}`: {e}"),
        })?;
    if parts.len() != 3 {
        return Err(Error::Config {
            field,
            msg: format!("need three comma-separated fractions, got `{text}`"),
        });
    }
    Ok(SplitFractions {
        train: parts[0],
        val: parts[1],
        test: parts[2],
    })
}

pub fn parse_list<T: std::str::FromStr>(text: &str, field: &'static str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<T>().map_err(|_| Error::Config {
                field,
                msg: format!("bad list entry `{t}`"),
            })
        })
        .collect()
}

fn parse_task(text: &str) -> Result<Task> {
    match text {
        "node_clf" => Ok(Task::NodeClf),
        "link_pred" => Ok(Task::LinkPred),
        other => Err(Error::Config {
            field: "task",
            msg: format!("unknown task `{other}` (node_clf | link_pred)"),
        }),
    }
}

fn parse_arch(text: &str) -> Result<LayerKind> {
    match text {
        "gcn" => Ok(LayerKind::Gcn),
        "sage" => Ok(LayerKind::Sage),
        other => Err(Error::Config {
            field: "arch",
            msg: format!("unknown arch `{other}` (gcn | sage)"),
        }),
    }
}

fn parse_adjacency(text: &str) -> Result<AdjacencyMode> {
    match text {
        "raw" => Ok(AdjacencyMode::Raw),
        "row_mean" => Ok(AdjacencyMode::RowMean),
        "sym_selfloop" => Ok(AdjacencyMode::SymSelfloop),
        other => Err(Error::Config {
            field: "adjacency",
            msg: format!("unknown mode `{other}` (raw | row_mean | sym_selfloop)"),
        }),
    }
}

fn parse_aggregator(text: &str, t: Option<f64>) -> Result<AggregatorKind> {
    match text {
        "mean" => Ok(AggregatorKind::Mean),
        "max" => Ok(AggregatorKind::Max),
        "median" => Ok(AggregatorKind::Median),
        "softmax" => Ok(AggregatorKind::Softmax { t: t.unwrap_or(1.0) }),
        other => Err(Error::Config {
            field: "aggregator",
            msg: format!("unknown aggregator `{other}` (mean | max | median | softmax)"),
        }),
    }
}

fn parse_precision(bits: u32) -> Result<Precision> {
    match bits {
        32 => Ok(Precision::F32),
        64 => Ok(Precision::F64),
        other => Err(Error::Config {
            field: "precision",
            msg: format!("precision must be 32 or 64, got {other}"),
        }),
    }
}

impl CommonArgs {
    /// Config file (or defaults) overlaid with the explicit flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg: RunConfig = match &self.config {
            Some(path) => load_config_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.data {
            cfg.data = v.clone();
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = &self.task {
            cfg.task = parse_task(v)?;
        }
        if let Some(v) = &self.arch {
            cfg.model.arch = parse_arch(v)?;
        }
        if let Some(v) = self.layers {
            cfg.model.layers = v;
        }
        if let Some(v) = self.hidden {
            cfg.model.hidden = v;
        }
        if let Some(v) = self.out_dim {
            cfg.model.out_dim = v;
        }
        if let Some(v) = &self.aggregator {
            cfg.model.aggregator = parse_aggregator(v, self.softmax_t)?;
        } else if let Some(t) = self.softmax_t {
            cfg.model.aggregator = AggregatorKind::Softmax { t };
        }
        if let Some(v) = &self.adjacency {
            cfg.model.adjacency_mode = Some(parse_adjacency(v)?);
        }
        if self.skip {
            cfg.model.skip = true;
        }
        if let Some(v) = self.epochs {
            cfg.train.epochs = v;
        }
        if let Some(v) = self.mlp_epochs {
            cfg.mlp_epochs = v;
        }
        if let Some(v) = self.lr {
            cfg.train.learning_rate = v;
        }
        if let Some(v) = self.weight_decay {
            cfg.train.weight_decay = v;
        }
        if let Some(v) = self.batch_size {
            cfg.train.batch_size = v;
        }
        if let Some(v) = self.dropout {
            cfg.train.dropout = v;
        }
        if let Some(v) = self.seed {
            cfg.train.seed = v;
        }
        if let Some(v) = self.eval_every {
            cfg.train.eval_every = v;
        }
        if let Some(v) = self.precision {
            cfg.train.precision = parse_precision(v)?;
        }
        match self.sampler.as_deref() {
            Some("full") | None => {}
            Some("random_node") => {
                cfg.sampler = SamplerStrategy::RandomNode {
                    size: self.sample_size.unwrap_or(256),
                };
            }
            Some("neighbor") => {
                let fanouts = match &self.fanouts {
                    Some(text) => parse_list::<usize>(text, "fanouts")?,
                    None => vec![5; cfg.model.layers],
                };
                cfg.sampler = SamplerStrategy::Neighbor { fanouts };
            }
            Some(other) => {
                return Err(Error::Config {
                    field: "sampler",
                    msg: format!("unknown sampler `{other}` (full | random_node | neighbor)"),
                })
            }
        }
        if let Some(v) = &self.edge_split {
            cfg.edge_split = parse_fractions(v, "edge_split")?;
        }
        if let Some(v) = self.neg_per_pos {
            cfg.neg_per_pos = v;
        }
        Ok(cfg)
    }
}

impl SynthArgs {
    pub fn resolve(&self) -> Result<SynthRunConfig> {
        let mut cfg: SynthRunConfig = match &self.config {
            Some(path) => load_config_file(path)?,
            None => SynthRunConfig {
                synth: SyntheticConfig {
                    n: 1000,
                    c: 4,
                    d: 16,
                    p_in: 0.05,
                    p_out: 0.005,
                    class_sep: 0.5,
                    lambda: 1.0,
                    seed: 1,
                },
                node_split: SplitFractions {
                    train: 0.6,
                    val: 0.2,
                    test: 0.2,
                },
                out: PathBuf::from("data"),
            },
        };
        if let Some(v) = self.n {
            cfg.synth.n = v;
        }
        if let Some(v) = self.classes {
            cfg.synth.c = v;
        }
        if let Some(v) = self.dim {
            cfg.synth.d = v;
        }
        if let Some(v) = self.p_in {
            cfg.synth.p_in = v;
        }
        if let Some(v) = self.p_out {
            cfg.synth.p_out = v;
        }
        if let Some(v) = self.class_sep {
            cfg.synth.class_sep = v;
        }
        if let Some(v) = self.lambda {
            cfg.synth.lambda = v;
        }
        if let Some(v) = self.seed {
            cfg.synth.seed = v;
        }
        if let Some(v) = &self.node_split {
            cfg.node_split = parse_fractions(v, "node_split")?;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        Ok(cfg)
    }
}
