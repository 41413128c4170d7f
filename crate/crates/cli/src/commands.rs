//! Subcommand implementations.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mlpinit_core::analysis::{
    filter_normalized_directions, histogram_table, loss_grid, pca_project, trajectory_table,
    weight_histogram, GridSpec, PhaseTrack,
};
use mlpinit_core::eval::{rank_metrics_with, HitsConvention, RankMetrics};
use mlpinit_core::graph::{
    generate_synthetic, load_graph, split_edges, split_nodes, write_graph, EdgeSplit, Graph,
};
use mlpinit_core::mlpinit::{benchmark, run_mlpinit, run_mlpinit_with_snapshots};
use mlpinit_core::model::{
    derive_peermlp, forward_eval, init_params, load_params, save_params, InitScheme, ModelConfig,
    ParamSet, PreparedGraph,
};
use mlpinit_core::rng::derive_seed;
use mlpinit_core::train::{
    history_table, train_model, EpochRecord, Precision, Task, TaskData, TrainConfig,
};
use mlpinit_core::{Error, Result, Scalar};

use crate::args::{
    parse_list, BenchArgs, HistArgs, LandscapeArgs, LinkpredArgs, PipelineArgs, SweepArgs,
    SynthArgs, TrainArgs, TrajectoryArgs,
};
use crate::config::{DataPaths, Manifest, RunConfig};

macro_rules! dispatch {
    ($precision:expr, $f:ident($($arg:expr),*)) => {
        match $precision {
            Precision::F32 => $f::<f32>($($arg),*),
            Precision::F64 => $f::<f64>($($arg),*),
        }
    };
}

fn write_curve(dir: &Path, name: &str, history: &[EpochRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), history_table(history))?;
    Ok(())
}

fn load_data<T: Scalar>(cfg: &RunConfig) -> Result<Graph<T>> {
    let paths = DataPaths::in_dir(&cfg.data);
    paths.validate()?;
    load_graph(&paths.edges, &paths.features, &paths.labels, &paths.splits)
}

/// Resolve the architecture against the dataset: the input width always
/// comes from the features; a zero output width means the class count.
fn build_model<T: Scalar>(cfg: &RunConfig, graph: &Graph<T>) -> Result<ModelConfig> {
    let mut spec = cfg.model.clone();
    if spec.out_dim == 0 {
        spec.out_dim = match cfg.task {
            Task::NodeClf => graph.num_classes,
            Task::LinkPred => 32,
        };
    }
    spec.build(graph.feature_dim())
}

fn edge_split_for<T: Scalar>(cfg: &RunConfig, graph: &Graph<T>) -> Result<EdgeSplit<T>> {
    split_edges(
        graph,
        cfg.edge_split,
        cfg.neg_per_pos,
        derive_seed(cfg.train.seed, "edge-split"),
    )
}

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let mut graph: Graph<f32> = generate_synthetic(&cfg.synth)?;
    graph.splits = split_nodes(&graph, cfg.node_split, derive_seed(cfg.synth.seed, "node-split"))?;
    write_graph(&graph, &cfg.out)?;
    Manifest::new("synth", cfg.clone()).write(&cfg.out)?;
    println!(
        "synth: {} nodes, {} undirected edges, {} classes -> {}",
        graph.num_nodes(),
        graph.adjacency.nnz() / 2,
        graph.num_classes,
        cfg.out.display()
    );
    Ok(())
}

fn train_impl<T: Scalar>(cfg: &RunConfig, peer: bool) -> Result<()> {
    let graph: Graph<T> = load_data(cfg)?;
    let gnn_config = build_model(cfg, &graph)?;
    let config = if peer { derive_peermlp(&gnn_config) } else { gnn_config };
    let init: ParamSet<T> = init_params(&config, cfg.train.seed, InitScheme::GlorotUniform);

    let split;
    let task = match cfg.task {
        Task::NodeClf => TaskData::NodeClf,
        Task::LinkPred => {
            split = edge_split_for(cfg, &graph)?;
            TaskData::LinkPred(&split)
        }
    };
    let result = train_model(&config, &graph, &task, &cfg.train, init, &cfg.sampler)?;

    fs::create_dir_all(&cfg.out)?;
    write_curve(&cfg.out, "run.curve", &result.history)?;
    save_params(&result.best_params, cfg.out.join("best.mlpw"))?;
    save_params(&result.final_params, cfg.out.join("final.mlpw"))?;
    println!(
        "train: best val {:.6} (epoch {}), test at best {:.6}",
        result.best_val, result.best_epoch, result.best_val_test
    );
    Ok(())
}

pub fn run_train(args: &TrainArgs) -> Result<()> {
    let cfg = args.common.resolve()?;
    dispatch!(cfg.train.precision, train_impl(&cfg, args.peer))?;
    Manifest::new("train", cfg.clone()).write(&cfg.out)
}

fn mlpinit_impl<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let graph: Graph<T> = load_data(cfg)?;
    let config = build_model(cfg, &graph)?;
    let split;
    let task = match cfg.task {
        Task::NodeClf => TaskData::NodeClf,
        Task::LinkPred => {
            split = edge_split_for(cfg, &graph)?;
            TaskData::LinkPred(&split)
        }
    };
    let mlp_tcfg = TrainConfig {
        epochs: cfg.mlp_epochs,
        seed: derive_seed(cfg.train.seed, "mlp-phase"),
        ..cfg.train.clone()
    };
    let result = run_mlpinit(&config, &graph, &task, &mlp_tcfg, &cfg.train, &cfg.sampler)?;

    fs::create_dir_all(&cfg.out)?;
    write_curve(&cfg.out, "mlp.curve", &result.mlp_history)?;
    write_curve(&cfg.out, "gnn.curve", &result.gnn_history)?;
    save_params(&result.params_at_transfer, cfg.out.join("transfer.mlpw"))?;
    save_params(&result.best_params, cfg.out.join("best.mlpw"))?;
    if result.gnn_history.is_empty() {
        println!("mlpinit: deployment mode, transferred weights saved as best");
    } else {
        println!(
            "mlpinit: best val {:.6}, test at best {:.6}",
            result.best_val, result.best_val_test
        );
    }
    Ok(())
}

pub fn run_pipeline(args: &PipelineArgs) -> Result<()> {
    let mut cfg = args.common.resolve()?;
    if let Some(n) = args.gnn_epochs {
        cfg.train.epochs = n;
    }
    dispatch!(cfg.train.precision, mlpinit_impl(&cfg))?;
    Manifest::new("mlpinit", cfg.clone()).write(&cfg.out)
}

#[derive(Serialize, Deserialize, Clone)]
struct BenchConfig {
    run: RunConfig,
    seeds: u64,
    epsilon: f64,
}

fn bench_impl<T: Scalar>(cfg: &BenchConfig) -> Result<()> {
    let graph: Graph<T> = load_data(&cfg.run)?;
    let config = build_model(&cfg.run, &graph)?;
    let split;
    let task = match cfg.run.task {
        Task::NodeClf => TaskData::NodeClf,
        Task::LinkPred => {
            split = edge_split_for(&cfg.run, &graph)?;
            TaskData::LinkPred(&split)
        }
    };
    let mlp_tcfg = TrainConfig {
        epochs: cfg.run.mlp_epochs,
        ..cfg.run.train.clone()
    };
    let seeds: Vec<u64> = (0..cfg.seeds).map(|i| cfg.run.train.seed + i).collect();
    let (report, curves) = benchmark(
        &config,
        &graph,
        &task,
        &mlp_tcfg,
        &cfg.run.train,
        &cfg.run.sampler,
        &seeds,
        cfg.epsilon,
    )?;
    fs::create_dir_all(&cfg.run.out)?;
    fs::write(
        cfg.run.out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    for c in &curves {
        write_curve(&cfg.run.out, &format!("random_{}.curve", c.seed), &c.random)?;
        write_curve(&cfg.run.out, &format!("mlpinit_{}.curve", c.seed), &c.mlpinit_gnn)?;
        write_curve(&cfg.run.out, &format!("mlp_{}.curve", c.seed), &c.mlpinit_mlp)?;
    }
    println!(
        "bench: mean speedup {} | median {} | mlp wall {:.1} ms vs gnn wall {:.1} ms",
        report.speedup, report.median_speedup, report.mlp_wall_ms_mean, report.gnn_wall_ms_random_mean
    );
    Ok(())
}

pub fn run_bench(args: &BenchArgs) -> Result<()> {
    let run = args.common.resolve()?;
    let cfg = match &args.common.config {
        Some(path) => {
            let mut loaded: BenchConfig = crate::config::load_config_file(path.as_path())
                .unwrap_or(BenchConfig {
                    run: run.clone(),
                    seeds: 5,
                    epsilon: 0.002,
                });
            loaded.run = run;
            loaded
        }
        None => BenchConfig {
            run,
            seeds: 5,
            epsilon: 0.002,
        },
    };
    let cfg = BenchConfig {
        seeds: args.seeds.unwrap_or(cfg.seeds),
        epsilon: args.epsilon.unwrap_or(cfg.epsilon),
        run: cfg.run,
    };
    dispatch!(cfg.run.train.precision, bench_impl(&cfg))?;
    Manifest::new("bench", cfg.clone()).write(&cfg.run.out)
}

#[derive(Serialize, Deserialize, Clone)]
struct LinkMetricsFile {
    init: String,
    val: RankMetrics,
    test: RankMetrics,
}

fn linkpred_impl<T: Scalar>(cfg: &RunConfig, init_kind: &str, ks: &[usize], sampled: Option<usize>) -> Result<()> {
    let graph: Graph<T> = load_data(cfg)?;
    let config = build_model(cfg, &graph)?;
    let split = edge_split_for(cfg, &graph)?;
    let task = TaskData::LinkPred(&split);

    let best: ParamSet<T> = match init_kind {
        "random" => {
            let init = init_params(&config, cfg.train.seed, InitScheme::GlorotUniform);
            let r = train_model(&config, &graph, &task, &cfg.train, init, &cfg.sampler)?;
            write_curve(&cfg.out, "run.curve", &r.history)?;
            r.best_params
        }
        "mlpinit" => {
            let mlp_tcfg = TrainConfig {
                epochs: cfg.mlp_epochs,
                seed: derive_seed(cfg.train.seed, "mlp-phase"),
                ..cfg.train.clone()
            };
            let r = run_mlpinit(&config, &graph, &task, &mlp_tcfg, &cfg.train, &cfg.sampler)?;
            write_curve(&cfg.out, "mlp.curve", &r.mlp_history)?;
            write_curve(&cfg.out, "run.curve", &r.gnn_history)?;
            r.best_params
        }
        other => {
            return Err(Error::Config {
                field: "init",
                msg: format!("unknown init `{other}` (random | mlpinit)"),
            })
        }
    };

    let adj = PreparedGraph::full(&split.message_adjacency, config.adjacency_mode)?;
    let h = forward_eval(&config, &best, &graph.features, Some(&adj))?;
    let score = |pairs: &[(usize, usize)]| -> Result<Vec<f64>> {
        mlpinit_core::eval::decode_links(&h, pairs)
    };
    let convention = match sampled {
        Some(per_pos) => HitsConvention::SampledPerPositive {
            per_pos,
            seed: derive_seed(cfg.train.seed, "hits-sample"),
        },
        None => HitsConvention::SharedPool,
    };
    let val = rank_metrics_with(&score(&split.val_pos)?, &score(&split.val_neg)?, ks, convention)?;
    let test = rank_metrics_with(&score(&split.test_pos)?, &score(&split.test_neg)?, ks, convention)?;
    println!(
        "linkpred ({init_kind}): test AUC {:.6}, AP {:.6}, Hits@10 {:.6}",
        test.auc,
        test.ap,
        test.hits.get(&10).copied().unwrap_or(f64::NAN)
    );
    let body = LinkMetricsFile {
        init: init_kind.to_string(),
        val,
        test,
    };
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("metrics.json"), serde_json::to_string_pretty(&body)?)?;
    save_params(&best, cfg.out.join("best.mlpw"))?;
    Ok(())
}

pub fn run_linkpred(args: &LinkpredArgs) -> Result<()> {
    let mut cfg = args.common.resolve()?;
    cfg.task = Task::LinkPred;
    let init_kind = args.init.clone().unwrap_or_else(|| "mlpinit".into());
    let ks = match &args.hits_ks {
        Some(text) => parse_list::<usize>(text, "hits_ks")?,
        None => vec![10, 20, 50, 100],
    };
    dispatch!(
        cfg.train.precision,
        linkpred_impl(&cfg, &init_kind, &ks, args.sampled_hits)
    )?;
    Manifest::new("linkpred", cfg.clone()).write(&cfg.out)
}

#[derive(Serialize, Deserialize, Clone)]
struct LandscapeConfig {
    run: RunConfig,
    params: std::path::PathBuf,
    half_range: f64,
    steps: usize,
    direction_seed: u64,
    delta: f64,
}

fn landscape_impl<T: Scalar>(cfg: &LandscapeConfig) -> Result<()> {
    let graph: Graph<T> = load_data(&cfg.run)?;
    let config = build_model(&cfg.run, &graph)?;
    let params: ParamSet<T> = load_params(&cfg.params)?;
    let split;
    let task = match cfg.run.task {
        Task::NodeClf => TaskData::NodeClf,
        Task::LinkPred => {
            split = edge_split_for(&cfg.run, &graph)?;
            TaskData::LinkPred(&split)
        }
    };
    let (d1, d2) = filter_normalized_directions(&params, cfg.direction_seed);
    let grid = loss_grid(
        &config,
        &params,
        &d1,
        &d2,
        &graph,
        &task,
        &GridSpec {
            half_range: cfg.half_range,
            steps: cfg.steps,
        },
        cfg.direction_seed,
    )?;
    fs::create_dir_all(&cfg.run.out)?;
    fs::write(cfg.run.out.join("landscape.csv"), grid.to_table())?;
    println!(
        "landscape: base loss {:.6}, low-loss area (delta {}) = {:.4}",
        grid.base_loss,
        cfg.delta,
        grid.low_loss_area(cfg.delta)
    );
    Ok(())
}

pub fn run_landscape(args: &LandscapeArgs) -> Result<()> {
    let run = args.common.resolve()?;
    let cfg = LandscapeConfig {
        run,
        params: args.params.clone(),
        half_range: args.half_range.unwrap_or(1.0),
        steps: args.steps.unwrap_or(21),
        direction_seed: args.direction_seed.unwrap_or(1),
        delta: args.delta.unwrap_or(0.1),
    };
    dispatch!(cfg.run.train.precision, landscape_impl(&cfg))?;
    Manifest::new("landscape", cfg.clone()).write(&cfg.run.out)
}

#[derive(Serialize, Deserialize, Clone)]
struct TrajectoryConfig {
    run: RunConfig,
    snapshot_every: usize,
}

fn trajectory_impl<T: Scalar>(cfg: &TrajectoryConfig) -> Result<()> {
    let graph: Graph<T> = load_data(&cfg.run)?;
    let config = build_model(&cfg.run, &graph)?;
    let split;
    let task = match cfg.run.task {
        Task::NodeClf => TaskData::NodeClf,
        Task::LinkPred => {
            split = edge_split_for(&cfg.run, &graph)?;
            TaskData::LinkPred(&split)
        }
    };
    let mlp_tcfg = TrainConfig {
        epochs: cfg.run.mlp_epochs,
        seed: derive_seed(cfg.run.train.seed, "mlp-phase"),
        ..cfg.run.train.clone()
    };
    let result = run_mlpinit_with_snapshots(
        &config,
        &graph,
        &task,
        &mlp_tcfg,
        &cfg.run.train,
        &cfg.run.sampler,
        cfg.snapshot_every,
    )?;

    let mut combined = result.mlp_snapshots.clone();
    combined.extend(result.gnn_snapshots.iter().cloned());
    let projected = pca_project(&combined)?;
    let n_mlp = result.mlp_snapshots.len();
    let mlp_track = PhaseTrack {
        epochs: projected.epochs[..n_mlp].to_vec(),
        coords: projected.coords[..n_mlp].to_vec(),
    };
    let gnn_track = PhaseTrack {
        epochs: projected.epochs[n_mlp..].to_vec(),
        coords: projected.coords[n_mlp..].to_vec(),
    };
    fs::create_dir_all(&cfg.run.out)?;
    fs::write(
        cfg.run.out.join("trajectory.csv"),
        trajectory_table(&mlp_track, &gnn_track),
    )?;
    write_curve(&cfg.run.out, "mlp.curve", &result.mlp_history)?;
    write_curve(&cfg.run.out, "gnn.curve", &result.gnn_history)?;
    println!(
        "trajectory: {} snapshots, explained variance {:.4} / {:.4}",
        combined.len(),
        projected.variance_fractions[0],
        projected.variance_fractions[1]
    );
    Ok(())
}

pub fn run_trajectory(args: &TrajectoryArgs) -> Result<()> {
    let mut run = args.common.resolve()?;
    if let Some(n) = args.gnn_epochs {
        run.train.epochs = n;
    }
    let cfg = TrajectoryConfig {
        run,
        snapshot_every: args.snapshot_every.unwrap_or(1),
    };
    dispatch!(cfg.run.train.precision, trajectory_impl(&cfg))?;
    Manifest::new("trajectory", cfg.clone()).write(&cfg.run.out)
}

#[derive(Serialize, Deserialize, Clone)]
struct HistConfig {
    params: std::path::PathBuf,
    bins: usize,
    min: f64,
    max: f64,
    out: std::path::PathBuf,
}

pub fn run_hist(args: &HistArgs) -> Result<()> {
    let cfg = HistConfig {
        params: args.params.clone(),
        bins: args.bins,
        min: args.min,
        max: args.max,
        out: args.out.clone().unwrap_or_else(|| "runs/hist".into()),
    };
    let params: ParamSet<f32> = load_params(&cfg.params)?;
    let hist = weight_histogram(&params, cfg.bins, (cfg.min, cfg.max))?;
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("hist.csv"), histogram_table(&hist))?;
    println!(
        "hist: {} weights over {} bins -> {}",
        hist.iter().map(|(_, _, c)| c).sum::<usize>(),
        cfg.bins,
        cfg.out.display()
    );
    Manifest::new("hist", cfg.clone()).write(&cfg.out)
}

#[derive(Serialize, Deserialize, Clone)]
struct SweepConfig {
    run: RunConfig,
    layers_list: Vec<usize>,
    hidden_list: Vec<usize>,
    init: String,
}

fn sweep_impl<T: Scalar>(cfg: &SweepConfig) -> Result<()> {
    let graph: Graph<T> = load_data(&cfg.run)?;
    let split;
    let task = match cfg.run.task {
        Task::NodeClf => TaskData::NodeClf,
        Task::LinkPred => {
            split = edge_split_for(&cfg.run, &graph)?;
            TaskData::LinkPred(&split)
        }
    };
    fs::create_dir_all(&cfg.run.out)?;
    for &layers in &cfg.layers_list {
        for &hidden in &cfg.hidden_list {
            let mut run = cfg.run.clone();
            run.model.layers = layers;
            run.model.hidden = hidden;
            let config = build_model(&run, &graph)?;
            let history = match cfg.init.as_str() {
                "random" => {
                    let init = init_params(&config, run.train.seed, InitScheme::GlorotUniform);
                    train_model(&config, &graph, &task, &run.train, init, &run.sampler)?.history
                }
                "mlpinit" => {
                    let mlp_tcfg = TrainConfig {
                        epochs: run.mlp_epochs,
                        seed: derive_seed(run.train.seed, "mlp-phase"),
                        ..run.train.clone()
                    };
                    run_mlpinit(&config, &graph, &task, &mlp_tcfg, &run.train, &run.sampler)?
                        .gnn_history
                }
                other => {
                    return Err(Error::Config {
                        field: "init",
                        msg: format!("unknown init `{other}` (random | mlpinit)"),
                    })
                }
            };
            let name = format!("sweep_l{layers}_h{hidden}.curve");
            write_curve(&cfg.run.out, &name, &history)?;
            let last = history.last();
            println!(
                "sweep l={layers} h={hidden}: final test {:.6}",
                last.map_or(f64::NAN, |r| r.test_metric)
            );
        }
    }
    Ok(())
}

pub fn run_sweep(args: &SweepArgs) -> Result<()> {
    let run = args.common.resolve()?;
    let cfg = SweepConfig {
        run,
        layers_list: parse_list(&args.layers_list, "layers_list")?,
        hidden_list: parse_list(&args.hidden_list, "hidden_list")?,
        init: args.init.clone().unwrap_or_else(|| "random".into()),
    };
    dispatch!(cfg.run.train.precision, sweep_impl(&cfg))?;
    Manifest::new("sweep", cfg.clone()).write(&cfg.run.out)
}
