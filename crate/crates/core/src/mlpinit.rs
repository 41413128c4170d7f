//! The two-phase weight-transfer protocol and its speedup benchmark.
//!
//! Phase one trains the aggregation-free peer of a GNN on node features
//! alone; phase two moves the converged weights into the GNN and
//! fine-tunes. The benchmark measures how many fine-tuning epochs the
//! transferred model needs to match what random initialization achieves.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, SamplerStrategy};
use crate::model::{derive_peermlp, init_params, InitScheme, ModelConfig, ParamSet};
use crate::rng;
use crate::scalar::Scalar;
use crate::train::{train_model_with_snapshots, EpochRecord, TaskData, TrainConfig};

/// Copy `source` into the weight space of `target_config`, verifying the
/// full name/shape contract first.
pub fn transfer_weights<T: Scalar>(
    source: &ParamSet<T>,
    target_config: &ModelConfig,
) -> Result<ParamSet<T>> {
    let want = target_config.param_shapes();
    let have = source.shape_sig();
    let mut mismatches = Vec::new();
    let mut wi = want.iter();
    let mut hi = have.iter();
    loop {
        match (wi.next(), hi.next()) {
            (None, None) => break,
            (Some((n, d)), None) => mismatches.push(format!("target expects {n} {d:?}, source ends")),
            (None, Some((n, d))) => mismatches.push(format!("source has extra {n} {d:?}")),
            (Some((wn, wd)), Some((hn, hd))) => {
                if wn != hn || wd != hd {
                    mismatches.push(format!("target {wn} {wd:?} vs source {hn} {hd:?}"));
                }
            }
        }
    }
    if !mismatches.is_empty() {
        return Err(Error::Transfer { mismatches });
    }
    Ok(source.clone())
}

/// Output of one run of the two-phase pipeline.
#[derive(Debug)]
pub struct MlpInitResult<T> {
    pub mlp_history: Vec<EpochRecord>,
    /// Fine-tuning history; its epoch-0 row is the evaluation right after
    /// the transfer.
    pub gnn_history: Vec<EpochRecord>,
    pub params_at_transfer: ParamSet<T>,
    pub best_params: ParamSet<T>,
    pub best_val: f64,
    pub best_val_test: f64,
    pub mlp_snapshots: Vec<(usize, ParamSet<T>)>,
    pub gnn_snapshots: Vec<(usize, ParamSet<T>)>,
}

/// Train the peer for `mlp_tcfg.epochs`, transfer its validation-best
/// weights, then fine-tune the GNN for `gnn_tcfg.epochs`.
///
/// With zero fine-tuning epochs the transferred model is returned directly
/// (deployment mode); with zero peer epochs this is exactly random-init
/// GNN training.
pub fn run_mlpinit<T: Scalar>(
    gnn_config: &ModelConfig,
    graph: &Graph<T>,
    task: &TaskData<T>,
    mlp_tcfg: &TrainConfig,
    gnn_tcfg: &TrainConfig,
    sampler: &SamplerStrategy,
) -> Result<MlpInitResult<T>> {
    run_mlpinit_with_snapshots(gnn_config, graph, task, mlp_tcfg, gnn_tcfg, sampler, 0)
}

pub fn run_mlpinit_with_snapshots<T: Scalar>(
    gnn_config: &ModelConfig,
    graph: &Graph<T>,
    task: &TaskData<T>,
    mlp_tcfg: &TrainConfig,
    gnn_tcfg: &TrainConfig,
    sampler: &SamplerStrategy,
    snapshot_every: usize,
) -> Result<MlpInitResult<T>> {
    gnn_config.validate()?;
    // both phases start from the same random point the plain GNN run would
    // use, keeping the zero-peer-epochs case an exact control arm
    let init: ParamSet<T> = init_params(gnn_config, gnn_tcfg.seed, InitScheme::GlorotUniform);

    let peer_cfg = derive_peermlp(gnn_config);
    let (mlp_history, peer_best, mlp_snapshots) = if mlp_tcfg.epochs == 0 {
        (Vec::new(), init.clone(), Vec::new())
    } else {
        let r = train_model_with_snapshots(
            &peer_cfg,
            graph,
            task,
            mlp_tcfg,
            init.clone(),
            &SamplerStrategy::Full,
            snapshot_every,
        )?;
        (r.history, r.best_params, r.snapshots)
    };

    let transferred = transfer_weights(&peer_best, gnn_config)?;

    if gnn_tcfg.epochs == 0 {
        return Ok(MlpInitResult {
            mlp_history,
            gnn_history: Vec::new(),
            params_at_transfer: transferred.clone(),
            best_params: transferred,
            best_val: f64::NAN,
            best_val_test: f64::NAN,
            mlp_snapshots,
            gnn_snapshots: Vec::new(),
        });
    }

    let r = train_model_with_snapshots(
        gnn_config,
        graph,
        task,
        gnn_tcfg,
        transferred.clone(),
        sampler,
        snapshot_every,
    )?;
    Ok(MlpInitResult {
        mlp_history,
        gnn_history: r.history,
        params_at_transfer: transferred,
        best_params: r.best_params,
        best_val: r.best_val,
        best_val_test: r.best_val_test,
        mlp_snapshots,
        gnn_snapshots: r.snapshots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "epochs")]
pub enum EpochsToTarget {
    Reached(usize),
    NotReached,
}

impl EpochsToTarget {
    pub fn reached(&self) -> Option<usize> {
        match self {
            EpochsToTarget::Reached(e) => Some(*e),
            EpochsToTarget::NotReached => None,
        }
    }
}

/// Smallest evaluated epoch whose running-max test metric reaches
/// `target - epsilon`.
pub fn epochs_to_target(history: &[EpochRecord], target: f64, epsilon: f64) -> EpochsToTarget {
    let mut running_max = f64::NEG_INFINITY;
    for rec in history {
        running_max = running_max.max(rec.test_metric);
        if running_max >= target - epsilon {
            return EpochsToTarget::Reached(rec.epoch);
        }
    }
    EpochsToTarget::NotReached
}

/// A speedup ratio, or the reasons one cannot be formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum SpeedupValue {
    Ratio(f64),
    /// The transferred model met the target before any fine-tuning epoch.
    MetAtTransfer,
    Undefined,
}

impl std::fmt::Display for SpeedupValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpeedupValue::Ratio(r) => write!(f, "{r:.2}x"),
            SpeedupValue::MetAtTransfer | SpeedupValue::Undefined => write!(f, "---"),
        }
    }
}

/// epochs_random / epochs_mlpinit, rounded to two decimals; undefined when
/// the denominator is zero or either count is missing.
pub fn compute_speedup(epochs_random: f64, epochs_mlpinit: f64) -> SpeedupValue {
    if !(epochs_random.is_finite() && epochs_mlpinit.is_finite()) || epochs_mlpinit <= 0.0 {
        return SpeedupValue::Undefined;
    }
    SpeedupValue::Ratio((epochs_random / epochs_mlpinit * 100.0).round() / 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Best test metric of the random arm (validation-selected): the bar
    /// the transferred arm must reach.
    pub target_metric: f64,
    pub epochs_random: EpochsToTarget,
    pub epochs_mlpinit: EpochsToTarget,
    pub best_metric_random: f64,
    pub best_metric_mlpinit: f64,
    pub met_at_transfer: bool,
    pub speedup: SpeedupValue,
    pub mlp_wall_ms: f64,
    pub gnn_wall_ms_random: f64,
    pub gnn_wall_ms_mlpinit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    pub epsilon: f64,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedOutcome>,
    pub mean_epochs_random: Option<f64>,
    pub mean_epochs_mlpinit: Option<f64>,
    /// mean(epochs_random) / mean(epochs_mlpinit).
    pub speedup: SpeedupValue,
    /// Median of the per-seed speedups; met-at-transfer sorts above every
    /// ratio, not-reached below.
    pub median_speedup: SpeedupValue,
    pub mlp_wall_ms_mean: f64,
    pub gnn_wall_ms_random_mean: f64,
    pub gnn_wall_ms_mlpinit_mean: f64,
}

/// Histories behind one benchmark seed, for curve files.
#[derive(Debug, Clone)]
pub struct SeedCurves {
    pub seed: u64,
    pub random: Vec<EpochRecord>,
    pub mlpinit_mlp: Vec<EpochRecord>,
    pub mlpinit_gnn: Vec<EpochRecord>,
}

fn per_seed_speedup(er: EpochsToTarget, em: EpochsToTarget) -> SpeedupValue {
    match (er, em) {
        (EpochsToTarget::Reached(_), EpochsToTarget::Reached(0)) => SpeedupValue::MetAtTransfer,
        (EpochsToTarget::Reached(a), EpochsToTarget::Reached(b)) => {
            compute_speedup(a as f64, b as f64)
        }
        _ => SpeedupValue::Undefined,
    }
}

fn sort_key(v: &SpeedupValue) -> f64 {
    match v {
        SpeedupValue::Undefined => f64::NEG_INFINITY,
        SpeedupValue::Ratio(r) => *r,
        SpeedupValue::MetAtTransfer => f64::INFINITY,
    }
}

/// Median per-seed speedup; recomputable from the outcomes alone.
pub fn median_speedup(outcomes: &[SeedOutcome]) -> SpeedupValue {
    if outcomes.is_empty() {
        return SpeedupValue::Undefined;
    }
    let mut values: Vec<SpeedupValue> = outcomes.iter().map(|o| o.speedup).collect();
    values.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).expect("keys are ordered"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        match (values[n / 2 - 1], values[n / 2]) {
            (SpeedupValue::Ratio(a), SpeedupValue::Ratio(b)) => {
                SpeedupValue::Ratio(((a + b) / 2.0 * 100.0).round() / 100.0)
            }
            // mixed kinds: report the more conservative half
            (lo, _) => lo,
        }
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Assemble the aggregate fields from per-seed rows.
pub fn reduce_report(epsilon: f64, seeds: Vec<u64>, per_seed: Vec<SeedOutcome>) -> SpeedupReport {
    let reached_r: Vec<f64> = per_seed
        .iter()
        .filter_map(|o| o.epochs_random.reached().map(|e| e as f64))
        .collect();
    let reached_m: Vec<f64> = per_seed
        .iter()
        .filter_map(|o| o.epochs_mlpinit.reached().map(|e| e as f64))
        .collect();
    let all_r = reached_r.len() == per_seed.len();
    let all_m = reached_m.len() == per_seed.len();
    let mean_epochs_random = all_r.then(|| mean(&reached_r)).flatten();
    let mean_epochs_mlpinit = all_m.then(|| mean(&reached_m)).flatten();
    let speedup = match (mean_epochs_random, mean_epochs_mlpinit) {
        (Some(a), Some(b)) => compute_speedup(a, b),
        _ => SpeedupValue::Undefined,
    };
    let median = median_speedup(&per_seed);
    let avg = |f: fn(&SeedOutcome) -> f64| {
        per_seed.iter().map(f).sum::<f64>() / per_seed.len().max(1) as f64
    };
    SpeedupReport {
        epsilon,
        seeds,
        mlp_wall_ms_mean: avg(|o| o.mlp_wall_ms),
        gnn_wall_ms_random_mean: avg(|o| o.gnn_wall_ms_random),
        gnn_wall_ms_mlpinit_mean: avg(|o| o.gnn_wall_ms_mlpinit),
        per_seed,
        mean_epochs_random,
        mean_epochs_mlpinit,
        speedup,
        median_speedup: median,
    }
}

fn wall_total(history: &[EpochRecord]) -> f64 {
    history.iter().map(|r| r.wall_ms).sum()
}

fn bench_one_seed<T: Scalar>(
    gnn_config: &ModelConfig,
    graph: &Graph<T>,
    task: &TaskData<T>,
    mlp_tcfg: &TrainConfig,
    gnn_tcfg: &TrainConfig,
    sampler: &SamplerStrategy,
    epsilon: f64,
    seed: u64,
) -> Result<(SeedOutcome, SeedCurves)> {
    // random arm
    let tcfg_random = TrainConfig { seed, ..gnn_tcfg.clone() };
    let init: ParamSet<T> = init_params(gnn_config, seed, InitScheme::GlorotUniform);
    let random = crate::train::train_model(gnn_config, graph, task, &tcfg_random, init, sampler)?;
    let target = random.best_val_test;
    let epochs_random = epochs_to_target(&random.history, target, epsilon);

    // transferred arm, sharing the random arm's data-order seed
    let tcfg_mlp = TrainConfig {
        seed: rng::derive_seed(seed, "mlp-phase"),
        ..mlp_tcfg.clone()
    };
    let tcfg_gnn = TrainConfig { seed, ..gnn_tcfg.clone() };
    let ours = run_mlpinit(gnn_config, graph, task, &tcfg_mlp, &tcfg_gnn, sampler)?;
    let epochs_mlpinit = epochs_to_target(&ours.gnn_history, target, epsilon);
    let met_at_transfer = epochs_mlpinit == EpochsToTarget::Reached(0);

    let outcome = SeedOutcome {
        seed,
        target_metric: target,
        epochs_random,
        epochs_mlpinit,
        best_metric_random: target,
        best_metric_mlpinit: ours.best_val_test,
        met_at_transfer,
        speedup: per_seed_speedup(epochs_random, epochs_mlpinit),
        mlp_wall_ms: wall_total(&ours.mlp_history),
        gnn_wall_ms_random: wall_total(&random.history),
        gnn_wall_ms_mlpinit: wall_total(&ours.gnn_history),
    };
    let curves = SeedCurves {
        seed,
        random: random.history,
        mlpinit_mlp: ours.mlp_history,
        mlpinit_gnn: ours.gnn_history,
    };
    Ok((outcome, curves))
}

/// Paired random-vs-transfer trial per seed. Seeds run as independent
/// parallel trials; results are assembled in seed order.
pub fn benchmark<T: Scalar>(
    gnn_config: &ModelConfig,
    graph: &Graph<T>,
    task: &TaskData<T>,
    mlp_tcfg: &TrainConfig,
    gnn_tcfg: &TrainConfig,
    sampler: &SamplerStrategy,
    seeds: &[u64],
    epsilon: f64,
) -> Result<(SpeedupReport, Vec<SeedCurves>)> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "need at least one seed"));
    }
    let run = |&seed: &u64| {
        bench_one_seed(gnn_config, graph, task, mlp_tcfg, gnn_tcfg, sampler, epsilon, seed)
    };
    #[cfg(feature = "parallel")]
    let results: Result<Vec<_>> = {
        // TaskData holds a reference; link-pred splits are Sync via T: Sync
        seeds.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<_>> = seeds.iter().map(run).collect();
    let (outcomes, curves): (Vec<_>, Vec<_>) = results?.into_iter().unzip();
    Ok((reduce_report(epsilon, seeds.to_vec(), outcomes), curves))
}
