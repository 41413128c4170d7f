//! Seeded training loop with validation-based model selection.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval;
use crate::graph::{sample_subgraph, EdgeSplit, Graph, SamplerStrategy};
use crate::linalg::DenseMatrix;
use crate::model::{backward, forward_eval, forward_train, ModelConfig, ParamSet, PreparedGraph};
use crate::rng::{self, RngExt};
use crate::scalar::Scalar;
use crate::train::adam::{adam_step, OptimizerState};
use crate::train::loss::{bce_with_logits, cross_entropy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    #[serde(rename = "32")]
    F32,
    #[serde(rename = "64")]
    F64,
}

/// Optimizer settings for one training phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// 0 trains full-batch.
    pub batch_size: usize,
    /// Dropout for the run; overrides the model config's value.
    pub dropout: f64,
    pub seed: u64,
    /// Epochs between evaluations.
    pub eval_every: usize,
    pub precision: Precision,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            learning_rate: 1e-2,
            weight_decay: 0.0,
            batch_size: 0,
            dropout: 0.0,
            seed: 0,
            eval_every: 1,
            precision: Precision::F32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::config("learning_rate", "must be positive"));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::config("weight_decay", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config("dropout", "must be in [0,1)"));
        }
        if self.eval_every == 0 {
            return Err(Error::config("eval_every", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    NodeClf,
    LinkPred,
}

/// Task plus the data it needs beyond the graph itself.
pub enum TaskData<'a, T> {
    NodeClf,
    LinkPred(&'a EdgeSplit<T>),
}

impl<T> TaskData<'_, T> {
    pub fn task(&self) -> Task {
        match self {
            TaskData::NodeClf => Task::NodeClf,
            TaskData::LinkPred(_) => Task::LinkPred,
        }
    }
}

/// One evaluation row. `train_loss` is measured in eval mode (no dropout).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_metric: f64,
    pub test_metric: f64,
    pub wall_ms: f64,
}

#[derive(Debug)]
pub struct TrainResult<T> {
    pub history: Vec<EpochRecord>,
    /// Parameters at the highest validation metric (earliest epoch on ties).
    pub best_params: ParamSet<T>,
    pub best_epoch: usize,
    pub best_val: f64,
    /// Test metric at the best-validation epoch.
    pub best_val_test: f64,
    pub final_params: ParamSet<T>,
    /// (epoch, params) snapshots when requested; epoch 0 is the init.
    pub snapshots: Vec<(usize, ParamSet<T>)>,
}

/// `{:.6e}`-free decimal with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Render history in the curve-table format.
pub fn history_table(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_metric,test_metric,wall_ms\n");
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch,
            format_sig6(r.train_loss),
            format_sig6(r.val_metric),
            format_sig6(r.test_metric),
            format_sig6(r.wall_ms),
        ));
    }
    out
}

struct LinkEvalSets {
    train_pos: Vec<(usize, usize)>,
    train_neg: Vec<(usize, usize)>,
}

/// Eval-mode measurement of a model on the full data: training loss plus
/// the task's validation/test metrics (accuracy or AUC). Reused by the
/// loss-landscape instrument, which evaluates many perturbed parameter
/// sets against one fixed data view.
pub struct Evaluator<'a, T: Scalar> {
    config: ModelConfig,
    graph: &'a Graph<T>,
    task: &'a TaskData<'a, T>,
    adj: Option<PreparedGraph<T>>,
    link_eval: Option<LinkEvalSets>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    /// `seed` fixes the negative pairs behind the logged link-task loss.
    pub fn new(
        config: &ModelConfig,
        graph: &'a Graph<T>,
        task: &'a TaskData<'a, T>,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let message_adj = match task {
            TaskData::NodeClf => &graph.adjacency,
            TaskData::LinkPred(split) => &split.message_adjacency,
        };
        let adj = if config.peer {
            None
        } else {
            Some(PreparedGraph::full(message_adj, config.adjacency_mode)?)
        };

        // fixed negatives for the logged training loss of the link task
        let link_eval = match task {
            TaskData::NodeClf => None,
            TaskData::LinkPred(split) => {
                let mut r = rng::stream(seed, "train-eval-neg");
                let n = graph.num_nodes();
                let mut neg = Vec::with_capacity(split.train_pos.len());
                while neg.len() < split.train_pos.len() {
                    let u = r.random_range(0..n);
                    let v = r.random_range(0..n);
                    if u != v && !graph.adjacency.has_entry(u.min(v), u.max(v)) {
                        neg.push((u, v));
                    }
                }
                Some(LinkEvalSets {
                    train_pos: split.train_pos.clone(),
                    train_neg: neg,
                })
            }
        };
        Ok(Evaluator {
            config: config.clone(),
            graph,
            task,
            adj,
            link_eval,
        })
    }

    fn pair_scores(out: &DenseMatrix<T>, pairs: &[(usize, usize)]) -> Vec<T> {
        pairs
            .iter()
            .map(|&(i, j)| {
                let (ri, rj) = (out.row(i), out.row(j));
                let mut s = T::zero();
                for (a, b) in ri.iter().zip(rj) {
                    s = s + *a * *b;
                }
                s
            })
            .collect()
    }

    /// Full-data training loss in eval mode (no dropout).
    pub fn train_loss(&self, params: &ParamSet<T>) -> Result<f64> {
        let out = forward_eval(&self.config, params, &self.graph.features, self.adj.as_ref())?;
        self.loss_of(&out)
    }

    fn loss_of(&self, out: &DenseMatrix<T>) -> Result<f64> {
        match self.task {
            TaskData::NodeClf => {
                let (loss, _) = cross_entropy(out, &self.graph.labels, &self.graph.splits.train)?;
                Ok(loss)
            }
            TaskData::LinkPred(_) => {
                let sets = self.link_eval.as_ref().expect("link task has eval sets");
                let mut all = Self::pair_scores(out, &sets.train_pos);
                let pos_len = all.len();
                all.extend(Self::pair_scores(out, &sets.train_neg));
                let targets: Vec<u8> = (0..all.len()).map(|k| u8::from(k < pos_len)).collect();
                let (loss, _) = bce_with_logits(&all, &targets)?;
                Ok(loss)
            }
        }
    }

    /// (train_loss, val_metric, test_metric) in eval mode.
    pub fn metrics(&self, params: &ParamSet<T>) -> Result<(f64, f64, f64)> {
        let out = forward_eval(&self.config, params, &self.graph.features, self.adj.as_ref())?;
        let loss = self.loss_of(&out)?;
        match self.task {
            TaskData::NodeClf => {
                let s = &self.graph.splits;
                let val = eval::accuracy(&out, &self.graph.labels, &s.val)?;
                let test = eval::accuracy(&out, &self.graph.labels, &s.test)?;
                Ok((loss, val, test))
            }
            TaskData::LinkPred(split) => {
                let to64 = |v: Vec<T>| v.into_iter().map(|s| s.as_f64()).collect::<Vec<_>>();
                let val = eval::auc(
                    &to64(Self::pair_scores(&out, &split.val_pos)),
                    &to64(Self::pair_scores(&out, &split.val_neg)),
                )?;
                let test = eval::auc(
                    &to64(Self::pair_scores(&out, &split.test_pos)),
                    &to64(Self::pair_scores(&out, &split.test_neg)),
                )?;
                Ok((loss, val, test))
            }
        }
    }
}

/// Shared state for one training run.
struct Loop<'a, T: Scalar> {
    config: ModelConfig,
    graph: &'a Graph<T>,
    task: &'a TaskData<'a, T>,
    tcfg: &'a TrainConfig,
    adj: Option<PreparedGraph<T>>,
    ev: Evaluator<'a, T>,
}

impl<'a, T: Scalar> Loop<'a, T> {
    fn new(
        config: &ModelConfig,
        graph: &'a Graph<T>,
        task: &'a TaskData<'a, T>,
        tcfg: &'a TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        tcfg.validate()?;
        let mut effective = config.clone();
        effective.dropout = tcfg.dropout;
        let ev = Evaluator::new(&effective, graph, task, tcfg.seed)?;
        let adj = ev.adj.clone();
        Ok(Loop {
            config: effective,
            graph,
            task,
            tcfg,
            adj,
            ev,
        })
    }

    /// Eval-mode metrics on the full data.
    fn evaluate(&self, params: &ParamSet<T>) -> Result<(f64, f64, f64)> {
        self.ev.metrics(params)
    }

    /// One optimization epoch; returns the number of batches run.
    fn train_epoch(
        &self,
        epoch: usize,
        params: &mut ParamSet<T>,
        opt: &mut OptimizerState,
        sampler: &SamplerStrategy,
    ) -> Result<()> {
        let seed = self.tcfg.seed;
        let mut order_rng = rng::stream(seed, &format!("order/{epoch}"));
        let mut sampler_rng = rng::stream(seed, &format!("sampler/{epoch}"));
        let mut dropout_rng = rng::stream(seed, &format!("dropout/{epoch}"));
        let mut neg_rng = rng::stream(seed, &format!("link-neg/{epoch}"));

        match self.task {
            TaskData::NodeClf => {
                let train = &self.graph.splits.train;
                if train.is_empty() {
                    return Err(Error::EmptyMask);
                }
                let full_batch = self.tcfg.batch_size == 0 || self.tcfg.batch_size >= train.len();
                if full_batch {
                    let (out, cache) = forward_train(
                        &self.config,
                        params,
                        &self.graph.features,
                        self.adj.as_ref(),
                        &mut dropout_rng,
                    )?;
                    let (loss, grad) = cross_entropy(&out, &self.graph.labels, train)?;
                    if !loss.is_finite() {
                        return Err(Error::Divergence { epoch });
                    }
                    let (grads, _) =
                        backward(&self.config, params, self.adj.as_ref(), &cache, &grad, false)?;
                    adam_step(params, &grads, opt, self.tcfg.learning_rate, self.tcfg.weight_decay)?;
                } else {
                    let mut order = train.clone();
                    rng::shuffle(&mut order_rng, &mut order);
                    for chunk in order.chunks(self.tcfg.batch_size) {
                        if self.config.peer {
                            // peer training touches features only
                            let x = self.graph.features.gather_rows(chunk);
                            let labels: Vec<usize> =
                                chunk.iter().map(|&g| self.graph.labels[g]).collect();
                            let mask: Vec<usize> = (0..chunk.len()).collect();
                            let (out, cache) =
                                forward_train(&self.config, params, &x, None, &mut dropout_rng)?;
                            let (loss, grad) = cross_entropy(&out, &labels, &mask)?;
                            if !loss.is_finite() {
                                return Err(Error::Divergence { epoch });
                            }
                            let (grads, _) =
                                backward(&self.config, params, None, &cache, &grad, false)?;
                            adam_step(
                                params,
                                &grads,
                                opt,
                                self.tcfg.learning_rate,
                                self.tcfg.weight_decay,
                            )?;
                        } else {
                            let batch =
                                sample_subgraph(self.graph, chunk, sampler, &mut sampler_rng)?;
                            if let SamplerStrategy::Neighbor { fanouts } = sampler {
                                if fanouts.len() != self.config.depth() {
                                    return Err(Error::config(
                                        "fanouts",
                                        format!(
                                            "{} fanouts for {} layers",
                                            fanouts.len(),
                                            self.config.depth()
                                        ),
                                    ));
                                }
                            }
                            let prepared =
                                PreparedGraph::from_batch(&batch, self.config.adjacency_mode)?;
                            let labels: Vec<usize> = batch
                                .local_to_global
                                .iter()
                                .map(|&g| self.graph.labels[g])
                                .collect();
                            let (out, cache) = forward_train(
                                &self.config,
                                params,
                                &batch.features,
                                Some(&prepared),
                                &mut dropout_rng,
                            )?;
                            let (loss, grad) = cross_entropy(&out, &labels, &batch.targets)?;
                            if !loss.is_finite() {
                                return Err(Error::Divergence { epoch });
                            }
                            let (grads, _) = backward(
                                &self.config,
                                params,
                                Some(&prepared),
                                &cache,
                                &grad,
                                false,
                            )?;
                            adam_step(
                                params,
                                &grads,
                                opt,
                                self.tcfg.learning_rate,
                                self.tcfg.weight_decay,
                            )?;
                        }
                    }
                }
            }
            TaskData::LinkPred(split) => {
                let mut pos = split.train_pos.clone();
                if pos.is_empty() {
                    return Err(Error::EmptyMask);
                }
                let batch = if self.tcfg.batch_size == 0 {
                    pos.len()
                } else {
                    self.tcfg.batch_size
                };
                rng::shuffle(&mut order_rng, &mut pos);
                let n = self.graph.num_nodes();
                for chunk in pos.chunks(batch) {
                    let (out, cache) = forward_train(
                        &self.config,
                        params,
                        &self.graph.features,
                        self.adj.as_ref(),
                        &mut dropout_rng,
                    )?;
                    // one fresh uniform non-edge negative per positive
                    let mut pairs: Vec<(usize, usize)> = chunk.to_vec();
                    let mut targets: Vec<u8> = vec![1; chunk.len()];
                    while pairs.len() < 2 * chunk.len() {
                        let u = neg_rng.random_range(0..n);
                        let v = neg_rng.random_range(0..n);
                        if u != v && !self.graph.adjacency.has_entry(u.min(v), u.max(v)) {
                            pairs.push((u, v));
                            targets.push(0);
                        }
                    }
                    let scores: Vec<T> = pairs
                        .iter()
                        .map(|&(i, j)| {
                            let (ri, rj) = (out.row(i), out.row(j));
                            let mut s = T::zero();
                            for (a, b) in ri.iter().zip(rj) {
                                s = s + *a * *b;
                            }
                            s
                        })
                        .collect();
                    let (loss, score_grad) = bce_with_logits(&scores, &targets)?;
                    if !loss.is_finite() {
                        return Err(Error::Divergence { epoch });
                    }
                    let mut grad_h = DenseMatrix::zeros(out.rows(), out.cols());
                    for (&(i, j), &g) in pairs.iter().zip(&score_grad) {
                        for f in 0..out.cols() {
                            grad_h.set(i, f, grad_h.get(i, f) + g * out.get(j, f));
                            grad_h.set(j, f, grad_h.get(j, f) + g * out.get(i, f));
                        }
                    }
                    let (grads, _) =
                        backward(&self.config, params, self.adj.as_ref(), &cache, &grad_h, false)?;
                    adam_step(params, &grads, opt, self.tcfg.learning_rate, self.tcfg.weight_decay)?;
                }
            }
        }
        Ok(())
    }
}

/// Train `config` from `init`, recording one [`EpochRecord`] per evaluation
/// (including epoch 0 when training at all).
pub fn train_model<T: Scalar>(
    config: &ModelConfig,
    graph: &Graph<T>,
    task: &TaskData<T>,
    tcfg: &TrainConfig,
    init: ParamSet<T>,
    sampler: &SamplerStrategy,
) -> Result<TrainResult<T>> {
    train_model_with_snapshots(config, graph, task, tcfg, init, sampler, 0)
}

/// As [`train_model`], also snapshotting the parameters every
/// `snapshot_every` epochs (0 disables; epoch 0 is always included when on).
pub fn train_model_with_snapshots<T: Scalar>(
    config: &ModelConfig,
    graph: &Graph<T>,
    task: &TaskData<T>,
    tcfg: &TrainConfig,
    init: ParamSet<T>,
    sampler: &SamplerStrategy,
    snapshot_every: usize,
) -> Result<TrainResult<T>> {
    let expected = config.param_shapes();
    if init.shape_sig() != expected {
        return Err(Error::Transfer {
            mismatches: vec!["init parameters do not match the model contract".into()],
        });
    }
    let state = Loop::new(config, graph, task, tcfg)?;

    let mut params = init.clone();
    let mut opt = OptimizerState::new(&params);
    let mut history = Vec::new();
    let mut snapshots = Vec::new();
    let mut best: Option<(usize, f64, f64, ParamSet<T>)>;

    if tcfg.epochs == 0 {
        return Ok(TrainResult {
            history,
            best_params: init.clone(),
            best_epoch: 0,
            best_val: f64::NAN,
            best_val_test: f64::NAN,
            final_params: init,
            snapshots,
        });
    }

    if snapshot_every > 0 {
        snapshots.push((0, params.clone()));
    }
    let (loss0, val0, test0) = state.evaluate(&params)?;
    history.push(EpochRecord {
        epoch: 0,
        train_loss: loss0,
        val_metric: val0,
        test_metric: test0,
        wall_ms: 0.0,
    });
    best = Some((0, val0, test0, params.clone()));

    for epoch in 1..=tcfg.epochs {
        let t0 = Instant::now();
        state.train_epoch(epoch, &mut params, &mut opt, sampler)?;
        let wall_ms = t0.elapsed().as_secs_f64() * 1e3;

        if epoch % tcfg.eval_every == 0 || epoch == tcfg.epochs {
            let (loss, val, test) = state.evaluate(&params)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            history.push(EpochRecord {
                epoch,
                train_loss: loss,
                val_metric: val,
                test_metric: test,
                wall_ms,
            });
            let better = match &best {
                Some((_, bv, _, _)) => val > *bv,
                None => true,
            };
            if better {
                best = Some((epoch, val, test, params.clone()));
            }
        }
        if snapshot_every > 0 && epoch % snapshot_every == 0 {
            snapshots.push((epoch, params.clone()));
        }
    }

    let (best_epoch, best_val, best_val_test, best_params) = best.expect("evaluated at least once");
    Ok(TrainResult {
        history,
        best_params,
        best_epoch,
        best_val,
        best_val_test,
        final_params: params,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, split_nodes, SplitFractions, SyntheticConfig};
    use crate::model::{init_params, AggregatorKind, InitScheme, LayerKind};

    fn small_graph(seed: u64) -> Graph<f64> {
        let mut g: Graph<f64> = generate_synthetic(&SyntheticConfig {
            n: 20,
            c: 2,
            d: 4,
            p_in: 0.6,
            p_out: 0.05,
            class_sep: 1.5,
            lambda: 1.0,
            seed,
        })
        .unwrap();
        g.splits = split_nodes(&g, SplitFractions { train: 0.6, val: 0.2, test: 0.2 }, seed).unwrap();
        g
    }

    #[test]
    fn zero_epochs_returns_init_and_empty_history() {
        let g = small_graph(1);
        let cfg = ModelConfig::layered(LayerKind::Gcn, &[4, 8, 2], None, 0.0).unwrap();
        let init: ParamSet<f64> = init_params(&cfg, 3, InitScheme::GlorotUniform);
        let tcfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let r = train_model(&cfg, &g, &TaskData::NodeClf, &tcfg, init.clone(), &SamplerStrategy::Full)
            .unwrap();
        assert!(r.history.is_empty());
        assert_eq!(r.best_params, init);
    }

    #[test]
    fn overfits_separable_planted_partition() {
        let g = small_graph(2);
        let cfg = ModelConfig::layered(LayerKind::Sage, &[4, 16, 2], Some(AggregatorKind::Mean), 0.0)
            .unwrap();
        let init: ParamSet<f64> = init_params(&cfg, 5, InitScheme::GlorotUniform);
        let tcfg = TrainConfig {
            epochs: 200,
            learning_rate: 1e-2,
            eval_every: 50,
            ..TrainConfig::default()
        };
        let r = train_model(&cfg, &g, &TaskData::NodeClf, &tcfg, init, &SamplerStrategy::Full).unwrap();
        let out = forward_eval(
            &cfg,
            &r.final_params,
            &g.features,
            Some(&PreparedGraph::full(&g.adjacency, cfg.adjacency_mode).unwrap()),
        )
        .unwrap();
        let train_acc = eval::accuracy(&out, &g.labels, &g.splits.train).unwrap();
        assert!(train_acc >= 0.95, "train accuracy {train_acc}");
    }

    #[test]
    fn identical_seeds_identical_history() {
        let g = small_graph(3);
        let cfg = ModelConfig::layered(LayerKind::Gcn, &[4, 8, 2], None, 0.2).unwrap();
        let init: ParamSet<f64> = init_params(&cfg, 7, InitScheme::GlorotUniform);
        let tcfg = TrainConfig {
            epochs: 5,
            dropout: 0.2,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let sampler = SamplerStrategy::Neighbor { fanouts: vec![3, 3] };
        let r1 = train_model(&cfg, &g, &TaskData::NodeClf, &tcfg, init.clone(), &sampler).unwrap();
        let r2 = train_model(&cfg, &g, &TaskData::NodeClf, &tcfg, init, &sampler).unwrap();
        let strip = |h: &[EpochRecord]| {
            h.iter()
                .map(|r| (r.epoch, r.train_loss, r.val_metric, r.test_metric))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&r1.history), strip(&r2.history));
        assert_eq!(r1.final_params, r2.final_params);
    }

    #[test]
    fn best_val_is_max_over_history() {
        let g = small_graph(4);
        let cfg = ModelConfig::layered(LayerKind::Gcn, &[4, 8, 2], None, 0.0).unwrap();
        let init: ParamSet<f64> = init_params(&cfg, 9, InitScheme::GlorotUniform);
        let tcfg = TrainConfig { epochs: 30, ..TrainConfig::default() };
        let r = train_model(&cfg, &g, &TaskData::NodeClf, &tcfg, init, &SamplerStrategy::Full).unwrap();
        let max_val = r.history.iter().map(|e| e.val_metric).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_val, max_val);
        // earliest epoch wins ties
        let first_max = r.history.iter().find(|e| e.val_metric == max_val).unwrap().epoch;
        assert_eq!(r.best_epoch, first_max);
    }

    #[test]
    fn mismatched_init_rejected() {
        let g = small_graph(5);
        let cfg = ModelConfig::layered(LayerKind::Gcn, &[4, 8, 2], None, 0.0).unwrap();
        let other = ModelConfig::layered(LayerKind::Gcn, &[4, 9, 2], None, 0.0).unwrap();
        let init: ParamSet<f64> = init_params(&other, 3, InitScheme::GlorotUniform);
        let r = train_model(
            &cfg,
            &g,
            &TaskData::NodeClf,
            &TrainConfig::default(),
            init,
            &SamplerStrategy::Full,
        );
        assert!(matches!(r, Err(Error::Transfer { .. })));
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.853), "0.853000");
        assert_eq!(format_sig6(1234.56), "1234.56");
        assert_eq!(format_sig6(0.0), "0.00000");
        assert_eq!(format_sig6(1.386294), "1.38629");
    }
}
