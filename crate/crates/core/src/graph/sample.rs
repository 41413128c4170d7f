//! Mini-batch subgraph samplers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::rng::{self, Rng};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SamplerStrategy {
    /// Whole graph, no sampling.
    Full,
    /// Induced subgraph on the batch plus uniform extra nodes up to `size`.
    RandomNode { size: usize },
    /// GraphSAGE-style sampling: at hop h, up to `fanouts[h]` neighbors per
    /// node, uniform without replacement.
    Neighbor { fanouts: Vec<usize> },
}

/// A sampled computation block: local features, per-layer local adjacency,
/// and the local -> global node map.
#[derive(Debug, Clone)]
pub struct SubgraphBatch<T> {
    /// Local indices of the rows the loss should read.
    pub targets: Vec<usize>,
    /// One CSR per model layer, deepest layer first consumed; a single
    /// entry means every layer shares the same block.
    pub blocks: Vec<CsrMatrix<T>>,
    pub features: DenseMatrix<T>,
    pub local_to_global: Vec<usize>,
}

impl<T: Scalar> SubgraphBatch<T> {
    /// Adjacency block feeding model layer `l` (0-based from the input).
    pub fn block(&self, l: usize) -> &CsrMatrix<T> {
        if self.blocks.len() == 1 {
            &self.blocks[0]
        } else {
            &self.blocks[l]
        }
    }
}

fn check_batch<T: Scalar>(graph: &Graph<T>, batch_nodes: &[usize]) -> Result<()> {
    let n = graph.num_nodes();
    if let Some(&bad) = batch_nodes.iter().find(|&&v| v >= n) {
        return Err(Error::Range(format!("batch node {bad} >= {n}")));
    }
    Ok(())
}

fn induced_block<T: Scalar>(graph: &Graph<T>, locals: &[usize]) -> Result<CsrMatrix<T>> {
    let mut index = HashMap::with_capacity(locals.len());
    for (l, &g) in locals.iter().enumerate() {
        index.insert(g, l);
    }
    let mut entries = Vec::new();
    for (lu, &gu) in locals.iter().enumerate() {
        for &gv in graph.adjacency.row_indices(gu) {
            if let Some(&lv) = index.get(&gv) {
                entries.push((lu, lv, T::one()));
            }
        }
    }
    CsrMatrix::from_entries(locals.len(), locals.len(), entries)
}

/// Sample a training block for `batch_nodes` under the given strategy.
pub fn sample_subgraph<T: Scalar>(
    graph: &Graph<T>,
    batch_nodes: &[usize],
    strategy: &SamplerStrategy,
    rng: &mut Rng,
) -> Result<SubgraphBatch<T>> {
    check_batch(graph, batch_nodes)?;
    match strategy {
        SamplerStrategy::Full => Ok(SubgraphBatch {
            targets: batch_nodes.to_vec(),
            blocks: vec![graph.adjacency.clone()],
            features: graph.features.clone(),
            local_to_global: (0..graph.num_nodes()).collect(),
        }),
        SamplerStrategy::RandomNode { size } => {
            let mut locals: Vec<usize> = Vec::new();
            let mut local_of: HashMap<usize, usize> = HashMap::new();
            for &b in batch_nodes {
                local_of.entry(b).or_insert_with(|| {
                    locals.push(b);
                    locals.len() - 1
                });
            }
            if *size > locals.len() {
                let extra = (*size - locals.len()).min(graph.num_nodes() - locals.len());
                let pool: Vec<usize> = (0..graph.num_nodes())
                    .filter(|v| !local_of.contains_key(v))
                    .collect();
                for idx in rng::sample_indices(rng, pool.len(), extra) {
                    locals.push(pool[idx]);
                }
            }
            let targets = batch_nodes.iter().map(|b| local_of[b]).collect();
            let block = induced_block(graph, &locals)?;
            let features = graph.features.gather_rows(&locals);
            Ok(SubgraphBatch {
                targets,
                blocks: vec![block],
                features,
                local_to_global: locals,
            })
        }
        SamplerStrategy::Neighbor { fanouts } => {
            if fanouts.iter().any(|&f| f == 0) {
                return Err(Error::config("fanouts", "fanout of 0 is not allowed"));
            }
            let depth = fanouts.len();
            let mut local_of: HashMap<usize, usize> = HashMap::new();
            let mut locals: Vec<usize> = Vec::new();
            let intern = |g: usize, locals: &mut Vec<usize>, local_of: &mut HashMap<usize, usize>| {
                *local_of.entry(g).or_insert_with(|| {
                    locals.push(g);
                    locals.len() - 1
                })
            };
            let mut frontier: Vec<usize> = Vec::new();
            for &b in batch_nodes {
                if !local_of.contains_key(&b) {
                    intern(b, &mut locals, &mut local_of);
                    frontier.push(b);
                }
            }
            let targets: Vec<usize> = batch_nodes.iter().map(|b| local_of[b]).collect();

            // hop h edges are consumed by model layer depth-1-h
            let mut hop_edges: Vec<Vec<(usize, usize)>> = Vec::with_capacity(depth);
            let mut covered = frontier.clone();
            for &fanout in fanouts {
                let mut edges = Vec::new();
                let mut next_frontier = Vec::new();
                for &gu in &covered {
                    let neigh = graph.adjacency.row_indices(gu);
                    let lu = local_of[&gu];
                    let mut push = |gv: usize| {
                        let known = local_of.contains_key(&gv);
                        let lv = intern(gv, &mut locals, &mut local_of);
                        if !known {
                            next_frontier.push(gv);
                        }
                        edges.push((lu, lv));
                    };
                    if neigh.len() <= fanout {
                        for &gv in neigh {
                            push(gv);
                        }
                    } else {
                        for idx in rng::sample_indices(rng, neigh.len(), fanout) {
                            push(neigh[idx]);
                        }
                    }
                }
                hop_edges.push(edges);
                covered.extend(next_frontier);
            }

            let s = locals.len();
            let mut blocks = Vec::with_capacity(depth);
            // deepest hop feeds the first model layer
            for edges in hop_edges.iter().rev() {
                let entries = edges.iter().map(|&(u, v)| (u, v, T::one())).collect();
                blocks.push(CsrMatrix::from_entries(s, s, entries)?);
            }
            let features = graph.features.gather_rows(&locals);
            Ok(SubgraphBatch {
                targets,
                blocks,
                features,
                local_to_global: locals,
            })
        }
    }
}
