//! Graph data model, file ingestion, synthetic generation, splitting, and
//! mini-batch subgraph samplers.

mod io;
mod sample;
mod split;
mod synthetic;

pub use io::{load_graph, write_graph};
pub use sample::{sample_subgraph, SamplerStrategy, SubgraphBatch};
pub use split::{split_edges, split_nodes, EdgeSplit, SplitFractions};
pub use synthetic::{generate_synthetic, mix_features, SyntheticConfig};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::scalar::Scalar;

/// Node index sets for train / validation / test.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for (name, set) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            for &i in set {
                if i >= n {
                    return Err(Error::Range(format!("{name} split index {i} >= {n}")));
                }
                if seen[i] {
                    return Err(Error::Consistency(format!(
                        "node {i} appears in more than one split"
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

/// Attributed graph: features X, symmetric adjacency A, labels Y, splits.
#[derive(Debug, Clone)]
pub struct Graph<T> {
    pub features: DenseMatrix<T>,
    pub adjacency: CsrMatrix<T>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub splits: Splits,
}

impl<T: Scalar> Graph<T> {
    pub fn new(
        features: DenseMatrix<T>,
        adjacency: CsrMatrix<T>,
        labels: Vec<usize>,
        num_classes: usize,
        splits: Splits,
    ) -> Result<Self> {
        let n = features.rows();
        if adjacency.rows() != n || adjacency.cols() != n {
            return Err(Error::Consistency(format!(
                "adjacency {}x{} does not match {n} feature rows",
                adjacency.rows(),
                adjacency.cols()
            )));
        }
        if labels.len() != n {
            return Err(Error::Consistency(format!(
                "{} labels for {n} nodes",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::Range(format!(
                "label {bad} >= class count {num_classes}"
            )));
        }
        for i in 0..n {
            for &j in adjacency.row_indices(i) {
                if !adjacency.has_entry(j, i) {
                    return Err(Error::Consistency(format!(
                        "adjacency not symmetric: ({i},{j}) present, ({j},{i}) missing"
                    )));
                }
            }
        }
        splits.validate(n)?;
        Ok(Graph {
            features,
            adjacency,
            labels,
            num_classes,
            splits,
        })
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    #[inline]
    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// Undirected edge list with i < j.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.adjacency.nnz() / 2);
        for i in 0..self.num_nodes() {
            for &j in self.adjacency.row_indices(i) {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn cast<U: Scalar>(&self) -> Graph<U> {
        Graph {
            features: self.features.cast(),
            adjacency: self.adjacency.cast(),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            splits: self.splits.clone(),
        }
    }
}

/// Symmetrize + dedup an edge list into a canonical CSR with unit weights.
pub(crate) fn adjacency_from_edges<T: Scalar>(
    n: usize,
    edges: &[(usize, usize)],
) -> Result<CsrMatrix<T>> {
    let mut entries = Vec::with_capacity(edges.len() * 2);
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::Range(format!("edge ({u},{v}) with {n} nodes")));
        }
        if u == v {
            continue; // self loops dropped; normalization re-adds them when asked
        }
        entries.push((u, v, T::one()));
        entries.push((v, u, T::one()));
    }
    CsrMatrix::from_entries(n, n, entries)
}
