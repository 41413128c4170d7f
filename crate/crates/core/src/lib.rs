//! Training engine for graph neural networks with MLP weight-transfer
//! initialization.
//!
//! A GNN and the MLP obtained by deleting its neighbor aggregation share one
//! weight space. This crate trains that MLP cheaply, transfers the converged
//! weights into the GNN, fine-tunes, and measures the resulting speedup —
//! plus the analysis instruments (loss landscapes, trajectory projections,
//! weight histograms) used to inspect why it works.

pub mod analysis;
pub mod error;
pub mod eval;
pub mod graph;
pub mod linalg;
pub mod mlpinit;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;
