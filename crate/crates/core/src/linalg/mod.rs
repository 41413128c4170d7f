//! Dense and CSR-sparse kernels underlying the forward/backward passes.
//!
//! Kernels are pure. Parallel paths (feature `parallel`) partition work by
//! output row with a fixed per-row accumulation order, so results are
//! bit-identical to the sequential fallback at any thread count.

mod dense;
mod sparse;
mod timing;

pub use dense::{dense_matmul, dense_matmul_seq, DenseMatrix};
pub use sparse::{normalize_adjacency, spmm, spmm_seq, AdjacencyMode, CsrMatrix};
pub use timing::{measure_op_times, OpTimingReport};

#[cfg(feature = "parallel")]
pub use dense::dense_matmul_par;
#[cfg(feature = "parallel")]
pub use sparse::spmm_par;
