//! Sparse formats, the row-wise Top-k sparsifier and storage accounting.

mod csr;
mod dense;
pub mod io;
mod memory;
mod postings;
mod topk;

pub use csr::{densify, SparseRowMatrix};
pub use dense::DenseMatrix;
pub use memory::{
    csr_memory_bytes, dense_memory_bytes, dense_to_csr_ratio, memory_gain_condition, MemoryModel,
};
pub use postings::{build_feature_postings, FeaturePostings};
pub use topk::topk_sparsify;
