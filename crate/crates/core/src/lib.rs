//! Sparse feature attention.
//!
//! Queries and keys are sparsified to their `k` largest-magnitude features per
//! token; attention scores are then computed only over the features a query
//! and key share. The forward pass tiles the `n x n` score matrix and folds
//! each tile into an online softmax, so no full score matrix is ever stored.

pub mod analysis;
pub mod attention;
pub mod cost;
pub mod error;
pub mod gen;
pub mod grad;
pub mod sparse;

pub use attention::{
    dense_attention_reference, flash_sfa_forward, flash_sfa_forward_batched, naive_sfa_reference,
    AttentionConfig, AttentionInstance, Mask, Precision,
};
pub use cost::CostReport;
pub use error::{Result, SfaError};
pub use sparse::{densify, topk_sparsify, DenseMatrix, FeaturePostings, SparseRowMatrix};
