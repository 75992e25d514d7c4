pub mod analyze;
pub mod bench;
pub mod check;
pub mod cost_model;
pub mod grad_check;

use sfa_core::gen::generate_instance;
use sfa_core::{topk_sparsify, AttentionConfig, DenseMatrix, Result, SparseRowMatrix};

/// Dense and sparsified inputs of one `(batch, head)` instance.
pub struct Inputs {
    pub q: DenseMatrix,
    pub k: DenseMatrix,
    pub v: DenseMatrix,
    pub qt: SparseRowMatrix,
    pub kt: SparseRowMatrix,
}

pub fn make_inputs(cfg: &AttentionConfig, seed: u64, index: u64) -> Result<Inputs> {
    let (q, k, v) = generate_instance(cfg, seed, index);
    let qt = topk_sparsify(&q, cfg.k)?;
    let kt = topk_sparsify(&k, cfg.key_budget())?;
    Ok(Inputs { q, k, v, qt, kt })
}
