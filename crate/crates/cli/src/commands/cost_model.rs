//! Analytic edge, FLOP and memory models for each sweep point. Nothing is
//! executed, so sequence lengths are limited only by `u64` arithmetic.

use serde::Serialize;
use sfa_core::cost::{
    context_extension_factor, dense_attention_flops, dense_kv_cache_bytes, dense_score_flops,
    flop_ratio, kv_cache_bytes, predicted_edges,
};
use sfa_core::sparse::{
    csr_memory_bytes, dense_memory_bytes, dense_to_csr_ratio, memory_gain_condition, MemoryModel,
};

use crate::args::CostModelArgs;
use crate::error::CliError;
use crate::settings::Settings;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CostModelRow {
    pub n: usize,
    pub d: usize,
    pub dv: usize,
    pub k: usize,
    pub batch: usize,
    pub heads: usize,
    pub predicted_edges: u64,
    pub flop_ratio: f64,
    pub context_extension: f64,
    pub dense_attention_flops: u64,
    pub dense_score_flops: u64,
    pub sparse_score_flops: u64,
    pub key_dense_bytes: u64,
    pub key_csr_bytes: u64,
    pub memory_ratio: f64,
    pub gain_condition: bool,
    pub kv_cache_bytes: u64,
    pub dense_kv_cache_bytes: u64,
    pub kv_reduction: f64,
}

pub fn run(settings: &Settings, args: &CostModelArgs) -> Result<Vec<CostModelRow>, CliError> {
    let model = MemoryModel::new(args.val_bytes, args.idx_bytes, args.ptr_bytes)?;
    let (b, h) = (settings.batch as u64, settings.heads as u64);
    let mut rows = Vec::new();
    for p in settings.points()? {
        let (n, d, dv, k) = (p.n as u64, p.d as u64, p.dv as u64, p.k as u64);
        let edges = predicted_edges(n, d, k);
        let sparse_kv = kv_cache_bytes(n, k, dv, model);
        let dense_kv = dense_kv_cache_bytes(n, d, dv, model);
        let row = CostModelRow {
            n: p.n,
            d: p.d,
            dv: p.dv,
            k: p.k,
            batch: settings.batch,
            heads: settings.heads,
            predicted_edges: edges,
            flop_ratio: flop_ratio(d, k),
            context_extension: context_extension_factor(d, k),
            dense_attention_flops: dense_attention_flops(n, d, dv, b, h),
            dense_score_flops: dense_score_flops(n, d, b, h),
            sparse_score_flops: 2 * edges * b * h,
            key_dense_bytes: dense_memory_bytes(n, d, model),
            key_csr_bytes: csr_memory_bytes(n, k, model),
            memory_ratio: dense_to_csr_ratio(d, k, model),
            gain_condition: memory_gain_condition(d, k, model),
            kv_cache_bytes: sparse_kv,
            dense_kv_cache_bytes: dense_kv,
            kv_reduction: 1.0 - sparse_kv as f64 / dense_kv as f64,
        };
        rows.push(row);
    }
    Ok(rows)
}
