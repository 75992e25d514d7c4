//! Analytical cost models and the counters reported by the kernels.
//!
//! Counting convention:
//! - one multiply-add is 2 FLOPs;
//! - each softmax entry costs [`SOFTMAX_FLOPS_PER_ENTRY`] FLOPs (subtract,
//!   exp, normalize and the amortized max/sum work);
//! - one INOP is a posting-list pointer load, a binary-search comparison or
//!   one index load while walking a posting list.
//!
//! Rescaling of the running softmax state is not counted separately; it is
//! folded into the per-entry softmax cost.

use serde::{Deserialize, Serialize};

use crate::sparse::{csr_memory_bytes, MemoryModel, SparseRowMatrix};

pub const SOFTMAX_FLOPS_PER_ENTRY: u64 = 4;

/// Measured counters next to the model predictions for the same config.
/// Serialized field names are part of the CLI's JSON schema.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub measured_edges: u64,
    pub measured_flops: u64,
    pub measured_inops: u64,
    pub score_flops: u64,
    pub softmax_flops: u64,
    pub value_flops: u64,
    pub predicted_edges: u64,
    pub dense_flops: u64,
    pub dense_score_flops: u64,
    pub peak_transient_values: u64,
    pub peak_transient_bytes: u64,
    pub kv_cache_bytes: u64,
}

impl CostReport {
    /// Measured score-stage FLOPs over the dense score-stage FLOPs.
    pub fn score_flop_ratio(&self) -> f64 {
        if self.dense_score_flops == 0 {
            return 0.0;
        }
        self.score_flops as f64 / self.dense_score_flops as f64
    }
}

/// Expected number of feature overlaps under balanced supports,
/// `round(n^2 k^2 / d)`, with ties rounded up.
pub fn predicted_edges(n: u64, d: u64, k: u64) -> u64 {
    let (n, d, k) = (n as u128, d as u128, k as u128);
    let num = n * n * k * k;
    ((2 * num + d) / (2 * d)) as u64
}

/// Fraction of dense score work that survives sparsification, `k^2/d^2`.
pub fn flop_ratio(d: u64, k: u64) -> f64 {
    let r = k as f64 / d as f64;
    r * r
}

/// How much longer a context fits in the same score budget, `d^2/k^2`.
pub fn context_extension_factor(d: u64, k: u64) -> f64 {
    1.0 / flop_ratio(d, k)
}

/// Score-stage FLOPs of dense attention: `2 n^2 d` per head.
pub fn dense_score_flops(n: u64, d: u64, batch: u64, heads: u64) -> u64 {
    batch * heads * 2 * n * n * d
}

/// Full dense attention FLOPs: `2n^2 d + 2n^2 d_v + c_softmax n^2` per head.
pub fn dense_attention_flops(n: u64, d: u64, d_v: u64, batch: u64, heads: u64) -> u64 {
    batch * heads * n * n * (2 * d + 2 * d_v + SOFTMAX_FLOPS_PER_ENTRY)
}

/// `(flops, inops)` counted during an instrumented kernel run.
pub fn measure_sparse_ops(report: &CostReport) -> (u64, u64) {
    (report.measured_flops, report.measured_inops)
}

/// Bytes of a cache holding `tokens` sparse keys and dense values.
pub fn kv_cache_bytes(tokens: u64, k: u64, d_v: u64, model: MemoryModel) -> u64 {
    csr_memory_bytes(tokens, k, model) + tokens * d_v * model.val_bytes
}

/// Bytes of a cache holding `tokens` dense keys and dense values.
pub fn dense_kv_cache_bytes(tokens: u64, d: u64, d_v: u64, model: MemoryModel) -> u64 {
    tokens * (d + d_v) * model.val_bytes
}

/// `sum_f deg_Q(f) * deg_K(f)`: the number of structural intersections between
/// the two supports, counted from degree histograms alone.
pub fn intersection_edge_count(q: &SparseRowMatrix, k: &SparseRowMatrix) -> u64 {
    let d = q.cols().max(k.cols());
    let mut deg_q = vec![0u64; d];
    let mut deg_k = vec![0u64; d];
    q.indices().iter().for_each(|&f| deg_q[f as usize] += 1);
    k.indices().iter().for_each(|&f| deg_k[f as usize] += 1);
    deg_q.iter().zip(&deg_k).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_edges_examples() {
        assert_eq!(predicted_edges(1024, 128, 16), 2_097_152);
        assert_eq!(predicted_edges(100, 64, 64), 100 * 100 * 64);
        // 1*1*1/2 = 0.5 rounds up
        assert_eq!(predicted_edges(1, 2, 1), 1);
        assert_eq!(predicted_edges(1, 3, 1), 0);
    }

    #[test]
    fn flop_ratio_examples() {
        assert_eq!(flop_ratio(128, 16), 1.0 / 64.0);
        assert_eq!(flop_ratio(1024, 32), 1.0 / 1024.0);
        assert_eq!(flop_ratio(77, 77), 1.0);
        assert_eq!(context_extension_factor(128, 16), 64.0);
        assert_eq!(context_extension_factor(1024, 32), 1024.0);
    }

    #[test]
    fn dense_flops_single_token() {
        assert_eq!(dense_attention_flops(1, 16, 8, 2, 3), 6 * (32 + 16 + 4));
    }

    #[test]
    fn dense_flops_monotone_and_linear() {
        let base = dense_attention_flops(64, 32, 16, 1, 1);
        assert_eq!(dense_attention_flops(64, 32, 16, 3, 5), 15 * base);
        assert!(dense_attention_flops(65, 32, 16, 1, 1) > base);
        assert!(dense_attention_flops(64, 33, 16, 1, 1) > base);
        assert!(dense_attention_flops(64, 32, 17, 1, 1) > base);
    }

    #[test]
    fn kv_cache_empty_is_pointer_only() {
        let m = MemoryModel::FP16_INT8_INT32;
        assert_eq!(kv_cache_bytes(0, 16, 64, m), 4);
    }

    #[test]
    fn report_json_field_names() {
        let json = serde_json::to_value(CostReport::default()).unwrap();
        let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "dense_flops",
                "dense_score_flops",
                "kv_cache_bytes",
                "measured_edges",
                "measured_flops",
                "measured_inops",
                "peak_transient_bytes",
                "peak_transient_values",
                "predicted_edges",
                "score_flops",
                "softmax_flops",
                "value_flops",
            ]
        );
    }
}
