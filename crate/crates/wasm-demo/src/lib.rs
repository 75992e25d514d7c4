//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exposed: an attention-weight heatmap for a small
//! random instance, the analytic cost model, and the selection entropy of
//! Top-k supports. Each has a plain Rust core so it can be tested natively.

use sfa_core::analysis::{topk_index_entropy, SelectionHistogram};
use sfa_core::attention::{attention_weights_debug, DEBUG_MAX_ROWS};
use sfa_core::cost::{
    context_extension_factor, dense_kv_cache_bytes, flop_ratio, intersection_edge_count,
    kv_cache_bytes, predicted_edges,
};
use sfa_core::gen::{fixed_support_matrix, generate_inputs};
use sfa_core::sparse::{dense_to_csr_ratio, memory_gain_condition, MemoryModel};
use sfa_core::{densify, topk_sparsify, AttentionConfig, Mask};
use wasm_bindgen::prelude::*;

/// Row-major attention weights of one instance plus its overlap count.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Heatmap {
    n: usize,
    weights: Vec<f64>,
    edges: u64,
    predicted: u64,
}

#[wasm_bindgen]
impl Heatmap {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `n * n` weights, row `i` holding query `i`'s distribution over keys.
    pub fn weights(&self) -> Vec<f64> {
        self.weights.clone()
    }

    /// Query/key feature overlaps in this instance.
    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> u64 {
        self.edges
    }

    /// `n^2 k^2 / d` for the same shape.
    #[wasm_bindgen(getter)]
    pub fn predicted(&self) -> u64 {
        self.predicted
    }
}

pub fn heatmap_impl(n: usize, d: usize, k: usize, causal: bool, seed: u64) -> Result<Heatmap, String> {
    if n == 0 || n > DEBUG_MAX_ROWS {
        return Err(format!("n must lie in 1..={DEBUG_MAX_ROWS}"));
    }
    let mask = if causal { Mask::Causal } else { Mask::None };
    let cfg = AttentionConfig::new(n, d, 1, k).with_mask(mask);
    cfg.validate().map_err(|e| e.to_string())?;
    let (q, key, _) = generate_inputs(&cfg, seed);
    let qt = topk_sparsify(&q, k).map_err(|e| e.to_string())?;
    let kt = topk_sparsify(&key, k).map_err(|e| e.to_string())?;
    let w = attention_weights_debug(&qt, &kt, &cfg).map_err(|e| e.to_string())?;
    Ok(Heatmap {
        n,
        weights: densify(&w).values().to_vec(),
        edges: intersection_edge_count(&qt, &kt),
        predicted: predicted_edges(n as u64, d as u64, k as u64),
    })
}

#[wasm_bindgen]
pub fn attention_heatmap(n: usize, d: usize, k: usize, causal: bool, seed: u64) -> Result<Heatmap, JsError> {
    heatmap_impl(n, d, k, causal, seed).map_err(|e| JsError::new(&e))
}

/// Closed-form costs for a `(d, k)` budget under fp16/int8/int32 storage.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSummary {
    pub flop_ratio: f64,
    pub context_extension: f64,
    pub key_memory_ratio: f64,
    pub memory_gain: bool,
    pub kv_reduction: f64,
}

pub fn cost_impl(d: u64, k: u64, d_v: u64) -> Result<CostSummary, String> {
    if d == 0 || k == 0 || k > d || d_v == 0 {
        return Err("need 1 <= k <= d and d_v >= 1".into());
    }
    let model = MemoryModel::FP16_INT8_INT32;
    // per-token ratio, so any token count gives the same answer up to the final pointer
    let tokens = 1 << 20;
    let sparse = kv_cache_bytes(tokens, k, d_v, model) as f64;
    let dense = dense_kv_cache_bytes(tokens, d, d_v, model) as f64;
    Ok(CostSummary {
        flop_ratio: flop_ratio(d, k),
        context_extension: context_extension_factor(d, k),
        key_memory_ratio: dense_to_csr_ratio(d, k, model),
        memory_gain: memory_gain_condition(d, k, model),
        kv_reduction: 1.0 - sparse / dense,
    })
}

#[wasm_bindgen]
pub fn cost_model(d: u32, k: u32, d_v: u32) -> Result<CostSummary, JsError> {
    cost_impl(d.into(), k.into(), d_v.into()).map_err(|e| JsError::new(&e))
}

/// Normalized entropy of the features Top-k picks over `n` generated rows.
/// `fixed` concentrates every row on the same `k` features.
pub fn entropy_impl(n: usize, d: usize, k: usize, fixed: bool, seed: u64) -> Result<f64, String> {
    if n == 0 || d < 2 || k == 0 || k > d {
        return Err("need n >= 1, d >= 2 and 1 <= k <= d".into());
    }
    let x = if fixed {
        fixed_support_matrix(n, d, k, seed)
    } else {
        generate_inputs(&AttentionConfig::new(n, d, 1, k), seed).0
    };
    let s = topk_sparsify(&x, k).map_err(|e| e.to_string())?;
    topk_index_entropy(&SelectionHistogram::from_sparse(&s)).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn selection_entropy(n: usize, d: usize, k: usize, fixed: bool, seed: u64) -> Result<f64, JsError> {
    entropy_impl(n, d, k, fixed, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_rows_are_distributions() {
        let h = heatmap_impl(24, 16, 4, true, 1).unwrap();
        assert_eq!(h.weights.len(), 24 * 24);
        for i in 0..24 {
            let row = &h.weights[i * 24..(i + 1) * 24];
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row[i + 1..].iter().all(|&w| w == 0.0));
        }
        assert!(h.edges > 0);
    }

    #[test]
    fn heatmap_rejects_large_n() {
        assert!(heatmap_impl(DEBUG_MAX_ROWS + 1, 16, 4, false, 0).is_err());
        assert!(heatmap_impl(8, 4, 5, false, 0).is_err());
    }

    #[test]
    fn cost_matches_hand_values() {
        let c = cost_impl(128, 16, 128).unwrap();
        assert_eq!(c.flop_ratio, 1.0 / 64.0);
        assert_eq!(c.context_extension, 64.0);
        assert!((c.key_memory_ratio - 256.0 / 52.0).abs() < 1e-12);
        assert!(c.memory_gain);
        let kv = cost_impl(64, 4, 64).unwrap().kv_reduction;
        assert!((kv - 0.4375).abs() < 1e-6, "{kv}");
        assert!(!cost_impl(64, 60, 64).unwrap().memory_gain);
        assert!(cost_impl(8, 9, 8).is_err());
    }

    #[test]
    fn entropy_separates_generators() {
        // four of 32 features used equally: ln 4 / ln 32
        assert!((entropy_impl(64, 32, 4, true, 0).unwrap() - 0.4).abs() < 1e-15);
        assert!(entropy_impl(512, 32, 4, false, 0).unwrap() > 0.99);
    }
}
