#![allow(dead_code)]

use sfa_core::gen::generate_instance;
use sfa_core::{topk_sparsify, AttentionConfig, DenseMatrix, SparseRowMatrix};

pub struct Instance {
    pub q: DenseMatrix,
    pub k: DenseMatrix,
    pub qt: SparseRowMatrix,
    pub kt: SparseRowMatrix,
    pub v: DenseMatrix,
}

pub fn instance(cfg: &AttentionConfig, seed: u64) -> Instance {
    let (q, k, v) = generate_instance(cfg, seed, 0);
    let qt = topk_sparsify(&q, cfg.k).unwrap();
    let kt = topk_sparsify(&k, cfg.key_budget()).unwrap();
    Instance { q, k, qt, kt, v }
}

/// Minimal xorshift for picking test configurations.
pub struct Picker(pub u64);

impl Picker {
    pub fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next() % (hi - lo + 1) as u64) as usize
    }

    pub fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[(self.next() % items.len() as u64) as usize]
    }
}
