//! Append-only cache of sparse keys and dense values for token-by-token decoding.

use super::flash::{forward_rows, KernelParams, WorkCounts, Workspace};
use super::tile::{CsrView, PostingSource};
use super::Mask;
use crate::error::{invalid_arg, Result};
use crate::sparse::{csr_memory_bytes, FeaturePostings, MemoryModel, SparseRowMatrix};

/// One sparse row: strictly increasing feature indices with their values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(invalid_arg!("indices and values differ in length"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid_arg!("indices must be strictly increasing"));
        }
        Ok(Self { indices, values })
    }

    /// Copies row `i` of a CSR matrix.
    pub fn from_matrix_row(m: &SparseRowMatrix, i: usize) -> Self {
        Self {
            indices: m.row_indices(i).to_vec(),
            values: m.row_values(i).to_vec(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

/// Keys stored feature-major so each new token only appends to `k` posting
/// lists; its index is always the largest, so the lists stay sorted.
#[derive(Debug, Clone)]
pub struct SparseKVCache {
    d: usize,
    d_v: usize,
    k: usize,
    tile_cols: usize,
    keys: Vec<Vec<u32>>,
    key_values: Vec<Vec<f64>>,
    values: Vec<f64>,
    len: usize,
}

impl PostingSource<f64> for SparseKVCache {
    fn num_keys(&self) -> usize {
        self.len
    }

    fn postings(&self, f: usize) -> (&[u32], &[f64]) {
        (&self.keys[f], &self.key_values[f])
    }
}

impl SparseKVCache {
    pub fn new(d: usize, d_v: usize, k: usize) -> Result<Self> {
        if d == 0 || d_v == 0 || k == 0 || k > d {
            return Err(invalid_arg!("bad cache shape d={d} d_v={d_v} k={k}"));
        }
        Ok(Self {
            d,
            d_v,
            k,
            tile_cols: 128,
            keys: vec![Vec::new(); d],
            key_values: vec![Vec::new(); d],
            values: Vec::new(),
            len: 0,
        })
    }

    /// Key tile width used when scoring the cache.
    pub fn with_tile_cols(mut self, tile_cols: usize) -> Self {
        self.tile_cols = tile_cols.max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_v(&self) -> usize {
        self.d_v
    }

    /// Cached value row `j`.
    pub fn value_row(&self, j: usize) -> &[f64] {
        &self.values[j * self.d_v..(j + 1) * self.d_v]
    }

    pub fn append(&mut self, key: &SparseRow, value: &[f64]) -> Result<()> {
        if key.nnz() != self.k {
            return Err(invalid_arg!(
                "key row has {} entries, cache budget is {}",
                key.nnz(),
                self.k
            ));
        }
        if key.indices.last().is_some_and(|&f| f as usize >= self.d) {
            return Err(invalid_arg!("key feature index out of range 0..{}", self.d));
        }
        if value.len() != self.d_v {
            return Err(invalid_arg!(
                "value row has {} entries, expected {}",
                value.len(),
                self.d_v
            ));
        }
        if value.iter().chain(&key.values).any(|v| !v.is_finite()) {
            return Err(invalid_arg!("non-finite cache entry"));
        }
        let j = u32::try_from(self.len).map_err(|_| invalid_arg!("cache full"))?;
        for (&f, &v) in key.indices.iter().zip(&key.values) {
            self.keys[f as usize].push(j);
            self.key_values[f as usize].push(v);
        }
        self.values.extend_from_slice(value);
        self.len += 1;
        Ok(())
    }

    /// Snapshot of the cached keys as flat posting lists.
    pub fn to_postings(&self) -> FeaturePostings {
        let mut indptr = Vec::with_capacity(self.d + 1);
        indptr.push(0);
        for list in &self.keys {
            indptr.push(indptr.last().unwrap() + list.len());
        }
        FeaturePostings::from_parts_unchecked(
            self.len,
            indptr,
            self.keys.concat(),
            self.key_values.concat(),
        )
    }

    /// Bytes the cache occupies under `model`: CSR keys plus dense values.
    pub fn memory_bytes(&self, model: MemoryModel) -> u64 {
        let t = self.len as u64;
        csr_memory_bytes(t, self.k as u64, model) + t * self.d_v as u64 * model.val_bytes
    }

    /// Attention output of `q` over every cached key.
    pub fn attend(&self, q: &SparseRow) -> Result<Vec<f64>> {
        if q.indices.last().is_some_and(|&f| f as usize >= self.d) {
            return Err(invalid_arg!("query feature index out of range 0..{}", self.d));
        }
        let mut out = vec![0.0; self.d_v];
        if self.len == 0 {
            return Ok(out);
        }
        let indptr = [0, q.nnz()];
        let view = CsrView {
            indptr: &indptr,
            indices: &q.indices,
            values: &q.values,
        };
        let tile_cols = self.tile_cols.min(self.len);
        let params = KernelParams {
            mask: Mask::None,
            tile_rows: 1,
            tile_cols,
            d: self.d,
            d_v: self.d_v,
        };
        let mut ws = Workspace::new(1, tile_cols);
        let mut lse = [0.0];
        let mut counts = WorkCounts::default();
        forward_rows(
            &view,
            1,
            self,
            &self.values,
            &params,
            0..1,
            &mut ws,
            &mut out,
            &mut lse,
            &mut counts,
        );
        Ok(out)
    }
}

/// Appends `(new_key, new_value)` to the cache, then attends `q` over all
/// cached tokens, the new one included.
pub fn decode_step(
    q: &SparseRow,
    cache: &mut SparseKVCache,
    new_key: &SparseRow,
    new_value: &[f64],
) -> Result<Vec<f64>> {
    if q.nnz() != cache.k {
        return Err(invalid_arg!(
            "query row has {} entries, cache budget is {}",
            q.nnz(),
            cache.k
        ));
    }
    cache.append(new_key, new_value)?;
    cache.attend(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_token_returns_its_value() {
        let mut cache = SparseKVCache::new(4, 3, 2).unwrap();
        let q = SparseRow::new(vec![0, 3], vec![1.0, -2.0]).unwrap();
        let key = SparseRow::new(vec![1, 3], vec![0.5, 0.25]).unwrap();
        let out = decode_step(&q, &mut cache, &key, &[1.0, -1.5, 2.0]).unwrap();
        assert_eq!(out, vec![1.0, -1.5, 2.0]);
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn rejects_wrong_budget_and_width() {
        let mut cache = SparseKVCache::new(4, 2, 2).unwrap();
        let q = SparseRow::new(vec![0, 3], vec![1.0, 1.0]).unwrap();
        let short = SparseRow::new(vec![1], vec![1.0]).unwrap();
        assert!(decode_step(&q, &mut cache, &short, &[0.0, 0.0]).is_err());
        assert!(decode_step(&short, &mut cache, &q, &[0.0, 0.0]).is_err());
        assert!(decode_step(&q, &mut cache, &q, &[0.0]).is_err());
        let wide = SparseRow::new(vec![1, 4], vec![1.0, 1.0]).unwrap();
        assert!(decode_step(&q, &mut cache, &wide, &[0.0, 0.0]).is_err());
        assert!(cache.is_empty());
    }

    #[test]
    fn postings_stay_sorted() {
        let mut cache = SparseKVCache::new(3, 1, 1).unwrap();
        for t in 0..10u32 {
            let key = SparseRow::new(vec![t % 3], vec![t as f64]).unwrap();
            cache.append(&key, &[0.0]).unwrap();
        }
        let p = cache.to_postings();
        assert_eq!(p.num_keys(), 10);
        assert_eq!(p.postings(1).0, &[1, 4, 7]);
        assert_eq!(p.to_csr().rows(), 10);
    }

    #[test]
    fn memory_accounting() {
        let model = MemoryModel::FP16_INT8_INT32;
        let mut cache = SparseKVCache::new(8, 4, 2).unwrap();
        assert_eq!(cache.memory_bytes(model), 4);
        for _ in 0..5 {
            cache
                .append(&SparseRow::new(vec![0, 5], vec![1.0, 2.0]).unwrap(), &[0.0; 4])
                .unwrap();
        }
        assert_eq!(cache.memory_bytes(model), csr_memory_bytes(5, 2, model) + 5 * 4 * 2);
    }
}
