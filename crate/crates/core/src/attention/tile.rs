//! Feature-intersection scoring of one `(query tile, key tile)` block.

use std::ops::Range;

use super::real::Real;
use super::search::binary_search_range_counted;
use crate::error::{invalid_arg, Result};
use crate::sparse::{FeaturePostings, SparseRowMatrix};

/// Borrowed CSR arrays in the kernel's working precision.
pub(crate) struct CsrView<'a, T> {
    pub indptr: &'a [usize],
    pub indices: &'a [u32],
    pub values: &'a [T],
}

impl<'a, T: Copy> CsrView<'a, T> {
    #[inline]
    pub fn row(&self, i: usize) -> (&'a [u32], &'a [T]) {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }
}

/// Anything that can hand out a sorted posting list per feature.
pub(crate) trait PostingSource<T> {
    fn num_keys(&self) -> usize;
    fn postings(&self, feature: usize) -> (&[u32], &[T]);
}

/// Flat feature-major arrays in working precision.
pub(crate) struct PostingsView<'a, T> {
    pub num_keys: usize,
    pub indptr: &'a [usize],
    pub key_indices: &'a [u32],
    pub values: &'a [T],
}

impl<T> PostingSource<T> for PostingsView<'_, T> {
    fn num_keys(&self) -> usize {
        self.num_keys
    }

    #[inline]
    fn postings(&self, f: usize) -> (&[u32], &[T]) {
        let (lo, hi) = (self.indptr[f], self.indptr[f + 1]);
        (&self.key_indices[lo..hi], &self.values[lo..hi])
    }
}

/// Work done while scoring tiles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct TileCounts {
    /// query-nonzero x posting-entry multiply-adds
    pub edges: u64,
    /// pointer loads, binary-search comparisons and posting traversal steps
    pub inops: u64,
}

impl std::ops::AddAssign for TileCounts {
    fn add_assign(&mut self, o: Self) {
        self.edges += o.edges;
        self.inops += o.inops;
    }
}

/// Fills `out` (row-major, `rows.len() x cols.len()`) with scaled overlap scores.
///
/// Entries whose supports do not intersect stay exactly zero.
#[inline]
pub(crate) fn score_tile<T: Real, P: PostingSource<T> + ?Sized>(
    q: &CsrView<'_, T>,
    keys: &P,
    rows: Range<usize>,
    cols: Range<usize>,
    scale: T,
    out: &mut [T],
    counts: &mut TileCounts,
) {
    let width = cols.len();
    let out = &mut out[..rows.len() * width];
    out.fill(T::zero());
    let (j0, j1) = (cols.start as u32, cols.end as u32);
    for (r, i) in rows.enumerate() {
        let acc = &mut out[r * width..(r + 1) * width];
        let (features, qvals) = q.row(i);
        for (&f, &qv) in features.iter().zip(qvals) {
            let (list, kvals) = keys.postings(f as usize);
            // two pointer loads bound the posting list
            counts.inops += 2;
            let (pl, pr) = binary_search_range_counted(list, j0, j1, &mut counts.inops);
            let qs = qv * scale;
            for p in pl..pr {
                let c = (list[p] - j0) as usize;
                acc[c] += qs * kvals[p];
            }
            let hits = (pr - pl) as u64;
            counts.edges += hits;
            counts.inops += hits;
        }
    }
}

/// A scored block returned by [`sparse_score_tile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTile {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    /// Number of query-nonzero x posting-entry multiply-adds performed.
    pub edges: u64,
}

impl ScoreTile {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }
}

/// Scores query rows `[i0, i0+br)` against keys `[j0, j0+bc)`, scaled by
/// `1/sqrt(d)`. Tiles running past the matrix edge are clamped.
pub fn sparse_score_tile(
    qt: &SparseRowMatrix,
    postings: &FeaturePostings,
    i0: usize,
    j0: usize,
    br: usize,
    bc: usize,
    d: usize,
) -> Result<ScoreTile> {
    if qt.cols() != postings.num_features() {
        return Err(invalid_arg!(
            "queries have {} features, postings {}",
            qt.cols(),
            postings.num_features()
        ));
    }
    if i0 >= qt.rows() || j0 >= postings.num_keys() || d == 0 {
        return Err(invalid_arg!("tile origin ({i0}, {j0}) out of bounds"));
    }
    let rows = i0..(i0 + br).min(qt.rows());
    let cols = j0..(j0 + bc).min(postings.num_keys());
    let q = CsrView {
        indptr: qt.indptr(),
        indices: qt.indices(),
        values: qt.values(),
    };
    let keys = PostingsView {
        num_keys: postings.num_keys(),
        indptr: postings.indptr(),
        key_indices: postings.key_indices(),
        values: postings.values(),
    };
    let mut values = vec![0.0; rows.len() * cols.len()];
    let mut counts = TileCounts::default();
    let (nr, nc) = (rows.len(), cols.len());
    score_tile(
        &q,
        &keys,
        rows,
        cols,
        1.0 / (d as f64).sqrt(),
        &mut values,
        &mut counts,
    );
    Ok(ScoreTile {
        rows: nr,
        cols: nc,
        values,
        edges: counts.edges,
    })
}
