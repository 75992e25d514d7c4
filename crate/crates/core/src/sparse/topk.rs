use std::cmp::Ordering;

use super::{DenseMatrix, SparseRowMatrix};
use crate::error::{invalid_arg, Result, SfaError};

/// Keeps the `k` largest-magnitude entries of every row, preserving sign.
///
/// Exactly `k` entries are stored per row even when some of them are zero.
/// Ties in magnitude go to the lower column index, and the kept indices are
/// emitted in ascending order.
pub fn topk_sparsify(x: &DenseMatrix, k: usize) -> Result<SparseRowMatrix> {
    let cols = x.cols();
    if k == 0 || k > cols {
        return Err(invalid_arg!("k={k} must lie in 1..={cols}"));
    }
    if cols > u32::MAX as usize {
        return Err(invalid_arg!("{cols} columns exceed the u32 index width"));
    }
    if x.values().iter().any(|v| !v.is_finite()) {
        return Err(SfaError::InvalidInput("non-finite input to top-k".into()));
    }

    let rows = x.rows();
    let mut indptr = Vec::with_capacity(rows + 1);
    let mut indices = Vec::with_capacity(rows * k);
    let mut values = Vec::with_capacity(rows * k);
    indptr.push(0);

    let mut order: Vec<u32> = Vec::with_capacity(cols);
    for i in 0..rows {
        let row = x.row(i);
        order.clear();
        order.extend(0..cols as u32);
        let by_magnitude = |a: &u32, b: &u32| -> Ordering {
            let (ma, mb) = (row[*a as usize].abs(), row[*b as usize].abs());
            mb.total_cmp(&ma).then(a.cmp(b))
        };
        if k < cols {
            order.select_nth_unstable_by(k - 1, by_magnitude);
        }
        let kept = &mut order[..k];
        kept.sort_unstable();
        for &c in kept.iter() {
            indices.push(c);
            values.push(row[c as usize]);
        }
        indptr.push(indices.len());
    }
    Ok(SparseRowMatrix::from_parts_unchecked(
        rows, cols, indptr, indices, values,
    ))
}
