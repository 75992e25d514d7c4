use super::DenseMatrix;
use crate::error::{invalid_arg, Result, SfaError};

/// Compressed sparse row matrix.
///
/// Row `i` owns the half-open range `indptr[i]..indptr[i + 1]` of `indices` and
/// `values`. Column indices are strictly increasing within a row. Rows produced
/// by [`topk_sparsify`](super::topk_sparsify) all hold exactly `k` entries, and
/// stored zeros are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRowMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRowMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if cols > u32::MAX as usize {
            return Err(invalid_arg!("{cols} columns exceed the u32 index width"));
        }
        if indptr.len() != rows + 1 {
            return Err(invalid_arg!(
                "indptr must have {} entries, got {}",
                rows + 1,
                indptr.len()
            ));
        }
        if indptr[0] != 0 {
            return Err(invalid_arg!("indptr[0] must be 0"));
        }
        if indptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid_arg!("indptr must be non-decreasing"));
        }
        let nnz = indptr[rows];
        if indices.len() != nnz || values.len() != nnz {
            return Err(invalid_arg!(
                "indptr declares {nnz} entries but indices/values hold {}/{}",
                indices.len(),
                values.len()
            ));
        }
        for i in 0..rows {
            let row = &indices[indptr[i]..indptr[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid_arg!("row {i} indices are not strictly increasing"));
            }
            if row.last().is_some_and(|&c| c as usize >= cols) {
                return Err(invalid_arg!("row {i} has a column index >= {cols}"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SfaError::InvalidInput("non-finite stored value".into()));
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub(crate) fn from_parts_unchecked(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(indptr.len(), rows + 1);
        debug_assert_eq!(indices.len(), values.len());
        Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    /// A matrix with no stored entries.
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self::from_parts_unchecked(rows, cols, vec![0; rows + 1], Vec::new(), Vec::new())
    }

    /// Builds a matrix from per-row `(column, value)` lists. Entries are sorted by column.
    pub fn from_row_entries(cols: usize, rows: &[Vec<(u32, f64)>]) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            let mut row = row.clone();
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self::new(rows.len(), cols, indptr, indices, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_indices(&self, row: usize) -> &[u32] {
        &self.indices[self.indptr[row]..self.indptr[row + 1]]
    }

    pub fn row_values(&self, row: usize) -> &[f64] {
        &self.values[self.indptr[row]..self.indptr[row + 1]]
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.indptr[row + 1] - self.indptr[row]
    }

    /// Stored value at `(row, col)`, if present.
    pub fn get(&self, row: usize, col: u32) -> Option<f64> {
        let idx = self.row_indices(row);
        idx.binary_search(&col)
            .ok()
            .map(|p| self.values[self.indptr[row] + p])
    }

    /// Copy of rows `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        let lo = self.indptr[start];
        let hi = self.indptr[end];
        Self::from_parts_unchecked(
            end - start,
            self.cols,
            self.indptr[start..=end].iter().map(|p| p - lo).collect(),
            self.indices[lo..hi].to_vec(),
            self.values[lo..hi].to_vec(),
        )
    }

    /// Same sparsity pattern with different values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nnz() {
            return Err(invalid_arg!("expected {} values", self.nnz()));
        }
        Ok(Self::from_parts_unchecked(
            self.rows,
            self.cols,
            self.indptr.clone(),
            self.indices.clone(),
            values,
        ))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts_unchecked(
            self.rows,
            self.cols,
            self.indptr.clone(),
            self.indices.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

/// Expands a sparse matrix, writing zeros for absent entries.
pub fn densify(s: &SparseRowMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(s.rows(), s.cols());
    for i in 0..s.rows() {
        for (&c, &v) in s.row_indices(i).iter().zip(s.row_values(i)) {
            out.set(i, c as usize, v);
        }
    }
    out
}
