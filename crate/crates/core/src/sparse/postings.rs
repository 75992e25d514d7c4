use super::SparseRowMatrix;

/// Feature-major (CSC) view of a key matrix: for every feature, the sorted list
/// of keys that activate it together with the key's value on that feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePostings {
    num_features: usize,
    num_keys: usize,
    indptr: Vec<usize>,
    key_indices: Vec<u32>,
    values: Vec<f64>,
}

impl FeaturePostings {
    pub(crate) fn from_parts_unchecked(
        num_keys: usize,
        indptr: Vec<usize>,
        key_indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(key_indices.len(), values.len());
        Self {
            num_features: indptr.len() - 1,
            num_keys,
            indptr,
            key_indices,
            values,
        }
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_keys(&self) -> usize {
        self.num_keys
    }

    pub fn nnz(&self) -> usize {
        self.key_indices.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn key_indices(&self) -> &[u32] {
        &self.key_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Posting list of `feature`: sorted key indices and matching values.
    pub fn postings(&self, feature: usize) -> (&[u32], &[f64]) {
        let (lo, hi) = (self.indptr[feature], self.indptr[feature + 1]);
        (&self.key_indices[lo..hi], &self.values[lo..hi])
    }

    /// Number of keys that activate `feature`.
    pub fn degree(&self, feature: usize) -> usize {
        self.indptr[feature + 1] - self.indptr[feature]
    }

    /// Converts back to the row-major form it was built from.
    pub fn to_csr(&self) -> SparseRowMatrix {
        let mut counts = vec![0usize; self.num_keys + 1];
        for &j in &self.key_indices {
            counts[j as usize + 1] += 1;
        }
        for i in 0..self.num_keys {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut cursor = counts;
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // features visited in ascending order, so each row comes out sorted
        for f in 0..self.num_features {
            let (keys, vals) = self.postings(f);
            for (&j, &v) in keys.iter().zip(vals) {
                let slot = cursor[j as usize];
                indices[slot] = f as u32;
                values[slot] = v;
                cursor[j as usize] += 1;
            }
        }
        SparseRowMatrix::from_parts_unchecked(
            self.num_keys,
            self.num_features,
            indptr,
            indices,
            values,
        )
    }
}

/// Transposes a row-major key matrix into per-feature posting lists.
pub fn build_feature_postings(ktilde: &SparseRowMatrix) -> FeaturePostings {
    let d = ktilde.cols();
    let mut indptr = vec![0usize; d + 1];
    for &f in ktilde.indices() {
        indptr[f as usize + 1] += 1;
    }
    for f in 0..d {
        indptr[f + 1] += indptr[f];
    }
    let mut cursor = indptr.clone();
    let mut key_indices = vec![0u32; ktilde.nnz()];
    let mut values = vec![0.0; ktilde.nnz()];
    // rows visited in ascending order, so every posting list is sorted
    for j in 0..ktilde.rows() {
        for (&f, &v) in ktilde.row_indices(j).iter().zip(ktilde.row_values(j)) {
            let slot = cursor[f as usize];
            key_indices[slot] = j as u32;
            values[slot] = v;
            cursor[f as usize] += 1;
        }
    }
    FeaturePostings {
        num_features: d,
        num_keys: ktilde.rows(),
        indptr,
        key_indices,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_keys_on_one_feature() {
        let k = SparseRowMatrix::from_row_entries(4, &[vec![(2, 1.5)], vec![(2, -0.5)]]).unwrap();
        let p = build_feature_postings(&k);
        assert_eq!(p.postings(2), (&[0u32, 1][..], &[1.5, -0.5][..]));
        for f in [0, 1, 3] {
            assert_eq!(p.degree(f), 0);
        }
    }

    #[test]
    fn empty_input() {
        let p = build_feature_postings(&SparseRowMatrix::empty(3, 5));
        assert_eq!(p.indptr(), &[0; 6]);
        assert_eq!(p.to_csr(), SparseRowMatrix::empty(3, 5));
    }

    fn sparse_strategy() -> impl Strategy<Value = SparseRowMatrix> {
        (1usize..8, 1usize..10).prop_flat_map(|(rows, cols)| {
            prop::collection::vec(
                prop::collection::btree_map(0..cols as u32, -10.0f64..10.0, 0..=cols),
                rows,
            )
            .prop_map(move |rs| {
                let rows: Vec<Vec<(u32, f64)>> =
                    rs.into_iter().map(|m| m.into_iter().collect()).collect();
                SparseRowMatrix::from_row_entries(cols, &rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn roundtrip_is_exact(s in sparse_strategy()) {
            let p = build_feature_postings(&s);
            prop_assert_eq!(p.nnz(), s.nnz());
            prop_assert_eq!(p.to_csr(), s);
        }

        #[test]
        fn postings_hold_exactly_the_activating_keys(s in sparse_strategy()) {
            let p = build_feature_postings(&s);
            for f in 0..s.cols() {
                let (keys, vals) = p.postings(f);
                prop_assert!(keys.windows(2).all(|w| w[0] < w[1]));
                let expected: Vec<(u32, f64)> = (0..s.rows())
                    .filter_map(|j| s.get(j, f as u32).map(|v| (j as u32, v)))
                    .collect();
                let got: Vec<(u32, f64)> = keys.iter().copied().zip(vals.iter().copied()).collect();
                prop_assert_eq!(got, expected);
            }
        }
    }
}
