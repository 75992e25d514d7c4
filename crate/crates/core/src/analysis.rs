//! Representation diagnostics: how evenly Top-k spreads its selections over
//! the feature axis, and how many singular directions carry most of a
//! matrix's energy.

use crate::error::{invalid_arg, Result, SfaError};
use crate::sparse::{DenseMatrix, SparseRowMatrix};

/// How often each feature index was selected across a population of rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionHistogram {
    dim: usize,
    counts: Vec<u64>,
}

impl SelectionHistogram {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            counts: vec![0; dim],
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        Self {
            dim: counts.len(),
            counts,
        }
    }

    /// Histogram of the stored column indices of `s`.
    pub fn from_sparse(s: &SparseRowMatrix) -> Self {
        let mut h = Self::new(s.cols());
        h.add(s);
        h
    }

    /// Adds the selections of another population with the same feature count.
    pub fn add(&mut self, s: &SparseRowMatrix) {
        assert_eq!(s.cols(), self.dim, "feature dimension mismatch");
        for &f in s.indices() {
            self.counts[f as usize] += 1;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Normalized entropy `-sum p log p / log d` of the selection distribution.
///
/// 1 means every feature is used equally often, 0 means a single feature
/// takes every selection. A one-feature histogram is trivially balanced (1).
pub fn topk_index_entropy(h: &SelectionHistogram) -> Result<f64> {
    let total = h.total();
    if total == 0 {
        return Err(SfaError::InvalidInput("empty selection histogram".into()));
    }
    if h.dim() == 1 {
        return Ok(1.0);
    }
    let total = total as f64;
    let entropy: f64 = h
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    Ok((entropy / (h.dim() as f64).ln()).clamp(0.0, 1.0))
}

const JACOBI_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Gram matrix over the smaller side: `X^T X` when `cols <= rows`, else `X X^T`.
pub fn gram_matrix(x: &DenseMatrix) -> DenseMatrix {
    let (r, c) = (x.rows(), x.cols());
    if c <= r {
        DenseMatrix::from_fn(c, c, |a, b| (0..r).map(|i| x.get(i, a) * x.get(i, b)).sum())
    } else {
        DenseMatrix::from_fn(r, r, |a, b| {
            x.row(a).iter().zip(x.row(b)).map(|(p, q)| p * q).sum()
        })
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// descending. Iterates until the off-diagonal Frobenius norm is at most
/// `1e-10` times the matrix norm.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(invalid_arg!("matrix must be square, got {}x{}", n, a.cols()));
    }
    let mut m: Vec<f64> = a.values().to_vec();
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += m[p * n + q] * m[p * n + q];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&m) > JACOBI_TOL * norm {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(SfaError::NumericFailure(
                "Jacobi iteration did not converge".into(),
            ));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[p * n + p], m[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig)
}

/// Squared singular values of `x` in descending order.
pub fn squared_singular_values(x: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(symmetric_eigenvalues(&gram_matrix(x))?
        .into_iter()
        .map(|v| v.max(0.0))
        .collect())
}

/// Smallest `r` whose top-`r` squared singular values hold a fraction `tau`
/// of the total energy. Energy below a `1e-12` relative slack is ignored, so
/// `tau = 1` returns the numerical rank.
pub fn effective_rank(x: &DenseMatrix, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(invalid_arg!("energy fraction must lie in (0, 1], got {tau}"));
    }
    if x.values().iter().any(|v| !v.is_finite()) {
        return Err(SfaError::InvalidInput("non-finite matrix".into()));
    }
    let energies = squared_singular_values(x)?;
    let total: f64 = energies.iter().sum();
    if total == 0.0 {
        return Err(SfaError::InvalidInput("zero matrix has no effective rank".into()));
    }
    let target = tau * total * (1.0 - 1e-12);
    let mut cum = 0.0;
    for (r, e) in energies.iter().enumerate() {
        cum += e;
        if cum >= target {
            return Ok(r + 1);
        }
    }
    Ok(energies.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        let uniform = SelectionHistogram::from_counts(vec![5; 8]);
        assert!((topk_index_entropy(&uniform).unwrap() - 1.0).abs() < 1e-15);
        let one_hot = SelectionHistogram::from_counts(vec![0, 9, 0, 0]);
        assert_eq!(topk_index_entropy(&one_hot).unwrap(), 0.0);
        let mixed = SelectionHistogram::from_counts(vec![2, 1, 1, 0]);
        assert!((topk_index_entropy(&mixed).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_empty() {
        let h = SelectionHistogram::new(4);
        assert!(matches!(topk_index_entropy(&h), Err(SfaError::InvalidInput(_))));
    }

    #[test]
    fn entropy_is_permutation_invariant() {
        let a = SelectionHistogram::from_counts(vec![7, 1, 0, 3, 2]);
        let b = SelectionHistogram::from_counts(vec![0, 3, 2, 7, 1]);
        assert_eq!(
            topk_index_entropy(&a).unwrap(),
            topk_index_entropy(&b).unwrap()
        );
    }

    #[test]
    fn rank_of_outer_product_is_one() {
        let u = [1.0, -2.0, 0.5, 3.0];
        let v = [0.3, 1.0, -1.0];
        let x = DenseMatrix::from_fn(4, 3, |i, j| u[i] * v[j]);
        for tau in [0.1, 0.9, 1.0] {
            assert_eq!(effective_rank(&x, tau).unwrap(), 1);
        }
    }

    #[test]
    fn identity_rank() {
        for n in [1, 5, 10, 16] {
            let want = (0.9 * n as f64 - 1e-9).ceil() as usize;
            assert_eq!(effective_rank(&DenseMatrix::identity(n), 0.9).unwrap(), want);
        }
    }

    #[test]
    fn zero_matrix_rejected() {
        assert!(effective_rank(&DenseMatrix::zeros(3, 3), 0.9).is_err());
        assert!(effective_rank(&DenseMatrix::identity(3), 0.0).is_err());
        assert!(effective_rank(&DenseMatrix::identity(3), 1.5).is_err());
    }

    #[test]
    fn wide_matrix_uses_row_gram() {
        let x = DenseMatrix::from_rows(&[vec![3.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(gram_matrix(&x).rows(), 2);
        assert_eq!(squared_singular_values(&x).unwrap(), vec![9.0, 1.0]);
        assert_eq!(effective_rank(&x, 0.9).unwrap(), 1);
        assert_eq!(effective_rank(&x, 0.95).unwrap(), 2);
    }
}
