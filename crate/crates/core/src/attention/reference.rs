//! Fully materializing attention, used as the correctness oracle.

use super::real::{convert, widen, Real};
use super::{Mask, Precision};
use crate::error::{invalid_arg, Result};
use crate::sparse::{densify, DenseMatrix, SparseRowMatrix};

/// Last key index visible to query `i`, or `None` if every key is masked.
pub(crate) fn visible_limit(mask: Mask, i: usize, n_q: usize, n_k: usize) -> Option<usize> {
    match mask {
        Mask::None => n_k.checked_sub(1),
        Mask::Causal => (i + n_k).checked_sub(n_q).map(|lim| lim.min(n_k - 1)),
    }
}

fn check_shapes(q: &DenseMatrix, k: &DenseMatrix, v: &DenseMatrix) -> Result<()> {
    if q.cols() != k.cols() {
        return Err(invalid_arg!(
            "query width {} differs from key width {}",
            q.cols(),
            k.cols()
        ));
    }
    if k.rows() != v.rows() {
        return Err(invalid_arg!(
            "{} keys but {} value rows",
            k.rows(),
            v.rows()
        ));
    }
    if q.cols() == 0 {
        return Err(invalid_arg!("feature dimension must be >= 1"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn dense_attention_impl<T: Real>(
    q: &[T],
    k: &[T],
    v: &[T],
    n_q: usize,
    n_k: usize,
    d: usize,
    d_v: usize,
    mask: Mask,
) -> Vec<T> {
    let scale = T::one() / T::cast(d as f64).sqrt();
    // the full score matrix is materialized on purpose
    let mut scores = vec![T::neg_infinity(); n_q * n_k];
    for i in 0..n_q {
        let Some(limit) = visible_limit(mask, i, n_q, n_k) else {
            continue;
        };
        let qi = &q[i * d..(i + 1) * d];
        for j in 0..=limit {
            let kj = &k[j * d..(j + 1) * d];
            let mut dot = T::zero();
            for u in 0..d {
                dot += qi[u] * kj[u];
            }
            scores[i * n_k + j] = dot * scale;
        }
    }

    let mut out = vec![T::zero(); n_q * d_v];
    for i in 0..n_q {
        let row = &mut scores[i * n_k..(i + 1) * n_k];
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        if max == T::neg_infinity() {
            continue;
        }
        let mut sum = T::zero();
        for s in row.iter_mut() {
            *s = (*s - max).exp();
            sum += *s;
        }
        let o = &mut out[i * d_v..(i + 1) * d_v];
        for (j, &e) in row.iter().enumerate() {
            if e == T::zero() {
                continue;
            }
            let p = e / sum;
            for (oc, &vc) in o.iter_mut().zip(&v[j * d_v..(j + 1) * d_v]) {
                *oc += p * vc;
            }
        }
    }
    out
}

/// `softmax(Q K^T / sqrt(d) + mask) V` with the full score matrix in memory.
///
/// Rows whose keys are all masked produce a zero output row.
pub fn dense_attention_reference(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    mask: Mask,
    precision: Precision,
) -> Result<DenseMatrix> {
    check_shapes(q, k, v)?;
    let (n_q, n_k, d, d_v) = (q.rows(), k.rows(), q.cols(), v.cols());
    let out = match precision {
        Precision::Fp64 => dense_attention_impl::<f64>(
            q.values(),
            k.values(),
            v.values(),
            n_q,
            n_k,
            d,
            d_v,
            mask,
        ),
        Precision::Fp32 => widen(&dense_attention_impl::<f32>(
            &convert(q.values()),
            &convert(k.values()),
            &convert(v.values()),
            n_q,
            n_k,
            d,
            d_v,
            mask,
        )),
    };
    Ok(DenseMatrix::from_vec_unchecked(n_q, d_v, out))
}

/// Sparse-feature attention computed by densifying the sparse operands and
/// running [`dense_attention_reference`]. Pairs with no shared feature get a
/// zero logit, so they still receive softmax mass.
pub fn naive_sfa_reference(
    qt: &SparseRowMatrix,
    kt: &SparseRowMatrix,
    v: &DenseMatrix,
    mask: Mask,
    precision: Precision,
) -> Result<DenseMatrix> {
    if qt.cols() != kt.cols() {
        return Err(invalid_arg!(
            "query width {} differs from key width {}",
            qt.cols(),
            kt.cols()
        ));
    }
    dense_attention_reference(&densify(qt), &densify(kt), v, mask, precision)
}
