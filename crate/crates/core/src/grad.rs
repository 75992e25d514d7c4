//! Backward pass through sparse-feature attention, the output-matching
//! regularizer, and central and five-point finite differences for checking both.
//!
//! Gradients reach the dense query/key inputs only through the coordinates
//! that Top-k selected (straight-through rule); every other coordinate gets an
//! exact zero. The backward pass does not keep the attention weights from the
//! forward pass: it recomputes score tiles from the saved per-row log-sum-exp.
//! Query gradients are produced by a pass partitioned over query tiles and
//! key/value gradients by a pass partitioned over key tiles, so every output
//! row has exactly one writer.

use std::ops::Range;

use crate::attention::tile::{score_tile, PostingSource, TileCounts};
use crate::attention::binary_search_range;
use crate::attention::{forward_with_stats, run_blocks, visible_limit, Prepared};
use crate::attention::{AttentionConfig, AttentionInstance, Mask, Precision};
use crate::error::{invalid_arg, Result, SfaError};
use crate::sparse::{DenseMatrix, SparseRowMatrix};

/// Gradients of a scalar loss with respect to the attention inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBundle {
    /// `n x d`, zero outside each query's support.
    pub dq: DenseMatrix,
    /// `n x d`, zero outside each key's support.
    pub dk: DenseMatrix,
    pub dv: DenseMatrix,
    /// The upstream gradient the bundle was computed for.
    pub d_o_in: DenseMatrix,
}

struct BackwardCtx<'a> {
    prep: Prepared<'a, f64>,
    mask: Mask,
    n: usize,
    d_v: usize,
    scale: f64,
    lse: Vec<f64>,
    /// `dO_i . O_i` per row
    delta: Vec<f64>,
    d_o: &'a [f64],
    /// CSR position in K of every posting entry
    key_slot: Vec<usize>,
    k_indptr: &'a [usize],
}

impl BackwardCtx<'_> {
    /// Turns a freshly scored tile into `dS` in place, optionally handing every
    /// `(r, c, P_ij)` to `on_weight` first.
    fn scores_to_ds(
        &self,
        rows: Range<usize>,
        cols: Range<usize>,
        tile: &mut [f64],
        mut on_weight: impl FnMut(usize, usize, f64),
    ) {
        let width = cols.len();
        let v = self.prep.v.as_slice();
        for (r, i) in rows.enumerate() {
            let limit = visible_limit(self.mask, i, self.n, self.n);
            let d_oi = &self.d_o[i * self.d_v..(i + 1) * self.d_v];
            for (c, j) in cols.clone().enumerate() {
                let s = &mut tile[r * width + c];
                if limit.is_none_or(|lim| j > lim) {
                    *s = 0.0;
                    continue;
                }
                let p = (*s - self.lse[i]).exp();
                on_weight(r, c, p);
                let vj = &v[j * self.d_v..(j + 1) * self.d_v];
                let dp: f64 = d_oi.iter().zip(vj).map(|(a, b)| a * b).sum();
                *s = p * (dp - self.delta[i]);
            }
        }
    }

    /// Skips tile pairs that lie entirely above the causal diagonal.
    fn tile_visible(&self, rows: &Range<usize>, cols: &Range<usize>) -> bool {
        visible_limit(self.mask, rows.end - 1, self.n, self.n).is_some_and(|lim| lim >= cols.start)
    }
}

struct QueryTask<'a> {
    rows: Range<usize>,
    dq: &'a mut [f64],
}

struct KeyTask<'a> {
    cols: Range<usize>,
    dk: &'a mut [f64],
    dv: &'a mut [f64],
}

fn query_pass(ctx: &BackwardCtx<'_>, task: &mut QueryTask<'_>, tile: &mut [f64], tile_cols: usize) {
    let q = ctx.prep.q_view();
    let keys = ctx.prep.keys();
    let base = ctx.prep.q.indptr()[task.rows.start];
    let mut counts = TileCounts::default();
    let mut j0 = 0;
    while j0 < ctx.n {
        let cols = j0..(j0 + tile_cols).min(ctx.n);
        if !ctx.tile_visible(&task.rows, &cols) {
            break;
        }
        score_tile(&q, &keys, task.rows.clone(), cols.clone(), ctx.scale, tile, &mut counts);
        ctx.scores_to_ds(task.rows.clone(), cols.clone(), tile, |_, _, _| {});
        let width = cols.len();
        for (r, i) in task.rows.clone().enumerate() {
            let ds_row = &tile[r * width..(r + 1) * width];
            let (lo, hi) = (q.indptr[i], q.indptr[i + 1]);
            for slot in lo..hi {
                let (list, kvals) = keys.postings(q.indices[slot] as usize);
                let (pl, pr) = binary_search_range(list, cols.start as u32, cols.end as u32);
                let mut acc = 0.0;
                for p in pl..pr {
                    acc += ds_row[list[p] as usize - cols.start] * kvals[p];
                }
                task.dq[slot - base] += acc * ctx.scale;
            }
        }
        j0 = cols.end;
    }
}

fn key_pass(
    ctx: &BackwardCtx<'_>,
    task: &mut KeyTask<'_>,
    tile: &mut [f64],
    tile_rows: usize,
) {
    let q = ctx.prep.q_view();
    let keys = ctx.prep.keys();
    let cols = task.cols.clone();
    let width = cols.len();
    let k_base = ctx.k_indptr[cols.start];
    let mut counts = TileCounts::default();
    let mut i0 = 0;
    while i0 < ctx.n {
        let rows = i0..(i0 + tile_rows).min(ctx.n);
        i0 = rows.end;
        if !ctx.tile_visible(&rows, &cols) {
            continue;
        }
        score_tile(&q, &keys, rows.clone(), cols.clone(), ctx.scale, tile, &mut counts);
        let d_v = ctx.d_v;
        let dv = &mut *task.dv;
        ctx.scores_to_ds(rows.clone(), cols.clone(), tile, |r, c, p| {
            let i = rows.start + r;
            let d_oi = &ctx.d_o[i * d_v..(i + 1) * d_v];
            for (acc, &g) in dv[c * d_v..(c + 1) * d_v].iter_mut().zip(d_oi) {
                *acc += p * g;
            }
        });
        for (r, i) in rows.clone().enumerate() {
            let ds_row = &tile[r * width..(r + 1) * width];
            let (features, qvals) = q.row(i);
            for (&f, &qv) in features.iter().zip(qvals) {
                let (list, _) = keys.postings(f as usize);
                let (pl, pr) = binary_search_range(list, cols.start as u32, cols.end as u32);
                let offset = keys.indptr[f as usize];
                for p in pl..pr {
                    let g = ds_row[list[p] as usize - cols.start] * qv * ctx.scale;
                    task.dk[ctx.key_slot[offset + p] - k_base] += g;
                }
            }
        }
    }
}

/// Gradients of `<dO, O>` where `O` is the sparse-feature attention output.
///
/// `dq`/`dk` are the gradients with respect to the dense pre-Top-k inputs
/// under the straight-through rule. Computed in fp64 whatever `cfg.precision`
/// says.
pub fn sfa_backward(
    qt: &SparseRowMatrix,
    kt: &SparseRowMatrix,
    v: &DenseMatrix,
    mask: Mask,
    d_o: &DenseMatrix,
    cfg: &AttentionConfig,
) -> Result<GradBundle> {
    let n = qt.rows();
    if d_o.rows() != n || d_o.cols() != v.cols() {
        return Err(invalid_arg!(
            "upstream gradient is {}x{}, output is {}x{}",
            d_o.rows(),
            d_o.cols(),
            n,
            v.cols()
        ));
    }
    let cfg = AttentionConfig {
        n,
        d: qt.cols(),
        d_v: v.cols(),
        mask,
        batch: 1,
        heads: 1,
        precision: Precision::Fp64,
        tile_rows: cfg.tile_rows.clamp(1, n.max(1)),
        tile_cols: cfg.tile_cols.clamp(1, n.max(1)),
        ..cfg.clone()
    };
    let inst = AttentionInstance { q: qt, k: kt, v };
    let fwd = forward_with_stats(&[inst], &cfg)?;
    let out = &fwd.output.outputs[0];
    let d_v = cfg.d_v;
    let delta = (0..n)
        .map(|i| d_o.row(i).iter().zip(out.row(i)).map(|(a, b)| a * b).sum())
        .collect();

    let prep = Prepared::<f64>::new(&inst);
    let mut key_slot = vec![0usize; kt.nnz()];
    for f in 0..prep.postings.num_features() {
        let (list, _) = prep.postings.postings(f);
        let offset = prep.postings.indptr()[f];
        for (p, &j) in list.iter().enumerate() {
            let rank = kt.row_indices(j as usize).binary_search(&(f as u32)).unwrap();
            key_slot[offset + p] = kt.indptr()[j as usize] + rank;
        }
    }
    let ctx = BackwardCtx {
        prep,
        mask,
        n,
        d_v,
        scale: 1.0 / (cfg.d as f64).sqrt(),
        lse: fwd.lse.into_iter().next().unwrap(),
        delta,
        d_o: d_o.values(),
        key_slot,
        k_indptr: kt.indptr(),
    };

    let mut dq_vals = vec![0.0; qt.nnz()];
    {
        let mut tasks = Vec::new();
        let mut rest = dq_vals.as_mut_slice();
        let mut i0 = 0;
        while i0 < n {
            let rows = i0..(i0 + cfg.tile_rows).min(n);
            let len = qt.indptr()[rows.end] - qt.indptr()[rows.start];
            let (head, tail) = rest.split_at_mut(len);
            rest = tail;
            i0 = rows.end;
            tasks.push(QueryTask { rows, dq: head });
        }
        run_blocks(&mut tasks, cfg.workers, |block| {
            let mut tile = vec![0.0; cfg.tile_rows * cfg.tile_cols];
            for task in block.iter_mut() {
                query_pass(&ctx, task, &mut tile, cfg.tile_cols);
            }
        });
    }

    let mut dk_vals = vec![0.0; kt.nnz()];
    let mut dv_vals = vec![0.0; n * d_v];
    {
        let mut tasks = Vec::new();
        let mut dk_rest = dk_vals.as_mut_slice();
        let mut dv_rest = dv_vals.as_mut_slice();
        let mut j0 = 0;
        while j0 < n {
            let cols = j0..(j0 + cfg.tile_cols).min(n);
            let len = kt.indptr()[cols.end] - kt.indptr()[cols.start];
            let (dk, tail) = dk_rest.split_at_mut(len);
            dk_rest = tail;
            let (dv, tail) = dv_rest.split_at_mut(cols.len() * d_v);
            dv_rest = tail;
            j0 = cols.end;
            tasks.push(KeyTask { cols, dk, dv });
        }
        run_blocks(&mut tasks, cfg.workers, |block| {
            let mut tile = vec![0.0; cfg.tile_rows * cfg.tile_cols];
            for task in block.iter_mut() {
                key_pass(&ctx, task, &mut tile, cfg.tile_rows);
            }
        });
    }

    let scatter = |m: &SparseRowMatrix, vals: Vec<f64>| -> Result<DenseMatrix> {
        Ok(crate::sparse::densify(&m.with_values(vals)?))
    };
    Ok(GradBundle {
        dq: scatter(qt, dq_vals)?,
        dk: scatter(kt, dk_vals)?,
        dv: DenseMatrix::from_vec_unchecked(n, d_v, dv_vals),
        d_o_in: d_o.clone(),
    })
}

/// Output-matching regularizer over heads:
/// `lambda / H * sum_h ||O_sparse_h - O_dense_h||_F^2`.
///
/// The dense outputs are constants; only the sparse side gets a gradient,
/// `2 lambda / H * (O_sparse_h - O_dense_h)`. With `mean_reduction` the sum of
/// squares of each head is also divided by its element count.
pub fn regularizer_loss(
    sparse_outputs: &[DenseMatrix],
    dense_outputs: &[DenseMatrix],
    lambda: f64,
    mean_reduction: bool,
) -> Result<(f64, Vec<DenseMatrix>)> {
    if sparse_outputs.is_empty() || sparse_outputs.len() != dense_outputs.len() {
        return Err(invalid_arg!(
            "need the same non-zero number of heads, got {} and {}",
            sparse_outputs.len(),
            dense_outputs.len()
        ));
    }
    if !(lambda >= 0.0) {
        return Err(invalid_arg!("lambda must be non-negative, got {lambda}"));
    }
    let heads = sparse_outputs.len() as f64;
    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(sparse_outputs.len());
    for (s, d) in sparse_outputs.iter().zip(dense_outputs) {
        if (s.rows(), s.cols()) != (d.rows(), d.cols()) {
            return Err(invalid_arg!(
                "head shapes differ: {}x{} vs {}x{}",
                s.rows(),
                s.cols(),
                d.rows(),
                d.cols()
            ));
        }
        let norm = if mean_reduction {
            (s.rows() * s.cols()).max(1) as f64
        } else {
            1.0
        };
        let coeff = lambda / heads / norm;
        let diff: Vec<f64> = s.values().iter().zip(d.values()).map(|(a, b)| a - b).collect();
        loss += coeff * diff.iter().map(|x| x * x).sum::<f64>();
        grads.push(DenseMatrix::from_vec_unchecked(
            s.rows(),
            s.cols(),
            diff.iter().map(|x| 2.0 * coeff * x).collect(),
        ));
    }
    Ok((loss, grads))
}

/// Central differences `(f(x + h e) - f(x - h e)) / 2h`, one entry at a time.
pub fn finite_diff_grad(
    f: impl Fn(&DenseMatrix) -> f64,
    x: &DenseMatrix,
    step: f64,
) -> Result<DenseMatrix> {
    stencil_grad(f, x, step, &[(1.0, 1.0 / 2.0)])
}

/// Fourth-order central differences
/// `(-f(x + 2h) + 8 f(x + h) - 8 f(x - h) + f(x - 2h)) / 12h`.
pub fn finite_diff_grad_five_point(
    f: impl Fn(&DenseMatrix) -> f64,
    x: &DenseMatrix,
    step: f64,
) -> Result<DenseMatrix> {
    stencil_grad(f, x, step, &[(1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)])
}

/// Antisymmetric stencil: `sum_t w_t (f(x + o_t h) - f(x - o_t h)) / h`.
fn stencil_grad(
    f: impl Fn(&DenseMatrix) -> f64,
    x: &DenseMatrix,
    step: f64,
    taps: &[(f64, f64)],
) -> Result<DenseMatrix> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid_arg!("step must be positive, got {step}"));
    }
    let mut probe = x.clone();
    let mut grad = vec![0.0; x.values().len()];
    for (idx, g) in grad.iter_mut().enumerate() {
        let orig = x.values()[idx];
        let mut acc = 0.0;
        for &(offset, weight) in taps {
            probe.values_mut()[idx] = orig + offset * step;
            let plus = f(&probe);
            probe.values_mut()[idx] = orig - offset * step;
            let minus = f(&probe);
            if !plus.is_finite() || !minus.is_finite() {
                return Err(SfaError::NumericFailure(format!(
                    "objective is not finite around entry {idx}"
                )));
            }
            acc += weight * (plus - minus);
        }
        probe.values_mut()[idx] = orig;
        *g = acc / step;
    }
    Ok(DenseMatrix::from_vec_unchecked(x.rows(), x.cols(), grad))
}

/// Relative difference used by the gradient checks:
/// `|a - b| / max(|a|, |b|)`, or 0 when both are exactly zero.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::naive_sfa_reference;
    use crate::gen::generate_inputs;
    use crate::sparse::topk_sparsify;

    /// Sparse matrix with the support of `s` and values read from dense `x`.
    fn on_support(s: &SparseRowMatrix, x: &DenseMatrix) -> SparseRowMatrix {
        let vals = (0..s.rows())
            .flat_map(|i| s.row_indices(i).iter().map(move |&f| x.get(i, f as usize)))
            .collect();
        s.with_values(vals).unwrap()
    }

    fn inner(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
    }

    fn assert_close(analytic: &DenseMatrix, numeric: &DenseMatrix, rtol: f64) {
        for (a, b) in analytic.values().iter().zip(numeric.values()) {
            let ok = relative_error(*a, *b) <= rtol || (a - b).abs() <= 1e-9;
            assert!(ok, "analytic {a} vs numeric {b}");
        }
    }

    #[test]
    fn matches_finite_differences() {
        for (seed, mask) in [(1, Mask::None), (2, Mask::Causal), (3, Mask::Causal)] {
            let cfg = AttentionConfig::new(12, 6, 4, 2).with_tiles(5, 4);
            let (q, k, v) = generate_inputs(&cfg, seed);
            let (qs, ks) = (topk_sparsify(&q, 2).unwrap(), topk_sparsify(&k, 2).unwrap());
            let d_o = crate::gen::InputRng::new(seed, 99).matrix(12, 4);
            let g = sfa_backward(&qs, &ks, &v, mask, &d_o, &cfg).unwrap();

            let loss = |qx: &DenseMatrix, kx: &DenseMatrix, vx: &DenseMatrix| {
                let o = naive_sfa_reference(&on_support(&qs, qx), &on_support(&ks, kx), vx, mask, Precision::Fp64)
                    .unwrap();
                inner(&d_o, &o)
            };
            let h = 1e-5;
            assert_close(&g.dq, &finite_diff_grad(|x| loss(x, &k, &v), &q, h).unwrap(), 1e-5);
            assert_close(&g.dk, &finite_diff_grad(|x| loss(&q, x, &v), &k, h).unwrap(), 1e-5);
            assert_close(&g.dv, &finite_diff_grad(|x| loss(&q, &k, x), &v, h).unwrap(), 1e-5);

            for i in 0..12 {
                for f in 0..6u32 {
                    if qs.get(i, f).is_none() {
                        assert_eq!(g.dq.get(i, f as usize).to_bits(), 0.0f64.to_bits());
                    }
                    if ks.get(i, f).is_none() {
                        assert_eq!(g.dk.get(i, f as usize).to_bits(), 0.0f64.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let cfg = AttentionConfig::new(9, 8, 3, 3);
        let (q, k, v) = generate_inputs(&cfg, 5);
        let (qs, ks) = (topk_sparsify(&q, 3).unwrap(), topk_sparsify(&k, 3).unwrap());
        let g = sfa_backward(&qs, &ks, &v, Mask::Causal, &DenseMatrix::zeros(9, 3), &cfg).unwrap();
        for m in [&g.dq, &g.dk, &g.dv] {
            assert!(m.values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn single_token_passes_gradient_to_values_only() {
        let qs = SparseRowMatrix::from_row_entries(3, &[vec![(1, 0.7)]]).unwrap();
        let ks = SparseRowMatrix::from_row_entries(3, &[vec![(1, -0.4)]]).unwrap();
        let v = DenseMatrix::from_rows(&[vec![2.0, -1.0]]).unwrap();
        let d_o = DenseMatrix::from_rows(&[vec![0.5, 3.0]]).unwrap();
        let cfg = AttentionConfig::new(1, 3, 2, 1);
        let g = sfa_backward(&qs, &ks, &v, Mask::Causal, &d_o, &cfg).unwrap();
        assert_eq!(g.dv, d_o);
        assert!(g.dq.values().iter().chain(g.dk.values()).all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn linear_in_upstream_gradient() {
        let cfg = AttentionConfig::new(10, 8, 5, 4).with_tiles(3, 4);
        let (q, k, v) = generate_inputs(&cfg, 8);
        let (qs, ks) = (topk_sparsify(&q, 4).unwrap(), topk_sparsify(&k, 4).unwrap());
        let a = crate::gen::InputRng::new(1, 1).matrix(10, 5);
        let b = crate::gen::InputRng::new(1, 2).matrix(10, 5);
        let sum = DenseMatrix::from_fn(10, 5, |i, j| 2.0 * a.get(i, j) - 3.0 * b.get(i, j));
        let ga = sfa_backward(&qs, &ks, &v, Mask::None, &a, &cfg).unwrap();
        let gb = sfa_backward(&qs, &ks, &v, Mask::None, &b, &cfg).unwrap();
        let gs = sfa_backward(&qs, &ks, &v, Mask::None, &sum, &cfg).unwrap();
        let pairs = [(&ga.dq, &gb.dq, &gs.dq), (&ga.dk, &gb.dk, &gs.dk), (&ga.dv, &gb.dv, &gs.dv)];
        for (x, y, s) in pairs {
            for ((xa, yb), sv) in x.values().iter().zip(y.values()).zip(s.values()) {
                assert!((2.0 * xa - 3.0 * yb - sv).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_gradients() {
        let cfg = AttentionConfig::new(40, 16, 8, 4).with_tiles(8, 8);
        let (q, k, v) = generate_inputs(&cfg, 3);
        let (qs, ks) = (topk_sparsify(&q, 4).unwrap(), topk_sparsify(&k, 4).unwrap());
        let d_o = crate::gen::InputRng::new(3, 7).matrix(40, 8);
        let one = sfa_backward(&qs, &ks, &v, Mask::Causal, &d_o, &cfg).unwrap();
        let many = sfa_backward(&qs, &ks, &v, Mask::Causal, &d_o, &cfg.clone().with_workers(4)).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn rejects_mismatched_upstream() {
        let qs = SparseRowMatrix::from_row_entries(3, &[vec![(1, 0.7)]]).unwrap();
        let v = DenseMatrix::zeros(1, 2);
        let cfg = AttentionConfig::new(1, 3, 2, 1);
        let err = sfa_backward(&qs, &qs, &v, Mask::None, &DenseMatrix::zeros(1, 3), &cfg);
        assert!(matches!(err, Err(SfaError::InvalidArgument(_))));
    }

    #[test]
    fn regularizer_examples() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let (loss, grads) = regularizer_loss(&[s.clone()], &[DenseMatrix::zeros(2, 2)], 1.0, false).unwrap();
        assert_eq!(loss, 4.0);
        assert!(grads[0].values().iter().all(|&g| g == 2.0));

        let (loss, _) = regularizer_loss(&[s.clone()], &[s.clone()], 3.0, false).unwrap();
        assert_eq!(loss, 0.0);
        let (loss, grads) = regularizer_loss(&[s.clone()], &[DenseMatrix::zeros(2, 2)], 1.0, true).unwrap();
        assert_eq!(loss, 1.0);
        assert!(grads[0].values().iter().all(|&g| g == 0.5));

        assert!(regularizer_loss(&[], &[], 1.0, false).is_err());
        assert!(regularizer_loss(&[s.clone()], &[DenseMatrix::zeros(1, 2)], 1.0, false).is_err());
        assert!(regularizer_loss(&[s.clone()], &[s], -1.0, false).is_err());
    }

    #[test]
    fn regularizer_gradient_matches_finite_differences() {
        let heads: Vec<DenseMatrix> = (0..3).map(|h| crate::gen::InputRng::new(4, h).matrix(5, 3)).collect();
        let targets: Vec<DenseMatrix> = (0..3).map(|h| crate::gen::InputRng::new(5, h).matrix(5, 3)).collect();
        for mean in [false, true] {
            let (_, grads) = regularizer_loss(&heads, &targets, 0.7, mean).unwrap();
            for h in 0..3 {
                let f = |x: &DenseMatrix| {
                    let mut hs = heads.clone();
                    hs[h] = x.clone();
                    regularizer_loss(&hs, &targets, 0.7, mean).unwrap().0
                };
                let numeric = finite_diff_grad(f, &heads[h], 1e-4).unwrap();
                assert_close(&grads[h], &numeric, 1e-6);
            }
        }
    }

    #[test]
    fn finite_diff_examples() {
        let x = DenseMatrix::from_rows(&[vec![1.5, -2.0]]).unwrap();
        let g = finite_diff_grad(|m| m.get(0, 0) * m.get(0, 0) + 3.0 * m.get(0, 1), &x, 1e-3).unwrap();
        assert!((g.get(0, 0) - 3.0).abs() < 1e-9);
        assert!((g.get(0, 1) - 3.0).abs() < 1e-9);
        assert!(finite_diff_grad(|_| 0.0, &x, 0.0).is_err());
        // exact for polynomials up to degree four
        let quartic = |m: &DenseMatrix| m.get(0, 0).powi(4) - m.get(0, 1).powi(3);
        let g = finite_diff_grad_five_point(quartic, &x, 1e-2).unwrap();
        assert!((g.get(0, 0) - 4.0 * 1.5f64.powi(3)).abs() < 1e-10);
        assert!((g.get(0, 1) + 3.0 * 4.0).abs() < 1e-10);
        assert!(matches!(
            finite_diff_grad(|_| f64::NAN, &x, 1e-3),
            Err(SfaError::NumericFailure(_))
        ));
    }

    #[test]
    fn relative_error_cases() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert_eq!(relative_error(2.0, 1.0), 0.5);
        assert_eq!(relative_error(-1.0, 1.0), 2.0);
    }
}
