//! Tiled sparse-feature attention forward pass with online softmax.
//!
//! Work is split into partitions of `(instance, query-row tile)`. Each
//! partition owns its output rows, its running softmax state and (through its
//! worker) one score tile buffer, so no partition ever writes memory another
//! one reads. Partitions are assigned to workers in contiguous blocks; the
//! arithmetic of a partition does not depend on which worker runs it, so the
//! output is bitwise identical for every worker count.

use std::ops::Range;

use super::real::{convert, widen, Real};
use super::reference::visible_limit;
use super::tile::{score_tile, CsrView, PostingSource, PostingsView, TileCounts};
use super::{AttentionConfig, Mask, Precision};
use crate::cost::{
    dense_attention_flops, dense_score_flops, kv_cache_bytes, predicted_edges,
    SOFTMAX_FLOPS_PER_ENTRY,
};
use crate::error::{invalid_arg, Result, SfaError};
use crate::sparse::{
    build_feature_postings, DenseMatrix, FeaturePostings, MemoryModel, SparseRowMatrix,
};
use crate::CostReport;

/// One `(batch, head)` problem: sparse queries and keys plus dense values.
#[derive(Debug, Clone, Copy)]
pub struct AttentionInstance<'a> {
    pub q: &'a SparseRowMatrix,
    pub k: &'a SparseRowMatrix,
    pub v: &'a DenseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// One output matrix per instance, in input order.
    pub outputs: Vec<DenseMatrix>,
    pub report: CostReport,
}

/// Settings shared by every partition of a kernel launch.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelParams {
    pub mask: Mask,
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub d: usize,
    pub d_v: usize,
}

/// Counters accumulated by one worker.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct WorkCounts {
    pub tiles: TileCounts,
    /// unmasked score entries absorbed into the softmax
    pub absorbed: u64,
}

impl std::ops::AddAssign for WorkCounts {
    fn add_assign(&mut self, o: Self) {
        self.tiles += o.tiles;
        self.absorbed += o.absorbed;
    }
}

/// Per-row running softmax state for one query tile.
pub(crate) struct OnlineSoftmaxState<T> {
    pub max: Vec<T>,
    pub sum: Vec<T>,
}

impl<T: Real> OnlineSoftmaxState<T> {
    fn with_capacity(rows: usize) -> Self {
        Self {
            max: vec![T::neg_infinity(); rows],
            sum: vec![T::zero(); rows],
        }
    }

    fn reset(&mut self, rows: usize) {
        self.max[..rows].fill(T::neg_infinity());
        self.sum[..rows].fill(T::zero());
    }
}

/// Scratch owned by one worker, reused across its partitions.
pub(crate) struct Workspace<T> {
    pub scores: Vec<T>,
    pub state: OnlineSoftmaxState<T>,
}

impl<T: Real> Workspace<T> {
    pub fn new(tile_rows: usize, tile_cols: usize) -> Self {
        Self {
            scores: vec![T::zero(); tile_rows * tile_cols],
            state: OnlineSoftmaxState::with_capacity(tile_rows),
        }
    }
}

/// Runs the forward pass for query `rows`, writing `out` (`rows.len() x d_v`)
/// and the per-row log-sum-exp into `lse`.
///
/// Key tiles lying entirely above the causal diagonal are skipped; the
/// remaining tiles are scored, masked in place with `-inf` and absorbed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn forward_rows<T: Real, P: PostingSource<T> + ?Sized>(
    q: &CsrView<'_, T>,
    n_q: usize,
    keys: &P,
    v: &[T],
    params: &KernelParams,
    rows: Range<usize>,
    ws: &mut Workspace<T>,
    out: &mut [T],
    lse: &mut [T],
    counts: &mut WorkCounts,
) {
    let n_k = keys.num_keys();
    let nr = rows.len();
    let d_v = params.d_v;
    let scale = T::one() / T::cast(params.d as f64).sqrt();
    ws.state.reset(nr);
    out.fill(T::zero());

    let furthest = visible_limit(params.mask, rows.end - 1, n_q, n_k);
    if let Some(furthest) = furthest {
        let mut j0 = 0;
        while j0 <= furthest {
            let j1 = (j0 + params.tile_cols).min(n_k);
            let width = j1 - j0;
            score_tile(
                q,
                keys,
                rows.clone(),
                j0..j1,
                scale,
                &mut ws.scores,
                &mut counts.tiles,
            );
            let scores = &mut ws.scores[..nr * width];

            if params.mask == Mask::Causal {
                for (r, i) in rows.clone().enumerate() {
                    let row = &mut scores[r * width..(r + 1) * width];
                    match visible_limit(params.mask, i, n_q, n_k) {
                        Some(lim) if lim >= j1 - 1 => {}
                        Some(lim) if lim >= j0 => row[lim + 1 - j0..].fill(T::neg_infinity()),
                        _ => row.fill(T::neg_infinity()),
                    }
                }
            }

            for r in 0..nr {
                let s = &scores[r * width..(r + 1) * width];
                let tile_max = s.iter().copied().fold(T::neg_infinity(), T::max);
                if tile_max == T::neg_infinity() {
                    continue;
                }
                let m_old = ws.state.max[r];
                let m_new = m_old.max(tile_max);
                let o = &mut out[r * d_v..(r + 1) * d_v];
                if m_new > m_old {
                    // exp(-inf) = 0 on the first absorbed tile
                    let alpha = (m_old - m_new).exp();
                    ws.state.sum[r] *= alpha;
                    o.iter_mut().for_each(|x| *x *= alpha);
                }
                let mut sum = ws.state.sum[r];
                for (c, &sc) in s.iter().enumerate() {
                    if sc == T::neg_infinity() {
                        continue;
                    }
                    let p = (sc - m_new).exp();
                    sum += p;
                    let vj = &v[(j0 + c) * d_v..(j0 + c + 1) * d_v];
                    for (oc, &vc) in o.iter_mut().zip(vj) {
                        *oc += p * vc;
                    }
                    counts.absorbed += 1;
                }
                ws.state.sum[r] = sum;
                ws.state.max[r] = m_new;
            }
            j0 = j1;
        }
    }

    for r in 0..nr {
        let l = ws.state.sum[r];
        let o = &mut out[r * d_v..(r + 1) * d_v];
        if l > T::zero() {
            o.iter_mut().for_each(|x| *x = *x / l);
            lse[r] = ws.state.max[r] + l.ln();
        } else {
            o.fill(T::zero());
            lse[r] = T::neg_infinity();
        }
    }
}

/// Operands of one instance converted to working precision.
pub(crate) struct Prepared<'a, T> {
    pub q: &'a SparseRowMatrix,
    pub q_values: Vec<T>,
    pub postings: FeaturePostings,
    pub k_values: Vec<T>,
    pub v: Vec<T>,
}

impl<'a, T: Real> Prepared<'a, T> {
    pub fn new(inst: &AttentionInstance<'a>) -> Self {
        let postings = build_feature_postings(inst.k);
        Self {
            q: inst.q,
            q_values: convert(inst.q.values()),
            k_values: convert(postings.values()),
            postings,
            v: convert(inst.v.values()),
        }
    }

    pub fn q_view(&self) -> CsrView<'_, T> {
        CsrView {
            indptr: self.q.indptr(),
            indices: self.q.indices(),
            values: &self.q_values,
        }
    }

    pub fn keys(&self) -> PostingsView<'_, T> {
        PostingsView {
            num_keys: self.postings.num_keys(),
            indptr: self.postings.indptr(),
            key_indices: self.postings.key_indices(),
            values: &self.k_values,
        }
    }
}

struct Task<'a, T> {
    instance: usize,
    rows: Range<usize>,
    out: &'a mut [T],
    lse: &'a mut [T],
}

/// Splits `items` into at most `workers` contiguous blocks and runs `job` on
/// each block, on scoped threads when more than one block exists. Results come
/// back in block order.
pub(crate) fn run_blocks<I: Send, R: Send>(
    items: &mut [I],
    workers: usize,
    job: impl Fn(&mut [I]) -> R + Sync,
) -> Vec<R> {
    if items.is_empty() {
        return Vec::new();
    }
    let groups = workers.clamp(1, items.len());
    let per_group = items.len().div_ceil(groups);
    if groups == 1 {
        return vec![job(items)];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks_mut(per_group)
            .map(|block| {
                let job = &job;
                scope.spawn(move || job(block))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("attention worker panicked"))
            .collect()
    })
}

fn check_instance(inst: &AttentionInstance<'_>, cfg: &AttentionConfig) -> Result<()> {
    let n = cfg.n;
    if inst.q.rows() != n || inst.k.rows() != n || inst.v.rows() != n {
        return Err(invalid_arg!(
            "expected {n} rows for Q, K and V, got {}, {}, {}",
            inst.q.rows(),
            inst.k.rows(),
            inst.v.rows()
        ));
    }
    if inst.q.cols() != cfg.d || inst.k.cols() != cfg.d {
        return Err(invalid_arg!(
            "expected {} features, got {} (Q) and {} (K)",
            cfg.d,
            inst.q.cols(),
            inst.k.cols()
        ));
    }
    if inst.v.cols() != cfg.d_v {
        return Err(invalid_arg!(
            "expected value width {}, got {}",
            cfg.d_v,
            inst.v.cols()
        ));
    }
    Ok(())
}

pub(crate) fn check_transient_budget(cfg: &AttentionConfig) -> Result<()> {
    let bytes = (cfg.tile_rows * cfg.tile_cols * cfg.precision.value_bytes()) as u64;
    match cfg.max_transient_bytes {
        Some(limit) if bytes > limit => Err(SfaError::ResourceLimit(format!(
            "score tile {}x{} needs {bytes} bytes, budget is {limit}",
            cfg.tile_rows, cfg.tile_cols
        ))),
        _ => Ok(()),
    }
}

/// Forward output plus per-instance, per-row log-sum-exp (`-inf` for rows that
/// see no key).
pub(crate) struct ForwardWithStats {
    pub output: ForwardOutput,
    pub lse: Vec<Vec<f64>>,
}

fn forward_impl<T: Real>(
    instances: &[AttentionInstance<'_>],
    cfg: &AttentionConfig,
) -> ForwardWithStats {
    let n = cfg.n;
    let params = KernelParams {
        mask: cfg.mask,
        tile_rows: cfg.tile_rows,
        tile_cols: cfg.tile_cols,
        d: cfg.d,
        d_v: cfg.d_v,
    };
    let prepared: Vec<Prepared<'_, T>> = instances.iter().map(Prepared::new).collect();
    let mut outputs: Vec<Vec<T>> = vec![vec![T::zero(); n * cfg.d_v]; instances.len()];
    let mut lses: Vec<Vec<T>> = vec![vec![T::zero(); n]; instances.len()];

    let mut tasks: Vec<Task<'_, T>> = Vec::new();
    for (instance, (out, lse)) in outputs.iter_mut().zip(lses.iter_mut()).enumerate() {
        let out_chunks = out.chunks_mut(cfg.tile_rows * cfg.d_v);
        let lse_chunks = lse.chunks_mut(cfg.tile_rows);
        for (t, (out, lse)) in out_chunks.zip(lse_chunks).enumerate() {
            let start = t * cfg.tile_rows;
            tasks.push(Task {
                instance,
                rows: start..start + lse.len(),
                out,
                lse,
            });
        }
    }

    let per_worker = run_blocks(&mut tasks, cfg.workers, |block| {
        let mut ws = Workspace::<T>::new(params.tile_rows, params.tile_cols);
        let mut counts = WorkCounts::default();
        for task in block.iter_mut() {
            let p = &prepared[task.instance];
            forward_rows(
                &p.q_view(),
                n,
                &p.keys(),
                &p.v,
                &params,
                task.rows.clone(),
                &mut ws,
                task.out,
                task.lse,
                &mut counts,
            );
        }
        (counts, ws.scores.len())
    });

    let mut counts = WorkCounts::default();
    let mut transient_values = 0u64;
    for (c, buffer) in &per_worker {
        counts += *c;
        transient_values += *buffer as u64;
    }

    let (n64, d64, dv64) = (n as u64, cfg.d as u64, cfg.d_v as u64);
    let (b, h) = (cfg.batch as u64, cfg.heads as u64);
    let score_flops = 2 * counts.tiles.edges;
    let softmax_flops = SOFTMAX_FLOPS_PER_ENTRY * counts.absorbed;
    let value_flops = 2 * dv64 * counts.absorbed;
    let report = CostReport {
        measured_edges: counts.tiles.edges,
        measured_flops: score_flops + softmax_flops + value_flops,
        measured_inops: counts.tiles.inops,
        score_flops,
        softmax_flops,
        value_flops,
        predicted_edges: predicted_edges(n64, d64, cfg.k as u64) * b * h,
        dense_flops: dense_attention_flops(n64, d64, dv64, b, h),
        dense_score_flops: dense_score_flops(n64, d64, b, h),
        peak_transient_values: transient_values,
        peak_transient_bytes: transient_values * std::mem::size_of::<T>() as u64,
        kv_cache_bytes: kv_cache_bytes(n64, cfg.key_budget() as u64, dv64, MemoryModel::default())
            * b
            * h,
    };

    let outputs = outputs
        .iter()
        .map(|o| DenseMatrix::from_vec_unchecked(n, cfg.d_v, widen(o)))
        .collect();
    ForwardWithStats {
        output: ForwardOutput { outputs, report },
        lse: lses.iter().map(|l| widen(l)).collect(),
    }
}

pub(crate) fn forward_with_stats(
    instances: &[AttentionInstance<'_>],
    cfg: &AttentionConfig,
) -> Result<ForwardWithStats> {
    cfg.validate()?;
    if instances.len() != cfg.instances() {
        return Err(invalid_arg!(
            "expected batch*heads = {} instances, got {}",
            cfg.instances(),
            instances.len()
        ));
    }
    for inst in instances {
        check_instance(inst, cfg)?;
    }
    check_transient_budget(cfg)?;
    Ok(match cfg.precision {
        Precision::Fp64 => forward_impl::<f64>(instances, cfg),
        Precision::Fp32 => forward_impl::<f32>(instances, cfg),
    })
}

/// Forward pass over every `(batch, head)` instance of `cfg`.
pub fn flash_sfa_forward_batched(
    instances: &[AttentionInstance<'_>],
    cfg: &AttentionConfig,
) -> Result<ForwardOutput> {
    forward_with_stats(instances, cfg).map(|f| f.output)
}

/// Forward pass for a single instance. Never allocates more than one
/// `tile_rows x tile_cols` score buffer per worker.
pub fn flash_sfa_forward(
    qt: &SparseRowMatrix,
    kt: &SparseRowMatrix,
    v: &DenseMatrix,
    cfg: &AttentionConfig,
) -> Result<(DenseMatrix, CostReport)> {
    let cfg = AttentionConfig {
        batch: 1,
        heads: 1,
        ..cfg.clone()
    };
    let mut out = flash_sfa_forward_batched(&[AttentionInstance { q: qt, k: kt, v }], &cfg)?;
    Ok((out.outputs.remove(0), out.report))
}

/// Largest sequence length accepted by [`attention_weights_debug`].
pub const DEBUG_MAX_ROWS: usize = 256;

/// Recovers the attention weights as CSR: every unmasked `(i, j)` pair with its
/// softmax probability. Inspection only; the production path never forms this.
pub fn attention_weights_debug(
    qt: &SparseRowMatrix,
    kt: &SparseRowMatrix,
    cfg: &AttentionConfig,
) -> Result<SparseRowMatrix> {
    let n = qt.rows();
    if n > DEBUG_MAX_ROWS {
        return Err(invalid_arg!(
            "debug weights are limited to {DEBUG_MAX_ROWS} rows, got {n}"
        ));
    }
    let v = DenseMatrix::zeros(n, 1);
    let cfg = AttentionConfig {
        d_v: 1,
        batch: 1,
        heads: 1,
        precision: Precision::Fp64,
        ..cfg.clone()
    };
    let stats = forward_with_stats(&[AttentionInstance { q: qt, k: kt, v: &v }], &cfg)?;
    let lse = &stats.lse[0];

    let prepared = Prepared::<f64>::new(&AttentionInstance { q: qt, k: kt, v: &v });
    let mut tile = vec![0.0; n];
    let mut counts = TileCounts::default();
    let scale = 1.0 / (cfg.d as f64).sqrt();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut entries = Vec::new();
        if let Some(limit) = visible_limit(cfg.mask, i, n, kt.rows()) {
            score_tile(
                &prepared.q_view(),
                &prepared.keys(),
                i..i + 1,
                0..limit + 1,
                scale,
                &mut tile,
                &mut counts,
            );
            for (j, &s) in tile[..=limit].iter().enumerate() {
                entries.push((j as u32, (s - lse[i]).exp()));
            }
        }
        rows.push(entries);
    }
    SparseRowMatrix::from_row_entries(kt.rows(), &rows)
}
