//! Deterministic synthetic inputs.
//!
//! All matrices come from a ChaCha8 stream keyed by the seed. Each entry is an
//! Irwin-Hall sum of twelve 53-bit uniforms minus six, which has mean 0 and
//! variance 1. Only integer operations and IEEE additions are involved, so the
//! same seed yields bitwise-identical matrices on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attention::AttentionConfig;
use crate::sparse::{DenseMatrix, SparseRowMatrix};

/// Stream ids separating the matrices generated from one seed.
const STREAM_Q: u64 = 1;
const STREAM_K: u64 = 2;
const STREAM_V: u64 = 3;

/// Gaussian-like sampler on top of a seeded ChaCha8 stream.
pub struct InputRng {
    rng: ChaCha8Rng,
}

impl InputRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let mut s = 0.0;
        for _ in 0..12 {
            s += self.uniform();
        }
        s - 6.0
    }

    /// Uniform integer in `0..bound` (`bound >= 1`).
    pub fn below(&mut self, bound: u64) -> u64 {
        // Lemire's multiply-shift; bias is < bound / 2^64
        ((self.rng.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| self.normal())
    }
}

/// `(Q, K, V)` for one attention instance: `n x d`, `n x d`, `n x d_v`.
pub fn generate_inputs(cfg: &AttentionConfig, seed: u64) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    generate_instance(cfg, seed, 0)
}

/// Inputs of instance `index` (in `batch * heads` order) for `seed`.
pub fn generate_instance(
    cfg: &AttentionConfig,
    seed: u64,
    index: u64,
) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let stream = |s: u64| index * 4 + s;
    (
        InputRng::new(seed, stream(STREAM_Q)).matrix(cfg.n, cfg.d),
        InputRng::new(seed, stream(STREAM_K)).matrix(cfg.n, cfg.d),
        InputRng::new(seed, stream(STREAM_V)).matrix(cfg.n, cfg.d_v),
    )
}

/// `n x d` sparse matrix in which every feature is used by exactly `n*k/d`
/// rows. Row `i` takes the `k` consecutive features starting at `i*k mod d`.
/// Requires `d` to divide `n*k`; values are Gaussian-like.
pub fn balanced_support_matrix(n: usize, d: usize, k: usize, seed: u64) -> SparseRowMatrix {
    assert!(k >= 1 && k <= d && (n * k) % d == 0, "need 1 <= k <= d and d | n*k");
    let mut rng = InputRng::new(seed, 0);
    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .map(|i| {
            (0..k)
                .map(|t| (((i * k + t) % d) as u32, rng.normal()))
                .collect()
        })
        .collect();
    SparseRowMatrix::from_row_entries(d, &rows).expect("balanced supports are valid")
}

/// Every row has its mass on the first `k` features (plus small noise elsewhere),
/// so Top-k always selects features `0..k`.
pub fn fixed_support_matrix(n: usize, d: usize, k: usize, seed: u64) -> DenseMatrix {
    let mut rng = InputRng::new(seed, 0);
    DenseMatrix::from_fn(n, d, |_, j| {
        let noise = 0.01 * (rng.uniform() - 0.5);
        if j < k {
            10.0 + rng.uniform()
        } else {
            noise
        }
    })
}

/// Sum of `rank` outer products `u_r v_r^T` of orthonormal vectors, so the
/// matrix has exactly `rank` singular values, all equal to 1.
/// Requires `rank <= min(rows, cols)`.
pub fn low_rank_matrix(rows: usize, cols: usize, rank: usize, seed: u64) -> DenseMatrix {
    assert!(rank <= rows.min(cols), "rank exceeds matrix dimensions");
    let mut rng = InputRng::new(seed, 0);
    let left = orthonormal_columns(&mut rng, rows, rank);
    let right = orthonormal_columns(&mut rng, cols, rank);
    DenseMatrix::from_fn(rows, cols, |i, j| {
        (0..rank).map(|r| left[r][i] * right[r][j]).sum()
    })
}

/// `count` Gaussian vectors of length `len`, orthonormalized by modified
/// Gram-Schmidt (applied twice for stability).
fn orthonormal_columns(rng: &mut InputRng, len: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let mut v: Vec<f64> = (0..len).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for u in &out {
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, a)| *x -= dot * a);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}
