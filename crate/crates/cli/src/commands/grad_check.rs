//! Finite-difference checks of the backward pass and the output-matching
//! regularizer.
//!
//! Supports are frozen at the Top-k selection of the unperturbed inputs: the
//! objective reads the perturbed dense entries only at those coordinates, so
//! its true derivative off-support is zero and on-support it is exactly what
//! the straight-through backward computes.

use serde::Serialize;
use sfa_core::gen::InputRng;
use sfa_core::grad::{finite_diff_grad_five_point, regularizer_loss, sfa_backward};
use sfa_core::{
    dense_attention_reference, flash_sfa_forward, naive_sfa_reference, AttentionConfig,
    DenseMatrix, Mask, Precision, SparseRowMatrix,
};

use super::make_inputs;
use crate::args::GradCheckArgs;
use crate::error::CliError;
use crate::settings::Settings;

pub const GRAD_RTOL: f64 = 1e-5;
pub const REG_RTOL: f64 = 1e-6;
/// Magnitude floor of the relative error: `|a - b| / max(|a|, |b|, floor)`.
/// The numeric gradient carries about `1e-12` of absolute rounding noise,
/// which would otherwise dominate entries that are themselves near zero.
pub const REL_FLOOR: f64 = 1e-4;
/// Step of the five-point stencil. Truncation error is `O(h^4)`.
pub const FD_STEP: f64 = 1e-3;
const REG_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GradRow {
    pub case: usize,
    pub n: usize,
    pub d: usize,
    pub dv: usize,
    pub k: usize,
    pub mask: Mask,
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub max_rel_err_dq: f64,
    pub max_rel_err_dk: f64,
    pub max_rel_err_dv: f64,
    pub max_rel_err_reg: f64,
    pub off_support_nonzero: u64,
    pub passed: bool,
}

/// Largest floored relative error over all entries.
pub fn max_rel_err(analytic: &DenseMatrix, numeric: &DenseMatrix) -> f64 {
    analytic
        .values()
        .iter()
        .zip(numeric.values())
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR))
        .fold(0.0, f64::max)
}

fn on_support(s: &SparseRowMatrix, x: &DenseMatrix) -> SparseRowMatrix {
    let vals = (0..s.rows())
        .flat_map(|i| s.row_indices(i).iter().map(move |&f| x.get(i, f as usize)))
        .collect();
    s.with_values(vals).expect("same support, same length")
}

fn off_support_nonzero(s: &SparseRowMatrix, g: &DenseMatrix) -> u64 {
    let mut count = 0;
    for i in 0..g.rows() {
        for f in 0..g.cols() {
            if s.get(i, f as u32).is_none() && g.get(i, f).to_bits() != 0 {
                count += 1;
            }
        }
    }
    count
}

/// Runs one gradient case for `cfg` with inputs from `(seed, index)`.
pub fn check_case(cfg: &AttentionConfig, seed: u64, index: u64) -> Result<GradRow, CliError> {
    let inp = make_inputs(cfg, seed, index)?;
    let (n, dv, mask) = (cfg.n, cfg.d_v, cfg.mask);
    let d_o = InputRng::new(seed ^ 0x0d0d, index).matrix(n, dv);
    let (qs, ks) = (&inp.qt, &inp.kt);
    let output = |q: &DenseMatrix, k: &DenseMatrix, v: &DenseMatrix| {
        naive_sfa_reference(&on_support(qs, q), &on_support(ks, k), v, mask, Precision::Fp64)
            .expect("shapes are fixed")
    };
    let inner = |a: &DenseMatrix, b: &DenseMatrix| -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
    };

    let g = sfa_backward(qs, ks, &inp.v, mask, &d_o, cfg)?;
    let linear = |q: &DenseMatrix, k: &DenseMatrix, v: &DenseMatrix| inner(&d_o, &output(q, k, v));
    let fd_q = finite_diff_grad_five_point(|x| linear(x, &inp.k, &inp.v), &inp.q, FD_STEP)?;
    let fd_k = finite_diff_grad_five_point(|x| linear(&inp.q, x, &inp.v), &inp.k, FD_STEP)?;
    let fd_v = finite_diff_grad_five_point(|x| linear(&inp.q, &inp.k, x), &inp.v, FD_STEP)?;

    // regularizer against the dense-attention output of the same inputs
    let target = dense_attention_reference(&inp.q, &inp.k, &inp.v, mask, Precision::Fp64)?;
    let fwd_cfg = cfg.clone().with_precision(Precision::Fp64);
    let (sparse_out, _) = flash_sfa_forward(qs, ks, &inp.v, &fwd_cfg)?;
    let (_, reg_grad) = regularizer_loss(&[sparse_out], &[target.clone()], REG_LAMBDA, false)?;
    let rg = sfa_backward(qs, ks, &inp.v, mask, &reg_grad[0], cfg)?;
    let reg = |q: &DenseMatrix, k: &DenseMatrix, v: &DenseMatrix| {
        regularizer_loss(&[output(q, k, v)], &[target.clone()], REG_LAMBDA, false)
            .expect("same shapes")
            .0
    };
    let fr_q = finite_diff_grad_five_point(|x| reg(x, &inp.k, &inp.v), &inp.q, FD_STEP)?;
    let fr_k = finite_diff_grad_five_point(|x| reg(&inp.q, x, &inp.v), &inp.k, FD_STEP)?;
    let fr_v = finite_diff_grad_five_point(|x| reg(&inp.q, &inp.k, x), &inp.v, FD_STEP)?;

    let max_rel_err_dq = max_rel_err(&g.dq, &fd_q);
    let max_rel_err_dk = max_rel_err(&g.dk, &fd_k);
    let max_rel_err_dv = max_rel_err(&g.dv, &fd_v);
    let max_rel_err_reg = [
        max_rel_err(&rg.dq, &fr_q),
        max_rel_err(&rg.dk, &fr_k),
        max_rel_err(&rg.dv, &fr_v),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let off = off_support_nonzero(qs, &g.dq)
        + off_support_nonzero(ks, &g.dk)
        + off_support_nonzero(qs, &rg.dq)
        + off_support_nonzero(ks, &rg.dk);
    let passed = max_rel_err_dq <= GRAD_RTOL
        && max_rel_err_dk <= GRAD_RTOL
        && max_rel_err_dv <= GRAD_RTOL
        && max_rel_err_reg <= REG_RTOL
        && off == 0;
    Ok(GradRow {
        case: index as usize,
        n,
        d: cfg.d,
        dv,
        k: cfg.k,
        mask,
        tile_rows: cfg.tile_rows,
        tile_cols: cfg.tile_cols,
        max_rel_err_dq,
        max_rel_err_dk,
        max_rel_err_dv,
        max_rel_err_reg,
        off_support_nonzero: off,
        passed,
    })
}

/// Small random shape for case `c`: `n <= 16`, `d <= 10`, `d_v <= 5`.
pub fn random_config(seed: u64, c: u64, mask: Option<Mask>) -> AttentionConfig {
    let mut rng = InputRng::new(seed, 1 << 32 | c);
    let mut draw = |lo: u64, hi: u64| (lo + rng.below(hi - lo + 1)) as usize;
    let n = draw(1, 16);
    let d = draw(2, 10);
    let k = draw(1, d as u64);
    let dv = draw(1, 5);
    let mask = mask.unwrap_or(if draw(0, 1) == 0 { Mask::None } else { Mask::Causal });
    let (tr, tc) = (draw(1, n as u64), draw(1, n as u64));
    AttentionConfig::new(n, d, dv, k).with_mask(mask).with_tiles(tr, tc)
}

pub fn run(settings: &Settings, args: &GradCheckArgs) -> Result<(Vec<GradRow>, bool), CliError> {
    if args.cases == 0 {
        return Err(CliError::Usage("--cases must be >= 1".into()));
    }
    let points = if settings.shape_given {
        settings.points()?
    } else {
        Vec::new()
    };
    let mut rows = Vec::with_capacity(args.cases);
    for c in 0..args.cases as u64 {
        let cfg = if points.is_empty() {
            random_config(settings.seed, c, settings.mask)
        } else {
            let p = &points[c as usize % points.len()];
            let mask = settings.mask.unwrap_or(if c % 2 == 0 { Mask::None } else { Mask::Causal });
            settings.config_for(p, mask).with_heads(1, 1)
        }
        .with_workers(settings.workers);
        let row = check_case(&cfg, settings.seed, c)?;
        if !row.passed {
            log::error!("FAILED gradient case {c}: {row:?}");
        }
        rows.push(row);
    }
    let passed = rows.iter().all(|r| r.passed);
    Ok((rows, passed))
}
