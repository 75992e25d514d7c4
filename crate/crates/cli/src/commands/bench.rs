//! Scaling sweep: medians of warm timed runs of the dense reference and
//! FlashSFA, next to the kernel's counters and the analytic models.
//!
//! Wall-clock numbers come from CPU runs and are only meaningful as trends.
//! Input generation and Top-k happen outside the timed region.

use std::time::Instant;

use serde::Serialize;
use sfa_core::attention::AttentionInstance;
use sfa_core::cost::flop_ratio;
use sfa_core::{dense_attention_reference, flash_sfa_forward_batched, Mask, Precision, SfaError};

use super::make_inputs;
use crate::args::BenchArgs;
use crate::error::CliError;
use crate::settings::{Settings, MAX_TIMED_N};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub dv: usize,
    pub k: usize,
    pub batch: usize,
    pub heads: usize,
    pub mask: Mask,
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub precision: Precision,
    pub workers: usize,
    pub repeat: usize,
    pub warmup: usize,
    pub dense_median_ns: Option<u64>,
    pub sfa_median_ns: Option<u64>,
    pub measured_edges: u64,
    pub predicted_edges: u64,
    pub edge_ratio: f64,
    pub measured_flops: u64,
    pub measured_inops: u64,
    pub score_flops: u64,
    pub softmax_flops: u64,
    pub value_flops: u64,
    pub dense_flops: u64,
    pub dense_score_flops: u64,
    pub score_flop_ratio: f64,
    pub model_flop_ratio: f64,
    pub peak_transient_values: u64,
    pub peak_transient_bytes: u64,
    pub kv_cache_bytes: u64,
}

/// Runs `f` `warmup` times, then `repeat` timed times; returns the median in
/// nanoseconds (lower median for even counts).
fn median_ns<E>(warmup: usize, repeat: usize, mut f: impl FnMut() -> Result<(), E>) -> Result<u64, E> {
    for _ in 0..warmup {
        f()?;
    }
    let mut samples = Vec::with_capacity(repeat);
    for _ in 0..repeat {
        let t = Instant::now();
        f()?;
        samples.push(t.elapsed().as_nanos() as u64);
    }
    samples.sort_unstable();
    Ok(samples[(samples.len() - 1) / 2])
}

pub fn run(settings: &Settings, args: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    let mask = settings.mask.unwrap_or(Mask::None);
    let points = settings.points()?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for p in &points {
        let cfg = settings.config_for(p, mask);
        let inputs = (0..cfg.instances() as u64)
            .map(|i| make_inputs(&cfg, settings.seed, i))
            .collect::<sfa_core::Result<Vec<_>>>()?;
        let views: Vec<_> = inputs
            .iter()
            .map(|i| AttentionInstance {
                q: &i.qt,
                k: &i.kt,
                v: &i.v,
            })
            .collect();
        let report = match flash_sfa_forward_batched(&views, &cfg) {
            Ok(out) => out.report,
            Err(SfaError::ResourceLimit(why)) => {
                log::warn!("skipping n={} d={} k={}: {why}", p.n, p.d, p.k);
                skipped.push(why);
                continue;
            }
            Err(e) => return Err(e.into()),
        };

        let timed = !args.no_timing && p.n <= MAX_TIMED_N;
        if !args.no_timing && !timed {
            log::warn!("n={} exceeds the timed-run cap {MAX_TIMED_N}; counters only", p.n);
        }
        let sfa_median_ns = if timed {
            Some(median_ns(settings.warmup, settings.repeat, || {
                flash_sfa_forward_batched(&views, &cfg).map(|_| ())
            })?)
        } else {
            None
        };
        let dense_bytes = (p.n as u64).pow(2) * Precision::Fp64.value_bytes() as u64;
        let dense_fits = settings.max_transient_bytes.is_none_or(|cap| dense_bytes <= cap);
        if timed && !dense_fits {
            log::warn!(
                "n={}: dense reference needs {dense_bytes} score bytes, over the transient cap; not timed",
                p.n
            );
        }
        let dense_median_ns = if timed && dense_fits {
            Some(median_ns(settings.warmup, settings.repeat, || {
                for i in &inputs {
                    dense_attention_reference(&i.q, &i.k, &i.v, mask, cfg.precision)?;
                }
                Ok::<(), SfaError>(())
            })?)
        } else {
            None
        };

        rows.push(BenchRow {
            n: p.n,
            d: p.d,
            dv: p.dv,
            k: p.k,
            batch: settings.batch,
            heads: settings.heads,
            mask,
            tile_rows: p.tile_rows,
            tile_cols: p.tile_cols,
            precision: cfg.precision,
            workers: cfg.workers,
            repeat: settings.repeat,
            warmup: settings.warmup,
            dense_median_ns,
            sfa_median_ns,
            measured_edges: report.measured_edges,
            predicted_edges: report.predicted_edges,
            edge_ratio: report.measured_edges as f64 / report.predicted_edges.max(1) as f64,
            measured_flops: report.measured_flops,
            measured_inops: report.measured_inops,
            score_flops: report.score_flops,
            softmax_flops: report.softmax_flops,
            value_flops: report.value_flops,
            dense_flops: report.dense_flops,
            dense_score_flops: report.dense_score_flops,
            score_flop_ratio: report.score_flop_ratio(),
            model_flop_ratio: flop_ratio(p.d as u64, p.k as u64),
            peak_transient_values: report.peak_transient_values,
            peak_transient_bytes: report.peak_transient_bytes,
            kv_cache_bytes: report.kv_cache_bytes,
        });
    }
    if rows.is_empty() && !skipped.is_empty() {
        return Err(CliError::Resource(format!(
            "every sweep point exceeded the transient budget ({})",
            skipped[0]
        )));
    }
    Ok(rows)
}
