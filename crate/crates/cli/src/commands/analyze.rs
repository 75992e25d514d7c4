//! Per-head Top-k load-balance entropy and effective rank.

use std::fs::File;
use std::io::BufReader;

use serde::Serialize;
use sfa_core::analysis::{effective_rank, topk_index_entropy, SelectionHistogram};
use sfa_core::gen::{fixed_support_matrix, generate_instance, low_rank_matrix};
use sfa_core::sparse::io::{read_matrix, MatrixFile};
use sfa_core::{densify, topk_sparsify, DenseMatrix, SparseRowMatrix};

use crate::args::{AnalyzeArgs, Generator};
use crate::error::CliError;
use crate::settings::Settings;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AnalyzeRow {
    pub head: usize,
    pub source: String,
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub tau: f64,
    pub entropy: f64,
    pub effective_rank: usize,
}

fn row(head: usize, source: String, dense: &DenseMatrix, sparse: &SparseRowMatrix, tau: f64) -> Result<AnalyzeRow, CliError> {
    let entropy = topk_index_entropy(&SelectionHistogram::from_sparse(sparse))?;
    Ok(AnalyzeRow {
        head,
        source,
        rows: dense.rows(),
        cols: dense.cols(),
        k: sparse.row_nnz(0),
        tau,
        entropy,
        effective_rank: effective_rank(dense, tau)?,
    })
}

fn generator_name(g: Generator) -> &'static str {
    match g {
        Generator::Gaussian => "gaussian",
        Generator::FixedSupport => "fixed-support",
        Generator::LowRank => "low-rank",
    }
}

pub fn run(settings: &Settings, args: &AnalyzeArgs) -> Result<Vec<AnalyzeRow>, CliError> {
    if !(args.tau > 0.0 && args.tau <= 1.0) {
        return Err(CliError::Usage(format!("--tau must lie in (0, 1], got {}", args.tau)));
    }
    let mut rows = Vec::new();
    if !args.input.is_empty() {
        let k = settings.k[0];
        for (head, path) in args.input.iter().enumerate() {
            let file = File::open(path)
                .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
            let source = path.display().to_string();
            match read_matrix(&mut BufReader::new(file))? {
                MatrixFile::Dense(m) => {
                    if k > m.cols() {
                        return Err(CliError::Usage(format!("k={k} exceeds {} columns", m.cols())));
                    }
                    let s = topk_sparsify(&m, k)?;
                    rows.push(row(head, source, &m, &s, args.tau)?);
                }
                MatrixFile::Sparse(s) => {
                    rows.push(row(head, source, &densify(&s), &s, args.tau)?);
                }
            }
        }
        return Ok(rows);
    }
    let generator = args.generator.ok_or_else(|| {
        CliError::Usage("analyze needs --input files or a --generator".into())
    })?;
    let heads = settings.batch * settings.heads;
    for p in settings.points()? {
        if generator == Generator::LowRank && args.rank > p.n.min(p.d) {
            return Err(CliError::Usage(format!(
                "--rank {} exceeds min(n, d) = {}",
                args.rank,
                p.n.min(p.d)
            )));
        }
        let cfg = settings.config_for(&p, sfa_core::Mask::None);
        for h in 0..heads {
            let seed = settings.seed.wrapping_add(h as u64);
            let dense = match generator {
                Generator::Gaussian => generate_instance(&cfg, settings.seed, h as u64).0,
                Generator::FixedSupport => fixed_support_matrix(p.n, p.d, p.k, seed),
                Generator::LowRank => low_rank_matrix(p.n, p.d, args.rank, seed),
            };
            let sparse = topk_sparsify(&dense, p.k)?;
            rows.push(row(h, generator_name(generator).to_string(), &dense, &sparse, args.tau)?);
        }
    }
    Ok(rows)
}
