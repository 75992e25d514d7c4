use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mask {
    #[default]
    None,
    /// Key `j` is visible to query `i` iff `j <= i + (n_keys - n_queries)`.
    Causal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Fp32,
    #[default]
    Fp64,
}

impl Precision {
    pub fn value_bytes(self) -> usize {
        match self {
            Precision::Fp32 => 4,
            Precision::Fp64 => 8,
        }
    }

    /// Max-abs tolerance used when comparing kernels against the oracles.
    pub fn tolerance(self) -> f64 {
        match self {
            Precision::Fp32 => 1e-4,
            Precision::Fp64 => 1e-10,
        }
    }
}

impl FromStr for Mask {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Mask::None),
            "causal" => Ok(Mask::Causal),
            other => Err(format!("unknown mask '{other}' (expected none|causal)")),
        }
    }
}

impl FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fp32" => Ok(Precision::Fp32),
            "fp64" => Ok(Precision::Fp64),
            other => Err(format!("unknown precision '{other}' (expected fp32|fp64)")),
        }
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mask::None => "none",
            Mask::Causal => "causal",
        })
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Fp32 => "fp32",
            Precision::Fp64 => "fp64",
        })
    }
}

/// Problem shape and kernel settings for one attention call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionConfig {
    pub n: usize,
    pub d: usize,
    pub d_v: usize,
    pub k: usize,
    /// Experimental: separate key budget. `None` means keys use `k`.
    pub key_k: Option<usize>,
    pub heads: usize,
    pub batch: usize,
    pub mask: Mask,
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub precision: Precision,
    pub seed: u64,
    pub workers: usize,
    /// Upper bound on the bytes of one score tile.
    pub max_transient_bytes: Option<u64>,
}

impl AttentionConfig {
    /// Single-head, single-batch config with 64x64 tiles clamped to `n`.
    pub fn new(n: usize, d: usize, d_v: usize, k: usize) -> Self {
        Self {
            n,
            d,
            d_v,
            k,
            key_k: None,
            heads: 1,
            batch: 1,
            mask: Mask::None,
            tile_rows: 64.min(n.max(1)),
            tile_cols: 64.min(n.max(1)),
            precision: Precision::Fp64,
            seed: 0,
            workers: 1,
            max_transient_bytes: None,
        }
    }

    pub fn with_mask(mut self, mask: Mask) -> Self {
        self.mask = mask;
        self
    }

    pub fn with_tiles(mut self, rows: usize, cols: usize) -> Self {
        self.tile_rows = rows;
        self.tile_cols = cols;
        self
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_heads(mut self, batch: usize, heads: usize) -> Self {
        self.batch = batch;
        self.heads = heads;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn key_budget(&self) -> usize {
        self.key_k.unwrap_or(self.k)
    }

    pub fn instances(&self) -> usize {
        self.batch * self.heads
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.d_v == 0 || self.heads == 0 || self.batch == 0 {
            return Err(invalid_arg!("all dimensions must be >= 1: {self:?}"));
        }
        if self.k == 0 || self.k > self.d {
            return Err(invalid_arg!("k={} must lie in 1..={}", self.k, self.d));
        }
        if let Some(kk) = self.key_k {
            if kk == 0 || kk > self.d {
                return Err(invalid_arg!("key budget {kk} must lie in 1..={}", self.d));
            }
        }
        if self.tile_rows == 0 || self.tile_rows > self.n || self.tile_cols == 0 || self.tile_cols > self.n
        {
            return Err(invalid_arg!(
                "tile ({}, {}) must lie in 1..={} on both axes",
                self.tile_rows,
                self.tile_cols,
                self.n
            ));
        }
        if self.workers == 0 {
            return Err(invalid_arg!("workers must be >= 1"));
        }
        Ok(())
    }
}
