//! Resolved run settings: built-in defaults, then the config file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use sfa_core::{AttentionConfig, Mask, Precision};

use crate::args::{CommonOpts, Format};
use crate::error::CliError;

pub const ENV_MAX_TRANSIENT: &str = "SFA_MAX_TRANSIENT_BYTES";

/// Largest sequence length a timed kernel run accepts.
pub const MAX_TIMED_N: usize = 8192;

#[derive(Debug, Clone)]
pub struct Settings {
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub dv: Option<Vec<usize>>,
    pub k: Vec<usize>,
    pub heads: usize,
    pub batch: usize,
    /// `None` lets the command pick (check runs both masks).
    pub mask: Option<Mask>,
    pub tile_rows: Vec<usize>,
    pub tile_cols: Vec<usize>,
    pub precision: Precision,
    pub seed: u64,
    pub workers: usize,
    pub repeat: usize,
    pub warmup: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub max_transient_bytes: Option<u64>,
    /// Whether `n`, `d` or `k` came from the user rather than the defaults.
    pub shape_given: bool,
}

/// One point of the cartesian sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point {
    pub n: usize,
    pub d: usize,
    pub dv: usize,
    pub k: usize,
    pub tile_rows: usize,
    pub tile_cols: usize,
}

impl Settings {
    pub fn resolve(flags: &CommonOpts, env_transient: Option<&str>) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => parse_config_file(path)?,
            None => CommonOpts::default(),
        };
        let pick = |a: &Option<Vec<usize>>, b: &Option<Vec<usize>>| a.clone().or_else(|| b.clone());
        let shape_given = [&flags.n, &flags.d, &flags.k, &file.n, &file.d, &file.k]
            .iter()
            .any(|o| o.is_some());
        let max_transient_bytes = match env_transient {
            Some(raw) => Some(raw.trim().parse::<u64>().map_err(|_| {
                CliError::Usage(format!("{ENV_MAX_TRANSIENT} must be a byte count, got '{raw}'"))
            })?),
            None => None,
        };
        let s = Settings {
            n: pick(&flags.n, &file.n).unwrap_or_else(|| vec![256]),
            d: pick(&flags.d, &file.d).unwrap_or_else(|| vec![64]),
            dv: pick(&flags.dv, &file.dv),
            k: pick(&flags.k, &file.k).unwrap_or_else(|| vec![8]),
            heads: flags.heads.or(file.heads).unwrap_or(1),
            batch: flags.batch.or(file.batch).unwrap_or(1),
            mask: flags.mask.or(file.mask),
            tile_rows: pick(&flags.tile_rows, &file.tile_rows).unwrap_or_else(|| vec![64]),
            tile_cols: pick(&flags.tile_cols, &file.tile_cols).unwrap_or_else(|| vec![64]),
            precision: flags.precision.or(file.precision).unwrap_or_default(),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            workers: flags.workers.or(file.workers).unwrap_or(1),
            repeat: flags.repeat.or(file.repeat).unwrap_or(50),
            warmup: flags.warmup.or(file.warmup).unwrap_or(5),
            out: flags.out.clone().or(file.out),
            format: flags.format.or(file.format).unwrap_or(Format::Json),
            max_transient_bytes,
            shape_given,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        let lists: [(&str, &[usize]); 5] = [
            ("n", &self.n),
            ("d", &self.d),
            ("k", &self.k),
            ("tile-rows", &self.tile_rows),
            ("tile-cols", &self.tile_cols),
        ];
        for (name, list) in lists {
            if list.is_empty() || list.contains(&0) {
                return Err(CliError::Usage(format!("--{name} needs positive values")));
            }
        }
        if let Some(dv) = &self.dv {
            if dv.is_empty() || dv.contains(&0) {
                return Err(CliError::Usage("--dv needs positive values".into()));
            }
        }
        for (name, v) in [
            ("heads", self.heads),
            ("batch", self.batch),
            ("workers", self.workers),
            ("repeat", self.repeat),
        ] {
            if v == 0 {
                return Err(CliError::Usage(format!("--{name} must be >= 1")));
            }
        }
        Ok(())
    }

    /// Cartesian product of the sweep lists. Points with `k > d` are dropped
    /// with a warning; tiles are clamped to `n`.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &d in &self.d {
                let dvs = self.dv.clone().unwrap_or_else(|| vec![d]);
                for &dv in &dvs {
                    for &k in &self.k {
                        if k > d {
                            log::warn!("skipping n={n} d={d} k={k}: k exceeds d");
                            continue;
                        }
                        for &tr in &self.tile_rows {
                            for &tc in &self.tile_cols {
                                let p = Point {
                                    n,
                                    d,
                                    dv,
                                    k,
                                    tile_rows: tr.min(n),
                                    tile_cols: tc.min(n),
                                };
                                if !out.contains(&p) {
                                    out.push(p);
                                }
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(CliError::Usage("no valid sweep point (need k <= d)".into()));
        }
        Ok(out)
    }

    pub fn config_for(&self, p: &Point, mask: Mask) -> AttentionConfig {
        let mut cfg = AttentionConfig::new(p.n, p.d, p.dv, p.k)
            .with_mask(mask)
            .with_tiles(p.tile_rows, p.tile_cols)
            .with_precision(self.precision)
            .with_workers(self.workers)
            .with_heads(self.batch, self.heads)
            .with_seed(self.seed);
        cfg.max_transient_bytes = self.max_transient_bytes;
        cfg
    }
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, CliError> {
    raw.split(',').map(|v| parse_one(key, v)).collect()
}

fn parse_one<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value '{}' for '{key}'", raw.trim())))
}

/// Parses `key = value` lines. `#` starts a comment; keys are the long flag
/// names (`tile-rows` and `tile_rows` are both accepted).
pub fn parse_config(text: &str) -> Result<CommonOpts, CliError> {
    let mut o = CommonOpts::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "n" => o.n = Some(parse_list(&key, value)?),
            "d" => o.d = Some(parse_list(&key, value)?),
            "dv" => o.dv = Some(parse_list(&key, value)?),
            "k" => o.k = Some(parse_list(&key, value)?),
            "heads" => o.heads = Some(parse_one(&key, value)?),
            "batch" => o.batch = Some(parse_one(&key, value)?),
            "mask" => o.mask = Some(value.parse().map_err(CliError::Usage)?),
            "tile-rows" => o.tile_rows = Some(parse_list(&key, value)?),
            "tile-cols" => o.tile_cols = Some(parse_list(&key, value)?),
            "precision" => o.precision = Some(value.parse().map_err(CliError::Usage)?),
            "seed" => o.seed = Some(parse_one(&key, value)?),
            "workers" => o.workers = Some(parse_one(&key, value)?),
            "repeat" => o.repeat = Some(parse_one(&key, value)?),
            "warmup" => o.warmup = Some(parse_one(&key, value)?),
            "out" => o.out = Some(PathBuf::from(value)),
            "format" => {
                o.format = Some(match value {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    other => return Err(CliError::Usage(format!("unknown format '{other}'"))),
                })
            }
            other => {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(o)
}

fn parse_config_file(path: &Path) -> Result<CommonOpts, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
