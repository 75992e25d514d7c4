//! Attention kernels: the dense and naive sparse oracles, the tiled
//! feature-intersection forward pass and the decode path over a sparse KV cache.
//!
//! Query/key pairs whose supports share no feature get a logit of exactly 0,
//! not `-inf`: they still receive softmax mass. Scores are scaled by `1/sqrt(d)`
//! with `d` the full feature dimension.

mod config;
mod flash;
mod kv_cache;
pub(crate) mod real;
mod reference;
mod search;
pub(crate) mod tile;

pub use config::{AttentionConfig, Mask, Precision};
pub use flash::{
    attention_weights_debug, flash_sfa_forward, flash_sfa_forward_batched, AttentionInstance,
    ForwardOutput, DEBUG_MAX_ROWS,
};
pub(crate) use flash::{forward_with_stats, run_blocks, Prepared};
pub use kv_cache::{decode_step, SparseKVCache, SparseRow};
pub use reference::{dense_attention_reference, naive_sfa_reference};
pub(crate) use reference::visible_limit;
pub use search::binary_search_range;
pub use tile::{sparse_score_tile, ScoreTile};
