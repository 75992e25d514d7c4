use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};

/// Storage widths used for byte accounting. The in-memory representation
/// always uses native widths; this model only describes a storage layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryModel {
    pub val_bytes: u64,
    pub idx_bytes: u64,
    pub ptr_bytes: u64,
}

impl MemoryModel {
    /// fp16 values, int8 column indices, int32 row pointers.
    pub const FP16_INT8_INT32: MemoryModel = MemoryModel {
        val_bytes: 2,
        idx_bytes: 1,
        ptr_bytes: 4,
    };

    /// fp16 values, int16 column indices, int32 row pointers.
    pub const FP16_INT16_INT32: MemoryModel = MemoryModel {
        val_bytes: 2,
        idx_bytes: 2,
        ptr_bytes: 4,
    };

    pub fn new(val_bytes: u64, idx_bytes: u64, ptr_bytes: u64) -> Result<Self> {
        if val_bytes == 0 || idx_bytes == 0 || ptr_bytes == 0 {
            return Err(invalid_arg!("byte widths must be >= 1"));
        }
        Ok(Self {
            val_bytes,
            idx_bytes,
            ptr_bytes,
        })
    }
}

impl Default for MemoryModel {
    fn default() -> Self {
        Self::FP16_INT8_INT32
    }
}

/// Bytes of a CSR matrix with `rows` rows and exactly `k` entries per row:
/// `rows*k*(val+idx) + (rows+1)*ptr`.
pub fn csr_memory_bytes(rows: u64, k: u64, model: MemoryModel) -> u64 {
    rows * k * (model.val_bytes + model.idx_bytes) + (rows + 1) * model.ptr_bytes
}

pub fn dense_memory_bytes(rows: u64, cols: u64, model: MemoryModel) -> u64 {
    rows * cols * model.val_bytes
}

/// Asymptotic (large row count) dense/CSR byte ratio per row,
/// `d*val / (k*(val+idx) + ptr)`.
pub fn dense_to_csr_ratio(d: u64, k: u64, model: MemoryModel) -> f64 {
    (d * model.val_bytes) as f64 / (k * (model.val_bytes + model.idx_bytes) + model.ptr_bytes) as f64
}

/// True when one dense row costs strictly more bytes than one CSR row with its
/// amortized row pointer.
pub fn memory_gain_condition(d: u64, k: u64, model: MemoryModel) -> bool {
    d * model.val_bytes > k * (model.val_bytes + model.idx_bytes) + model.ptr_bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        assert_eq!(csr_memory_bytes(1024, 16, MemoryModel::FP16_INT8_INT32), 53_252);
        assert_eq!(csr_memory_bytes(1, 1, MemoryModel::new(1, 1, 1).unwrap()), 4);
    }

    #[test]
    fn ratio_for_fp16_int8() {
        let r = dense_to_csr_ratio(128, 16, MemoryModel::FP16_INT8_INT32);
        assert!((r - 256.0 / 52.0).abs() < 1e-12);
        assert_eq!(format!("{r:.3}"), "4.923");
    }

    #[test]
    fn gain_condition_examples() {
        let m = MemoryModel::FP16_INT8_INT32;
        assert!(memory_gain_condition(128, 16, m));
        assert!(!memory_gain_condition(64, 64, m));
        // (2,1) value/index widths with a one-byte amortized pointer
        let m = MemoryModel::new(2, 1, 1).unwrap();
        assert!(memory_gain_condition(96, 63, m));
        assert!(!memory_gain_condition(96, 64, m));
    }

    #[test]
    fn zero_width_rejected() {
        assert!(MemoryModel::new(0, 1, 1).is_err());
    }
}
