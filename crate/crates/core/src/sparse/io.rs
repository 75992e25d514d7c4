//! Binary matrix files.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 8    | magic `b"SFAMATRX"`                     |
//! | 8      | 2    | format version (u16, currently 1)       |
//! | 10     | 1    | kind: 0 = dense, 1 = CSR                |
//! | 11     | 1    | value width in bytes: 4 (f32) or 8 (f64)|
//! | 12     | 4    | reserved, zero                          |
//! | 16     | 8    | rows (u64)                              |
//! | 24     | 8    | cols (u64)                              |
//! | 32     | 8    | nnz (u64; rows*cols for dense)          |
//!
//! A dense payload is `rows*cols` row-major values. A CSR payload is
//! `indptr` as `rows+1` u64, then `nnz` u32 column indices, then `nnz` values.

use std::io::{Read, Write};

use crate::attention::Precision;
use crate::error::{Result, SfaError};
use crate::sparse::{DenseMatrix, SparseRowMatrix};

pub const MAGIC: [u8; 8] = *b"SFAMATRX";
pub const FORMAT_VERSION: u16 = 1;
const KIND_DENSE: u8 = 0;
const KIND_CSR: u8 = 1;

/// Either payload kind, as returned by [`read_matrix`].
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFile {
    Dense(DenseMatrix),
    Sparse(SparseRowMatrix),
}

fn io_err(e: std::io::Error) -> SfaError {
    SfaError::Format(e.to_string())
}

fn write_header<W: Write>(w: &mut W, kind: u8, precision: Precision, dims: [u64; 3]) -> Result<()> {
    let mut header = [0u8; 16];
    header[..8].copy_from_slice(&MAGIC);
    header[8..10].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    header[10] = kind;
    header[11] = precision.value_bytes() as u8;
    w.write_all(&header).map_err(io_err)?;
    for v in dims {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

fn write_values<W: Write>(w: &mut W, values: &[f64], precision: Precision) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * precision.value_bytes());
    match precision {
        Precision::Fp64 => values.iter().for_each(|v| buf.extend_from_slice(&v.to_le_bytes())),
        Precision::Fp32 => values
            .iter()
            .for_each(|v| buf.extend_from_slice(&(*v as f32).to_le_bytes())),
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn write_dense<W: Write>(w: &mut W, m: &DenseMatrix, precision: Precision) -> Result<()> {
    let (r, c) = (m.rows() as u64, m.cols() as u64);
    write_header(w, KIND_DENSE, precision, [r, c, r * c])?;
    write_values(w, m.values(), precision)
}

pub fn write_sparse<W: Write>(w: &mut W, m: &SparseRowMatrix, precision: Precision) -> Result<()> {
    write_header(
        w,
        KIND_CSR,
        precision,
        [m.rows() as u64, m.cols() as u64, m.nnz() as u64],
    )?;
    let mut buf = Vec::with_capacity(m.indptr().len() * 8 + m.nnz() * 4);
    for &p in m.indptr() {
        buf.extend_from_slice(&(p as u64).to_le_bytes());
    }
    for &i in m.indices() {
        buf.extend_from_slice(&i.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)?;
    write_values(w, m.values(), precision)
}

fn read_exact_vec<R: Read>(r: &mut R, len: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(io_err)?;
    Ok(buf)
}

fn read_values<R: Read>(r: &mut R, count: usize, width: u8) -> Result<Vec<f64>> {
    let buf = read_exact_vec(r, count * width as usize)?;
    Ok(match width {
        8 => buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        _ => buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
    })
}

fn checked_len(v: u64) -> Result<usize> {
    usize::try_from(v).map_err(|_| SfaError::Format(format!("length {v} does not fit in memory")))
}

/// Reads one matrix file of either kind.
pub fn read_matrix<R: Read>(r: &mut R) -> Result<MatrixFile> {
    let header = read_exact_vec(r, 40)?;
    if header[..8] != MAGIC {
        return Err(SfaError::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[8], header[9]]);
    if version != FORMAT_VERSION {
        return Err(SfaError::Format(format!("unsupported version {version}")));
    }
    let kind = header[10];
    let width = header[11];
    if width != 4 && width != 8 {
        return Err(SfaError::Format(format!("unsupported value width {width}")));
    }
    let field = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let (rows, cols, nnz) = (
        checked_len(field(16))?,
        checked_len(field(24))?,
        checked_len(field(32))?,
    );
    match kind {
        KIND_DENSE => {
            if rows.checked_mul(cols) != Some(nnz) {
                return Err(SfaError::Format("dense nnz must equal rows*cols".into()));
            }
            let values = read_values(r, nnz, width)?;
            DenseMatrix::new(rows, cols, values)
                .map(MatrixFile::Dense)
                .map_err(|e| SfaError::Format(e.to_string()))
        }
        KIND_CSR => {
            let ptr_buf = read_exact_vec(r, (rows + 1) * 8)?;
            let indptr = ptr_buf
                .chunks_exact(8)
                .map(|c| checked_len(u64::from_le_bytes(c.try_into().unwrap())))
                .collect::<Result<Vec<_>>>()?;
            let idx_buf = read_exact_vec(r, nnz * 4)?;
            let indices = idx_buf
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let values = read_values(r, nnz, width)?;
            SparseRowMatrix::new(rows, cols, indptr, indices, values)
                .map(MatrixFile::Sparse)
                .map_err(|e| SfaError::Format(e.to_string()))
        }
        other => Err(SfaError::Format(format!("unknown matrix kind {other}"))),
    }
}

pub fn read_dense<R: Read>(r: &mut R) -> Result<DenseMatrix> {
    match read_matrix(r)? {
        MatrixFile::Dense(m) => Ok(m),
        MatrixFile::Sparse(_) => Err(SfaError::Format("expected a dense matrix".into())),
    }
}

pub fn read_sparse<R: Read>(r: &mut R) -> Result<SparseRowMatrix> {
    match read_matrix(r)? {
        MatrixFile::Sparse(m) => Ok(m),
        MatrixFile::Dense(_) => Err(SfaError::Format("expected a CSR matrix".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::topk_sparsify;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let mut buf = Vec::new();
        write_dense(&mut buf, &m, Precision::Fp64).unwrap();
        assert_eq!(&buf[..8], b"SFAMATRX");
        assert_eq!(&buf[8..12], &[1, 0, 0, 8]);
        assert_eq!(buf.len(), 40 + 16);
        assert_eq!(u64::from_le_bytes(buf[32..40].try_into().unwrap()), 2);
    }

    #[test]
    fn rejects_wrong_magic_and_version() {
        let m = DenseMatrix::zeros(1, 1);
        let mut buf = Vec::new();
        write_dense(&mut buf, &m, Precision::Fp32).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_matrix(&mut bad.as_slice()), Err(SfaError::Format(_))));
        let mut bad = buf.clone();
        bad[8] = 2;
        assert!(matches!(read_matrix(&mut bad.as_slice()), Err(SfaError::Format(_))));
        assert!(read_matrix(&mut &buf[..30]).is_err());
    }

    #[test]
    fn fp32_roundtrip_rounds_values() {
        let m = DenseMatrix::from_rows(&[vec![0.1, -3.0]]).unwrap();
        let mut buf = Vec::new();
        write_dense(&mut buf, &m, Precision::Fp32).unwrap();
        let back = read_dense(&mut buf.as_slice()).unwrap();
        assert_eq!(back.get(0, 0), 0.1f32 as f64);
        assert_eq!(back.get(0, 1), -3.0);
    }

    proptest! {
        #[test]
        fn roundtrip(vals in prop::collection::vec(-1e3f64..1e3, 12), k in 1usize..=4) {
            let d = DenseMatrix::new(3, 4, vals).unwrap();
            let s = topk_sparsify(&d, k).unwrap();
            let mut buf = Vec::new();
            write_dense(&mut buf, &d, Precision::Fp64).unwrap();
            write_sparse(&mut buf, &s, Precision::Fp64).unwrap();
            let mut r = buf.as_slice();
            prop_assert_eq!(read_dense(&mut r).unwrap(), d);
            prop_assert_eq!(read_sparse(&mut r).unwrap(), s);
        }
    }
}
