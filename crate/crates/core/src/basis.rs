//! Krylov basis storage.
//!
//! Columns are written whole and encoded into the basis' [`StorageFormat`];
//! every read decodes back to binary64, so the solver only ever does
//! arithmetic in double precision. Reads are organised in blocks of
//! [`KrylovBasis::block_size`] values, the natural granularity of FRSZ2 and
//! the access pattern of the orthogonalization kernels.

use std::fmt;
use std::str::FromStr;

use half::f16;
use thiserror::Error;

use crate::codec::{self, CodecError, CompressedVector, Frsz2Params, DEFAULT_BLOCK_SIZE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("basis capacity must be at least one column")]
    ZeroCapacity,
    #[error("column {column} out of range (count {count}, capacity {capacity})")]
    ColumnOutOfRange { column: usize, count: usize, capacity: usize },
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("block {block} out of range ({blocks} blocks)")]
    BlockOutOfRange { block: usize, blocks: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unknown storage format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// How basis vectors are stored. Arithmetic is always binary64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StorageFormat {
    F64,
    /// IEEE binary32, round-to-nearest-even narrowing.
    F32,
    /// IEEE binary16, round-to-nearest-even narrowing; magnitudes beyond
    /// 65504 saturate.
    F16,
    Frsz2(Frsz2Params),
}

impl StorageFormat {
    /// FRSZ2 with `BS = 32`.
    pub fn frsz2(bit_length: u32) -> Result<Self, CodecError> {
        Frsz2Params::with_bit_length(bit_length).map(Self::Frsz2)
    }

    /// The formats compared in the experiments, in expected order of fidelity.
    pub fn standard_set() -> Vec<Self> {
        vec![
            Self::F64,
            Self::Frsz2(Frsz2Params::default()),
            Self::F32,
            Self::frsz2(21).unwrap(),
            Self::frsz2(16).unwrap(),
            Self::F16,
        ]
    }

    /// Stored bits per value, including FRSZ2 block exponents.
    pub fn bits_per_value(&self) -> f64 {
        match self {
            Self::F64 => 64.0,
            Self::F32 => 32.0,
            Self::F16 => 16.0,
            Self::Frsz2(p) => p.bits_per_value(),
        }
    }

    /// Read granularity.
    pub fn block_size(&self) -> usize {
        match self {
            Self::Frsz2(p) => p.block_size(),
            _ => DEFAULT_BLOCK_SIZE,
        }
    }

    /// Bytes needed to store `n` values.
    pub fn storage_bytes(&self, n: usize) -> usize {
        match self {
            Self::F64 => n * 8,
            Self::F32 => n * 4,
            Self::F16 => n * 2,
            Self::Frsz2(p) => codec::storage_bytes(n, p),
        }
    }
}

impl fmt::Display for StorageFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::F64 => f.write_str("f64"),
            Self::F32 => f.write_str("f32"),
            Self::F16 => f.write_str("f16"),
            Self::Frsz2(p) if p.block_size() == DEFAULT_BLOCK_SIZE => write!(f, "frsz2-{}", p.bit_length()),
            Self::Frsz2(p) => write!(f, "frsz2-{}-bs{}", p.bit_length(), p.block_size()),
        }
    }
}

impl FromStr for StorageFormat {
    type Err = BasisError;

    /// Accepts `f64`, `f32`, `f16`, `frsz2-<l>` and `frsz2-<l>-bs<BS>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || BasisError::UnknownFormat(s.to_string());
        match s.to_ascii_lowercase().as_str() {
            "f64" | "double" => Ok(Self::F64),
            "f32" | "float" | "single" => Ok(Self::F32),
            "f16" | "half" => Ok(Self::F16),
            other => {
                let rest = other.strip_prefix("frsz2-").ok_or_else(unknown)?;
                let (l, bs) = match rest.split_once("-bs") {
                    Some((l, bs)) => (l, bs.parse::<usize>().map_err(|_| unknown())?),
                    None => (rest, DEFAULT_BLOCK_SIZE),
                };
                let l = l.parse::<u32>().map_err(|_| unknown())?;
                Ok(Self::Frsz2(Frsz2Params::new(bs, l)?))
            }
        }
    }
}

#[inline]
fn narrow_f16(x: f64) -> f16 {
    f16::from_f64(x.clamp(-f16::MAX.to_f64(), f16::MAX.to_f64()))
}

#[derive(Debug, Clone)]
enum Column {
    F64(Vec<f64>),
    F32(Vec<f32>),
    F16(Vec<f16>),
    Frsz2(CompressedVector),
}

impl Column {
    fn encode(format: StorageFormat, values: &[f64]) -> Result<Self, CodecError> {
        Ok(match format {
            StorageFormat::F64 => Column::F64(values.to_vec()),
            StorageFormat::F32 => Column::F32(values.iter().map(|&v| v as f32).collect()),
            StorageFormat::F16 => Column::F16(values.iter().map(|&v| narrow_f16(v)).collect()),
            StorageFormat::Frsz2(p) => Column::Frsz2(codec::compress(values, &p)?),
        })
    }

    fn overwrite(&mut self, values: &[f64]) -> Result<(), CodecError> {
        match self {
            Column::F64(c) => c.copy_from_slice(values),
            Column::F32(c) => c.iter_mut().zip(values).for_each(|(o, &v)| *o = v as f32),
            Column::F16(c) => c.iter_mut().zip(values).for_each(|(o, &v)| *o = narrow_f16(v)),
            Column::Frsz2(c) => c.encode_from(values)?,
        }
        Ok(())
    }
}

/// A panel of up to `capacity` basis vectors of length `n`.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    n: usize,
    capacity: usize,
    format: StorageFormat,
    columns: Vec<Column>,
    count: usize,
}

impl KrylovBasis {
    pub fn new(n: usize, capacity: usize, format: StorageFormat) -> Result<Self, BasisError> {
        if capacity == 0 {
            return Err(BasisError::ZeroCapacity);
        }
        Ok(Self { n, capacity, format, columns: Vec::with_capacity(capacity), count: 0 })
    }

    /// Vector length.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of readable columns.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn format(&self) -> StorageFormat {
        self.format
    }

    pub fn block_size(&self) -> usize {
        self.format.block_size()
    }

    pub fn num_blocks(&self) -> usize {
        self.n.div_ceil(self.block_size())
    }

    /// Forgets all columns. Storage is kept and reused by later writes.
    pub fn clear(&mut self) {
        self.count = 0;
    }

    /// Bytes occupied by the readable columns.
    pub fn stored_bytes(&self) -> usize {
        self.count * self.format.storage_bytes(self.n)
    }

    /// Encodes `values` into column `j`, appending when `j == count`.
    pub fn write_vector(&mut self, j: usize, values: &[f64]) -> Result<(), BasisError> {
        if j > self.count || j >= self.capacity {
            return Err(BasisError::ColumnOutOfRange { column: j, count: self.count, capacity: self.capacity });
        }
        self.check_len(values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(CodecError::NonFinite { index, value: values[index] }.into());
        }
        if j < self.columns.len() {
            self.columns[j].overwrite(values)?;
        } else {
            self.columns.push(Column::encode(self.format, values)?);
        }
        self.count = self.count.max(j + 1);
        Ok(())
    }

    fn check_len(&self, got: usize) -> Result<(), BasisError> {
        if got != self.n {
            return Err(BasisError::LengthMismatch { expected: self.n, got });
        }
        Ok(())
    }

    fn column(&self, j: usize) -> Result<&Column, BasisError> {
        if j >= self.count {
            return Err(BasisError::ColumnOutOfRange { column: j, count: self.count, capacity: self.capacity });
        }
        Ok(&self.columns[j])
    }

    /// Visits column `j` block by block in ascending order. The final block
    /// is trimmed to the vector length.
    pub fn for_each_block(&self, j: usize, mut f: impl FnMut(usize, &[f64])) -> Result<(), BasisError> {
        let bs = self.block_size();
        let mut scratch = vec![0.0; bs];
        match self.column(j)? {
            Column::F64(c) => c.chunks(bs).enumerate().for_each(|(b, blk)| f(b, blk)),
            Column::F32(c) => {
                for (b, blk) in c.chunks(bs).enumerate() {
                    let out = &mut scratch[..blk.len()];
                    out.iter_mut().zip(blk).for_each(|(o, &v)| *o = v as f64);
                    f(b, out);
                }
            }
            Column::F16(c) => {
                for (b, blk) in c.chunks(bs).enumerate() {
                    let out = &mut scratch[..blk.len()];
                    out.iter_mut().zip(blk).for_each(|(o, &v)| *o = v.to_f64());
                    f(b, out);
                }
            }
            Column::Frsz2(cv) => cv.for_each_block(&mut scratch, f),
        }
        Ok(())
    }

    /// Decodes block `blk` of column `j` into `out` (length `block_size`);
    /// positions past the end of the vector are set to 0.0.
    pub fn read_block_into(&self, j: usize, blk: usize, out: &mut [f64]) -> Result<(), BasisError> {
        let column = self.column(j)?;
        let blocks = self.num_blocks();
        if blk >= blocks {
            return Err(BasisError::BlockOutOfRange { block: blk, blocks });
        }
        let bs = self.block_size();
        self.check_block_buffer(out.len())?;
        let range = blk * bs..((blk + 1) * bs).min(self.n);
        let valid = range.len();
        match column {
            Column::F64(c) => out[..valid].copy_from_slice(&c[range]),
            Column::F32(c) => out.iter_mut().zip(&c[range]).for_each(|(o, &v)| *o = v as f64),
            Column::F16(c) => out.iter_mut().zip(&c[range]).for_each(|(o, &v)| *o = v.to_f64()),
            Column::Frsz2(cv) => return Ok(cv.decompress_block_into(blk, out)?),
        }
        out[valid..].fill(0.0);
        Ok(())
    }

    fn check_block_buffer(&self, got: usize) -> Result<(), BasisError> {
        let bs = self.block_size();
        if got != bs {
            return Err(BasisError::LengthMismatch { expected: bs, got });
        }
        Ok(())
    }

    pub fn read_block(&self, j: usize, blk: usize) -> Result<Vec<f64>, BasisError> {
        let mut out = vec![0.0; self.block_size()];
        self.read_block_into(j, blk, &mut out)?;
        Ok(out)
    }

    /// Single-element read. Slower than block reads for FRSZ2.
    pub fn read_value(&self, j: usize, i: usize) -> Result<f64, BasisError> {
        let column = self.column(j)?;
        if i >= self.n {
            return Err(BasisError::IndexOutOfRange { index: i, len: self.n });
        }
        Ok(match column {
            Column::F64(c) => c[i],
            Column::F32(c) => c[i] as f64,
            Column::F16(c) => c[i].to_f64(),
            Column::Frsz2(cv) => cv.decompress_value(i)?,
        })
    }

    /// Decodes column `j` into `out`.
    pub fn read_column_into(&self, j: usize, out: &mut [f64]) -> Result<(), BasisError> {
        self.check_len(out.len())?;
        let bs = self.block_size();
        self.for_each_block(j, |b, blk| out[b * bs..b * bs + blk.len()].copy_from_slice(blk))
    }

    pub fn read_column(&self, j: usize) -> Result<Vec<f64>, BasisError> {
        let mut out = vec![0.0; self.n];
        self.read_column_into(j, &mut out)?;
        Ok(out)
    }

    /// `V_j . w`, summing per-block partial dot products left to right.
    pub fn dot(&self, j: usize, w: &[f64]) -> Result<f64, BasisError> {
        self.check_len(w.len())?;
        let bs = self.block_size();
        let mut total = 0.0;
        self.for_each_block(j, |b, blk| {
            let w = &w[b * bs..b * bs + blk.len()];
            let partial = blk.iter().zip(w).fold(0.0, |acc, (&v, &x)| acc + v * x);
            total += partial;
        })?;
        Ok(total)
    }

    /// `y := y - alpha * V_j`.
    pub fn axpy(&self, j: usize, alpha: f64, y: &mut [f64]) -> Result<(), BasisError> {
        self.check_len(y.len())?;
        let bs = self.block_size();
        self.for_each_block(j, |b, blk| {
            for (y, &v) in y[b * bs..b * bs + blk.len()].iter_mut().zip(blk) {
                *y -= alpha * v;
            }
        })
    }

    /// The raw compressed column, when the basis stores FRSZ2.
    pub fn compressed_column(&self, j: usize) -> Result<Option<&CompressedVector>, BasisError> {
        Ok(match self.column(j)? {
            Column::Frsz2(cv) => Some(cv),
            _ => None,
        })
    }
}
