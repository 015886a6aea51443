//! FRSZ2 block floating-point codec.
//!
//! A vector of binary64 values is split into blocks of `BS` consecutive
//! values. Each block stores the largest biased IEEE exponent of its members
//! once, and every member as a fixed-length `l`-bit code: one sign bit, then
//! the significand (explicit leading one included) shifted right by the
//! distance between the member's exponent and the block exponent, truncated
//! to `l - 1` bits. With `c` the code and `e_max` the block exponent, a code
//! represents
//!
//! ```text
//! (-1)^c[l-1] * (c[l-2] . c[l-3] ... c[0])_2 * 2^(e_max - 1023)
//! ```
//!
//! Exponents and codes live in separate arrays. Codes are bit-packed into
//! 32-bit words per block; see [`pack`] for the bit order.

mod container;
pub(crate) mod pack;

pub use container::{FORMAT_VERSION, HEADER_BYTES, MAGIC};

use thiserror::Error;

/// Block size used throughout the solver and the CLI.
pub const DEFAULT_BLOCK_SIZE: usize = 32;

/// Largest biased exponent of a finite binary64 value.
pub const MAX_BIASED_EXPONENT: u32 = 2046;

const EXPONENT_BIAS: i64 = 1023;
const FRACTION_BITS: u32 = 52;
const FRACTION_MASK: u64 = (1 << FRACTION_BITS) - 1;
const EXPONENT_FIELD_MASK: u64 = 0x7ff;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("block size must be at least 1")]
    InvalidBlockSize,
    #[error("bit length {0} is outside the supported range 2..=64")]
    InvalidBitLength(u32),
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("index {index} out of range for a vector of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("block {block} out of range ({blocks} blocks)")]
    BlockOutOfRange { block: usize, blocks: usize },
    #[error("expected a block of {expected} values, got {got}")]
    BlockLength { expected: usize, got: usize },
    #[error("malformed container: {0}")]
    Container(String),
}

/// Compression configuration: values per block and bits per value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frsz2Params {
    block_size: usize,
    bit_length: u32,
}

impl Frsz2Params {
    pub fn new(block_size: usize, bit_length: u32) -> Result<Self, CodecError> {
        if block_size == 0 {
            return Err(CodecError::InvalidBlockSize);
        }
        if !(2..=64).contains(&bit_length) {
            return Err(CodecError::InvalidBitLength(bit_length));
        }
        Ok(Self { block_size, bit_length })
    }

    /// `BS = 32` with the given bit length.
    pub fn with_bit_length(bit_length: u32) -> Result<Self, CodecError> {
        Self::new(DEFAULT_BLOCK_SIZE, bit_length)
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn bit_length(&self) -> u32 {
        self.bit_length
    }

    /// Number of 32-bit payload words holding one block of codes.
    pub fn words_per_block(&self) -> usize {
        (self.block_size * self.bit_length as usize).div_ceil(32)
    }

    pub fn num_blocks(&self, n: usize) -> usize {
        n.div_ceil(self.block_size)
    }

    /// Average storage cost per value including the per-block exponent word.
    pub fn bits_per_value(&self) -> f64 {
        (self.words_per_block() * 32 + 32) as f64 / self.block_size as f64
    }
}

impl Default for Frsz2Params {
    fn default() -> Self {
        Self { block_size: DEFAULT_BLOCK_SIZE, bit_length: 32 }
    }
}

/// Bytes taken by the exponent and payload arrays of an `n`-value vector.
pub fn storage_bytes(n: usize, params: &Frsz2Params) -> usize {
    let blocks = params.num_blocks(n);
    blocks * params.words_per_block() * 4 + blocks * 4
}

/// Exclusive upper bound on the absolute truncation error of any value in
/// a block with biased exponent `e_max` and `bit_length`-bit codes.
///
/// Bounds below the smallest subnormal are reported as that subnormal.
pub fn max_abs_error_bound(e_max: u32, bit_length: u32) -> f64 {
    exp2i((e_max as i32 - EXPONENT_BIAS as i32 - (bit_length as i32 - 2)).max(-1074))
}

/// `2^e` built directly from its bit pattern, exact over the whole binary64
/// range including subnormals.
pub(crate) fn exp2i(e: i32) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e as i64 + EXPONENT_BIAS) as u64) << FRACTION_BITS)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

#[inline]
fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Biased exponent field of `x`, with zeros and subnormals reported as 0.
#[inline]
fn exponent_field(x: f64) -> u32 {
    ((x.to_bits() >> FRACTION_BITS) & EXPONENT_FIELD_MASK) as u32
}

/// Shared exponent of a block: the largest biased exponent among its
/// nonzero normal members, 0 when there is none.
fn block_exponent(values: &[f64], offset: usize) -> Result<u32, CodecError> {
    let mut e_max = 0;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(CodecError::NonFinite { index: offset + i, value: v });
        }
        e_max = e_max.max(exponent_field(v));
    }
    Ok(e_max)
}

/// Encodes one finite value against the block exponent.
#[inline]
fn encode_value(x: f64, e_max: u32, bit_length: u32) -> u64 {
    let bits = x.to_bits();
    let sign = bits >> 63;
    let exponent = exponent_field(x);
    let magnitude = if exponent == 0 {
        // zero or subnormal: flushed
        0
    } else {
        let significand = (1u64 << FRACTION_BITS) | (bits & FRACTION_MASK);
        // The significand's leading one sits at bit 52 and must land at bit
        // l - 2 - k, k = e_max - exponent.
        let shift = (e_max - exponent) as i32 + FRACTION_BITS as i32 + 2 - bit_length as i32;
        if shift >= 64 {
            0
        } else if shift >= 0 {
            significand >> shift
        } else {
            significand << -shift
        }
    };
    (sign << (bit_length - 1)) | magnitude
}

/// Decodes one code against its block exponent.
#[inline]
pub fn decode_code(code: u64, e_max: u32, bit_length: u32) -> f64 {
    let magnitude_bits = bit_length - 1;
    let sign = (code >> magnitude_bits) & 1;
    let magnitude = code & low_mask(magnitude_bits);
    if magnitude == 0 {
        return f64::from_bits(sign << 63);
    }
    let top = 63 - magnitude.leading_zeros();
    // number of zeros inserted in front of the leading one
    let inserted = (bit_length - 2 - top) as i64;
    let exponent = e_max as i64 - inserted;
    if exponent <= 0 {
        return f64::from_bits(sign << 63);
    }
    let rest = magnitude ^ (1u64 << top);
    let fraction = if top <= FRACTION_BITS {
        rest << (FRACTION_BITS - top)
    } else {
        rest >> (top - FRACTION_BITS)
    };
    f64::from_bits((sign << 63) | ((exponent as u64) << FRACTION_BITS) | fraction)
}

/// Compresses exactly one block and returns its shared exponent together
/// with the unpacked `bit_length`-bit codes (in the low bits of each `u64`).
pub fn compress_block(values: &[f64], bit_length: u32) -> Result<(u32, Vec<u64>), CodecError> {
    if !(2..=64).contains(&bit_length) {
        return Err(CodecError::InvalidBitLength(bit_length));
    }
    let e_max = block_exponent(values, 0)?;
    let codes = values.iter().map(|&v| encode_value(v, e_max, bit_length)).collect();
    Ok((e_max, codes))
}

/// Compresses a whole vector. The final partial block is zero-padded.
pub fn compress(values: &[f64], params: &Frsz2Params) -> Result<CompressedVector, CodecError> {
    let mut cv = CompressedVector::zeroed(*params, values.len());
    cv.encode_from(values)?;
    Ok(cv)
}

/// One compressed binary64 vector: per-block exponents plus packed codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedVector {
    params: Frsz2Params,
    len: usize,
    exponents: Vec<u32>,
    payload: Vec<u32>,
}

impl CompressedVector {
    /// A vector of `len` zeros.
    pub fn zeroed(params: Frsz2Params, len: usize) -> Self {
        let blocks = params.num_blocks(len);
        Self {
            params,
            len,
            exponents: vec![0; blocks],
            payload: vec![0; blocks * params.words_per_block()],
        }
    }

    /// Reassembles a vector from raw arrays, checking every layout invariant.
    pub fn from_parts(
        params: Frsz2Params,
        len: usize,
        exponents: Vec<u32>,
        payload: Vec<u32>,
    ) -> Result<Self, CodecError> {
        let blocks = params.num_blocks(len);
        if exponents.len() != blocks {
            return Err(CodecError::Container(format!(
                "expected {blocks} exponents, found {}",
                exponents.len()
            )));
        }
        let words = params.words_per_block();
        if payload.len() != blocks * words {
            return Err(CodecError::Container(format!(
                "expected {} payload words, found {}",
                blocks * words,
                payload.len()
            )));
        }
        if let Some((b, &e)) = exponents.iter().enumerate().find(|(_, &e)| e > MAX_BIASED_EXPONENT) {
            return Err(CodecError::Container(format!("block {b} has invalid exponent {e}")));
        }
        let cv = Self { params, len, exponents, payload };
        cv.check_padding()?;
        Ok(cv)
    }

    fn check_padding(&self) -> Result<(), CodecError> {
        let bs = self.params.block_size;
        let l = self.params.bit_length;
        let used_bits = bs * l as usize;
        let words = self.params.words_per_block();
        if !used_bits.is_multiple_of(32) {
            let spare = !((1u32 << (used_bits % 32)) - 1);
            for (b, block) in self.payload.chunks_exact(words).enumerate() {
                if block[words - 1] & spare != 0 {
                    return Err(CodecError::Container(format!("block {b} has nonzero trailing bits")));
                }
            }
        }
        if let Some(last) = self.exponents.len().checked_sub(1) {
            let block = self.block_words(last);
            for r in (self.len - last * bs)..bs {
                if pack::unpack_code(block, r, l) != 0 {
                    return Err(CodecError::Container(format!(
                        "padding position {} past the end is nonzero",
                        last * bs + r
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &Frsz2Params {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_blocks(&self) -> usize {
        self.exponents.len()
    }

    /// Biased shared exponent of each block.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn payload(&self) -> &[u32] {
        &self.payload
    }

    /// Size of the exponent and payload arrays in bytes.
    pub fn storage_bytes(&self) -> usize {
        (self.exponents.len() + self.payload.len()) * 4
    }

    fn block_words(&self, block: usize) -> &[u32] {
        let words = self.params.words_per_block();
        &self.payload[block * words..(block + 1) * words]
    }

    /// Re-encodes the whole vector in place from `values`.
    ///
    /// On error the contents are unspecified but still well-formed.
    pub fn encode_from(&mut self, values: &[f64]) -> Result<(), CodecError> {
        if values.len() != self.len {
            return Err(CodecError::BlockLength { expected: self.len, got: values.len() });
        }
        let bs = self.params.block_size;
        let l = self.params.bit_length;
        let words = self.params.words_per_block();
        let mut codes = vec![0u64; bs];
        for (b, (chunk, out)) in values
            .chunks(bs)
            .zip(self.payload.chunks_exact_mut(words))
            .enumerate()
        {
            let e_max = block_exponent(chunk, b * bs)?;
            self.exponents[b] = e_max;
            for (code, &v) in codes.iter_mut().zip(chunk) {
                *code = encode_value(v, e_max, l);
            }
            codes[chunk.len()..].fill(0);
            pack::pack_block(&codes, l, out);
        }
        Ok(())
    }

    /// Raw `l`-bit code of element `index`.
    pub fn code(&self, index: usize) -> Result<u64, CodecError> {
        if index >= self.len {
            return Err(CodecError::IndexOutOfRange { index, len: self.len });
        }
        let bs = self.params.block_size;
        Ok(pack::unpack_code(self.block_words(index / bs), index % bs, self.params.bit_length))
    }

    /// Random access to one element.
    pub fn decompress_value(&self, index: usize) -> Result<f64, CodecError> {
        let code = self.code(index)?;
        let e_max = self.exponents[index / self.params.block_size];
        Ok(decode_code(code, e_max, self.params.bit_length))
    }

    /// Decodes block `block` into `out` (length `BS`); padding decodes to 0.0.
    pub fn decompress_block_into(&self, block: usize, out: &mut [f64]) -> Result<(), CodecError> {
        let blocks = self.num_blocks();
        if block >= blocks {
            return Err(CodecError::BlockOutOfRange { block, blocks });
        }
        let bs = self.params.block_size;
        if out.len() != bs {
            return Err(CodecError::BlockLength { expected: bs, got: out.len() });
        }
        pack::decode_block(self.block_words(block), self.exponents[block], self.params.bit_length, out);
        Ok(())
    }

    pub fn decompress_block(&self, block: usize) -> Result<Vec<f64>, CodecError> {
        let mut out = vec![0.0; self.params.block_size];
        self.decompress_block_into(block, &mut out)?;
        Ok(out)
    }

    /// Decodes the whole vector.
    pub fn decompress(&self) -> Vec<f64> {
        let bs = self.params.block_size;
        let mut out = vec![0.0; self.num_blocks() * bs];
        for (b, chunk) in out.chunks_exact_mut(bs).enumerate() {
            pack::decode_block(self.block_words(b), self.exponents[b], self.params.bit_length, chunk);
        }
        out.truncate(self.len);
        out
    }

    /// Calls `f(block_index, values)` for every block in order, reusing one
    /// scratch buffer. The final block is trimmed to the vector length.
    pub fn for_each_block(&self, scratch: &mut Vec<f64>, mut f: impl FnMut(usize, &[f64])) {
        let bs = self.params.block_size;
        scratch.resize(bs, 0.0);
        for b in 0..self.num_blocks() {
            pack::decode_block(self.block_words(b), self.exponents[b], self.params.bit_length, scratch);
            let valid = bs.min(self.len - b * bs);
            f(b, &scratch[..valid]);
        }
    }
}
