//! Little-endian FRSZ2 container file.
//!
//! ```text
//! offset  size  field
//!      0     6  magic "FRSZ2\0"
//!      6     2  format version (u16) = 1
//!      8     4  block size (u32)
//!     12     4  bit length (u32)
//!     16     8  element count (u64)
//!     24     -  exponents, ceil(n/BS) x u32
//!      -     -  payload, ceil(n/BS) * ceil(BS*l/32) x u32
//! ```

use std::io::{Read, Write};

use super::{CodecError, CompressedVector, Frsz2Params};

pub const MAGIC: &[u8; 6] = b"FRSZ2\0";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 24;

fn malformed(msg: impl Into<String>) -> CodecError {
    CodecError::Container(msg.into())
}

impl CompressedVector {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + self.storage_bytes());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.params.block_size() as u32).to_le_bytes());
        out.extend_from_slice(&self.params.bit_length().to_le_bytes());
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        for w in self.exponents.iter().chain(&self.payload) {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    /// Parses a complete container; trailing bytes are rejected.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() < HEADER_BYTES {
            return Err(malformed(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..6] != MAGIC {
            return Err(malformed("bad magic"));
        }
        let version = u16::from_le_bytes([bytes[6], bytes[7]]);
        if version != FORMAT_VERSION {
            return Err(malformed(format!("unsupported version {version}")));
        }
        let block_size = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let bit_length = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
        let len = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let params = Frsz2Params::new(block_size, bit_length).map_err(|e| malformed(e.to_string()))?;
        let len = usize::try_from(len).map_err(|_| malformed("element count overflows"))?;

        let blocks = params.num_blocks(len);
        let words = blocks
            .checked_mul(params.words_per_block() + 1)
            .ok_or_else(|| malformed("element count overflows"))?;
        let body = &bytes[HEADER_BYTES..];
        if body.len() as u128 != words as u128 * 4 {
            return Err(malformed(format!(
                "expected {} body bytes, found {}",
                words as u128 * 4,
                body.len()
            )));
        }
        let mut all: Vec<u32> = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let payload = all.split_off(blocks);
        Self::from_parts(params, len, all, payload)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writer.write_all(&self.to_bytes())
    }

    pub fn read_from<R: Read>(mut reader: R) -> Result<Self, CodecError> {
        let mut bytes = Vec::new();
        reader
            .read_to_end(&mut bytes)
            .map_err(|e| malformed(format!("read failed: {e}")))?;
        Self::from_bytes(&bytes)
    }
}
