//! Bit packing of `l`-bit codes into 32-bit words.
//!
//! Code `j` of a block occupies bits `[j*l, (j+1)*l)` of the block's bit
//! stream. Stream bit `b` lives in word `b / 32` at position `b % 32`
//! (LSB first), so a code's sign bit lands at the highest offset of its
//! span. `l = 16` and `l = 32` degenerate to plain 16/32-bit lanes and get
//! their own loops.

use super::{decode_code, exp2i};

#[inline]
fn mask(bits: u32) -> u128 {
    (1u128 << bits) - 1
}

/// Packs `codes` into `out`, which must hold `ceil(codes.len() * l / 32)`
/// words. Bits past the last code are cleared.
pub(crate) fn pack_block(codes: &[u64], bit_length: u32, out: &mut [u32]) {
    match bit_length {
        32 => {
            for (w, &c) in out.iter_mut().zip(codes) {
                *w = c as u32;
            }
        }
        16 => {
            out.fill(0);
            for (j, &c) in codes.iter().enumerate() {
                out[j / 2] |= (c as u32) << (16 * (j % 2));
            }
        }
        _ => {
            out.fill(0);
            let l = bit_length as usize;
            for (j, &c) in codes.iter().enumerate() {
                let bit = j * l;
                let mut spread = (c as u128) << (bit % 32);
                for w in out.iter_mut().skip(bit / 32) {
                    if spread == 0 {
                        break;
                    }
                    *w |= spread as u32;
                    spread >>= 32;
                }
            }
        }
    }
}

/// Extracts code `j` from a block's words.
#[inline]
pub(crate) fn unpack_code(words: &[u32], j: usize, bit_length: u32) -> u64 {
    match bit_length {
        32 => words[j] as u64,
        16 => ((words[j / 2] >> (16 * (j % 2))) & 0xffff) as u64,
        l if l < 32 => {
            let bit = j * l as usize;
            let first = bit / 32;
            let shift = bit % 32;
            let mut gathered = words[first] as u64;
            if shift + l as usize > 32 {
                gathered |= (words[first + 1] as u64) << 32;
            }
            (gathered >> shift) & ((1u64 << l) - 1)
        }
        _ => {
            let bit = j * bit_length as usize;
            let first = bit / 32;
            let shift = bit % 32;
            // a code of up to 64 bits starting anywhere in a word spans at
            // most three words
            let mut gathered = 0u128;
            for (k, &w) in words[first..].iter().take(3).enumerate() {
                gathered |= (w as u128) << (32 * k);
            }
            ((gathered >> shift) & mask(bit_length)) as u64
        }
    }
}

/// Scale of one magnitude step when every nonzero code of the block decodes
/// to a normal number and the magnitude field converts to `f64` exactly.
#[inline]
fn exact_step(e_max: u32, bit_length: u32) -> Option<f64> {
    let lowest = e_max as i32 - (bit_length as i32 - 2);
    (bit_length <= 54 && lowest >= 1).then(|| exp2i(lowest - 1023))
}

#[inline(always)]
fn scaled(code: u64, bit_length: u32, step: f64) -> f64 {
    let magnitude_bits = bit_length - 1;
    let sign = (code >> magnitude_bits) << 63;
    let magnitude = code & ((1u64 << magnitude_bits) - 1);
    // magnitude < 2^53, so the signed conversion is exact and vectorizes
    f64::from_bits(sign | ((magnitude as i64) as f64 * step).to_bits())
}

/// Fast-path decode with the code width known at compile time (`L < 32`).
fn decode_scaled<const L: u32>(words: &[u32], step: f64, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        let bit = j * L as usize;
        let first = bit / 32;
        let shift = bit % 32;
        let mut gathered = words[first] as u64;
        if shift + L as usize > 32 {
            gathered |= (words[first + 1] as u64) << 32;
        }
        *o = scaled((gathered >> shift) & ((1u64 << L) - 1), L, step);
    }
}

/// Decodes a whole block of `out.len()` codes.
pub(crate) fn decode_block(words: &[u32], e_max: u32, bit_length: u32, out: &mut [f64]) {
    if let Some(step) = exact_step(e_max, bit_length) {
        match bit_length {
            32 => {
                for (o, &w) in out.iter_mut().zip(words) {
                    *o = scaled(w as u64, 32, step);
                }
            }
            16 => {
                for (pair, &w) in out.chunks_mut(2).zip(words) {
                    pair[0] = scaled((w & 0xffff) as u64, 16, step);
                    if let Some(o) = pair.get_mut(1) {
                        *o = scaled((w >> 16) as u64, 16, step);
                    }
                }
            }
            21 => decode_scaled::<21>(words, step, out),
            _ => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = scaled(unpack_code(words, j, bit_length), bit_length, step);
                }
            }
        }
        return;
    }
    match bit_length {
        32 => {
            for (o, &w) in out.iter_mut().zip(words) {
                *o = decode_code(w as u64, e_max, 32);
            }
        }
        16 => {
            for (pair, &w) in out.chunks_mut(2).zip(words) {
                for (k, o) in pair.iter_mut().enumerate() {
                    *o = decode_code(((w >> (16 * k)) & 0xffff) as u64, e_max, 16);
                }
            }
        }
        _ => {
            for (j, o) in out.iter_mut().enumerate() {
                *o = decode_code(unpack_code(words, j, bit_length), e_max, bit_length);
            }
        }
    }
}
