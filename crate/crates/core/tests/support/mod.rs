//! Reference implementations used to check the library. They share no code
//! with it: exponents come straight from the bit pattern, truncation is done
//! on exact big-integer rationals, and sums are compensated.
#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The raw 11-bit exponent field, with subnormals reported as 0.
pub fn biased_exponent(x: f64) -> u32 {
    let field = ((x.to_bits() >> 52) & 0x7ff) as u32;
    if x.is_subnormal() {
        0
    } else {
        field
    }
}

pub fn block_exponent(values: &[f64]) -> u32 {
    values.iter().map(|&v| biased_exponent(v)).max().unwrap_or(0)
}

/// `x = m * 2^e` with `m` an integer, exactly.
pub fn exact(x: f64) -> (BigInt, i64) {
    assert!(x.is_finite());
    let bits = x.to_bits();
    let field = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (m, e) = if field == 0 { (fraction, -1074) } else { (fraction | (1u64 << 52), field - 1075) };
    let m = BigInt::from(m);
    (if x.is_sign_negative() { -m } else { m }, e)
}

/// Brings `a * 2^ea` and `b * 2^eb` to a common exponent.
fn align((a, ea): (BigInt, i64), (b, eb): (BigInt, i64)) -> (BigInt, BigInt) {
    let e = ea.min(eb);
    (a << (ea - e) as usize, b << (eb - e) as usize)
}

/// Quantum of the magnitude field: `2^((e_max - 1023) - (l - 2))`.
pub fn step_exponent(e_max: u32, bit_length: u32) -> i64 {
    e_max as i64 - 1023 - (bit_length as i64 - 2)
}

/// Truncated magnitude `floor(|x| / 2^step)` computed on exact rationals.
pub fn truncated_magnitude(x: f64, e_max: u32, bit_length: u32) -> BigInt {
    if x == 0.0 || x.is_subnormal() {
        return BigInt::zero();
    }
    let (m, e) = exact(x.abs());
    let shift = e - step_exponent(e_max, bit_length);
    if shift >= 0 {
        m << shift as usize
    } else {
        m >> (-shift) as usize
    }
}

/// The code the truncation rule assigns to `x`: sign in bit `l - 1`, then
/// the truncated magnitude.
pub fn truncation_code(x: f64, e_max: u32, bit_length: u32) -> u64 {
    let c = truncated_magnitude(x, e_max, bit_length);
    let (_, digits) = c.to_u64_digits();
    let c = digits.first().copied().unwrap_or(0);
    assert!(bit_length == 64 || c < 1u64 << (bit_length - 1), "magnitude overflows its field");
    ((x.is_sign_negative() as u64) << (bit_length - 1)) | c
}

/// Checks that `decoded` is exactly `sign(x) * floor(|x| / q) * q` with
/// `q = 2^step`, that `|x - decoded| < q` and that `|decoded| <= |x|`.
pub fn check_truncation(x: f64, decoded: f64, e_max: u32, bit_length: u32) -> Result<(), String> {
    let s = step_exponent(e_max, bit_length);
    let c = truncated_magnitude(x, e_max, bit_length);
    let signed = if x.is_sign_negative() { -c } else { c };
    let (want, got) = align((signed, s), exact(decoded));
    if want != got {
        return Err(format!("{x:e} decoded to {decoded:e}, expected the truncation at step 2^{s}"));
    }
    let (diff, bound) = {
        let (a, b) = align(exact(x), exact(decoded));
        let diff = (a - b).abs();
        let ex = exact(x).1.min(exact(decoded).1);
        align((diff, ex), (BigInt::from(1), s))
    };
    if diff.cmp(&bound) != Ordering::Less {
        return Err(format!("{x:e} -> {decoded:e}: error not below 2^{s}"));
    }
    let (ax, ad) = align(exact(x.abs()), exact(decoded.abs()));
    if ad > ax {
        return Err(format!("{x:e} -> {decoded:e}: magnitude grew"));
    }
    if decoded != 0.0 && decoded.is_sign_negative() != x.is_sign_negative() {
        return Err(format!("{x:e} -> {decoded:e}: sign flipped"));
    }
    Ok(())
}

/// Enumerates every magnitude code and returns the code of the largest
/// value not exceeding `|x|`. Only for small `bit_length`.
pub fn brute_force_code(x: f64, e_max: u32, bit_length: u32) -> u64 {
    assert!(bit_length <= 16);
    let sign = (x.is_sign_negative() as u64) << (bit_length - 1);
    if x == 0.0 || x.is_subnormal() {
        return sign;
    }
    let step = 2f64.powi(step_exponent(e_max, bit_length) as i32);
    assert!(step > 0.0);
    let magnitude = x.abs();
    let best = (0..1u64 << (bit_length - 1)).filter(|&m| m as f64 * step <= magnitude).max().unwrap();
    sign | best
}

/// Neumaier-compensated sum.
pub fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s) + t;
        } else {
            c += (t - s) + sum;
        }
        sum = s;
    }
    sum + c
}

/// Dot product with each product split exactly (two-product via FMA) and
/// everything summed with compensation.
pub fn compensated_dot(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    compensated_sum(x.iter().zip(y).flat_map(|(&a, &b)| {
        let p = a * b;
        [p, a.mul_add(b, -p)]
    }))
}

/// Row-by-row product with a dense matrix.
pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| compensated_dot(row, x)).collect()
}
