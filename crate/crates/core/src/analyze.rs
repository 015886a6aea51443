//! Value and base-2 exponent histograms of a set of numbers.

use std::collections::BTreeMap;

/// Equal-width bins spanning `[min, max]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueHistogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<u64>,
}

impl ValueHistogram {
    pub fn bin_width(&self) -> f64 {
        if self.counts.len() <= 1 {
            0.0
        } else {
            (self.max - self.min) / self.counts.len() as f64
        }
    }

    /// Lower and upper edge of bin `k`.
    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        if self.counts.len() == 1 {
            return (self.min, self.max);
        }
        let w = self.bin_width();
        let hi = if k + 1 == self.counts.len() { self.max } else { self.min + w * (k + 1) as f64 };
        (self.min + w * k as f64, hi)
    }
}

/// Histogram of the finite values with `bins` bins. All-equal input gives a
/// single bin. Returns `None` when there are no finite values.
pub fn value_histogram(values: &[f64], bins: usize) -> Option<ValueHistogram> {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (min, max) = finite.clone().fold(None, |acc: Option<(f64, f64)>, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })?;
    let bins = if min == max { 1 } else { bins.max(1) };
    let mut counts = vec![0u64; bins];
    // the span of a finite range can still overflow, so scale before dividing
    let span = max / 2.0 - min / 2.0;
    for v in finite {
        let k = if bins == 1 { 0 } else { ((v / 2.0 - min / 2.0) / span * bins as f64) as usize };
        counts[k.min(bins - 1)] += 1;
    }
    Some(ValueHistogram { min, max, counts })
}

/// `floor(log2 |x|)` of a finite nonzero value, subnormals included.
pub fn exponent_of(x: f64) -> Option<i32> {
    if x == 0.0 || !x.is_finite() {
        return None;
    }
    let bits = x.to_bits() & !(1u64 << 63);
    let field = (bits >> 52) as i32;
    if field == 0 {
        // subnormal: the leading one sits among the 52 fraction bits
        Some(-1074 + 63 - bits.leading_zeros() as i32)
    } else {
        Some(field - 1023)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentHistogram {
    /// Count per integer exponent, ascending.
    pub counts: BTreeMap<i32, u64>,
    pub zeros: u64,
    pub non_finite: u64,
}

impl ExponentHistogram {
    pub fn min_exponent(&self) -> Option<i32> {
        self.counts.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.counts.keys().next_back().copied()
    }
}

pub fn exponent_histogram(values: &[f64]) -> ExponentHistogram {
    let mut h = ExponentHistogram::default();
    for &v in values {
        match exponent_of(v) {
            Some(e) => *h.counts.entry(e).or_default() += 1,
            None if v == 0.0 => h.zeros += 1,
            None => h.non_finite += 1,
        }
    }
    h
}
