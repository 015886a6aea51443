//! Read-throughput microbenchmark in the style of a roofline sweep: one long
//! vector is stored in a given format and streamed block by block through
//! the same read path the solver uses, with a fixed number of arithmetic
//! operations applied to every decoded value.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{BasisError, KrylovBasis, StorageFormat};

/// Intensities 1, 2, 4, ..., 128 operations per value.
pub fn default_intensities() -> Vec<u32> {
    (0..8).map(|k| 1 << k).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub elements: usize,
    pub formats: Vec<StorageFormat>,
    /// Arithmetic operations per value.
    pub intensities: Vec<u32>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            elements: 1 << 28,
            formats: StorageFormat::standard_set(),
            intensities: default_intensities(),
            trials: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub format: StorageFormat,
    pub intensity: u32,
    pub elements: usize,
    pub trials: usize,
    /// Fastest of all trials.
    pub min_time: Duration,
    pub stored_bytes: usize,
}

impl BenchRow {
    pub fn logical_bytes(&self) -> usize {
        self.elements * 8
    }

    /// Throughput in GB/s of the bytes actually held in memory.
    pub fn stored_gbps(&self) -> f64 {
        self.stored_bytes as f64 / self.min_time.as_secs_f64() / 1e9
    }

    /// Throughput in GB/s of the binary64 values delivered.
    pub fn logical_gbps(&self) -> f64 {
        self.logical_bytes() as f64 / self.min_time.as_secs_f64() / 1e9
    }

    pub fn gflops(&self) -> f64 {
        self.elements as f64 * self.intensity as f64 / self.min_time.as_secs_f64() / 1e9
    }
}

/// Independent accumulation chains; wide enough to hide operation latency.
const LANES: usize = 32;

/// Applies `intensity` operations to every value (alternating multiply and
/// add, one multiply-add pair per two operations). Values in `[-1, 1]` keep
/// the accumulators bounded.
fn consume(acc: &mut [f64; LANES], values: &[f64], intensity: u32) {
    for chunk in values.chunks(LANES) {
        let acc = &mut acc[..chunk.len()];
        for _ in 0..intensity / 2 {
            for (a, &x) in acc.iter_mut().zip(chunk) {
                *a = *a * x + 0.5;
            }
        }
        if intensity % 2 == 1 {
            for (a, &x) in acc.iter_mut().zip(chunk) {
                *a += x;
            }
        }
    }
}

/// One pass over column 0 of `basis`; returns a checksum so the work
/// cannot be optimized away.
pub fn read_pass(basis: &KrylovBasis, intensity: u32) -> Result<f64, BasisError> {
    let mut acc = [0.0; LANES];
    basis.for_each_block(0, |_, block| consume(&mut acc, block, intensity))?;
    Ok(acc.iter().sum())
}

/// Runs every (format, intensity) pair of `cfg`, calling `on_row` as each
/// result becomes available.
pub fn run(cfg: &BenchConfig, mut on_row: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>, BasisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let values: Vec<f64> = (0..cfg.elements).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let trials = cfg.trials.max(1);
    let mut rows = Vec::new();
    for &format in &cfg.formats {
        let mut basis = KrylovBasis::new(cfg.elements, 1, format)?;
        basis.write_vector(0, &values)?;
        for &intensity in &cfg.intensities {
            // one untimed pass to fault in pages and warm caches
            black_box(read_pass(&basis, intensity)?);
            let mut best = Duration::MAX;
            for _ in 0..trials {
                let start = Instant::now();
                black_box(read_pass(black_box(&basis), intensity)?);
                best = best.min(start.elapsed());
            }
            let row = BenchRow {
                format,
                intensity,
                elements: cfg.elements,
                trials,
                min_time: best,
                stored_bytes: basis.stored_bytes(),
            };
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}
