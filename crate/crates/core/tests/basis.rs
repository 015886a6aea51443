mod support;

use frsz2::basis::{KrylovBasis, StorageFormat};
use proptest::prelude::*;
use rand::Rng;

use support::{block_exponent, compensated_dot};

fn formats() -> Vec<StorageFormat> {
    let mut all = StorageFormat::standard_set();
    all.push("frsz2-21-bs8".parse().unwrap());
    all
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = support::rng(seed);
    (0..n).map(|_| rng.random_range(-1.0..=1.0) * 10f64.powi(rng.random_range(-6..=0))).collect()
}

fn max_error(format: StorageFormat, v: &[f64]) -> f64 {
    let mut basis = KrylovBasis::new(v.len(), 1, format).unwrap();
    basis.write_vector(0, v).unwrap();
    basis.read_column(0).unwrap().iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn fidelity_is_ordered() {
    let f32_fmt: StorageFormat = "f32".parse().unwrap();
    let f16_fmt: StorageFormat = "f16".parse().unwrap();
    let frsz = |l| StorageFormat::frsz2(l).unwrap();
    for seed in 0..50 {
        let v = random_vector(1000, seed);
        assert_eq!(max_error(StorageFormat::F64, &v), 0.0);
        assert!(max_error(f16_fmt, &v) >= max_error(f32_fmt, &v));
        let by_length: Vec<f64> = [32, 21, 16].map(|l| max_error(frsz(l), &v)).to_vec();
        assert!(by_length[0] > 0.0);
        assert!(by_length.windows(2).all(|w| w[0] <= w[1]), "{by_length:?}");
    }
}

#[test]
fn frsz2_32_beats_f32_on_shared_exponent_blocks() {
    let mut rng = support::rng(5);
    let frsz32 = StorageFormat::frsz2(32).unwrap();
    for _ in 0..200 {
        let e = rng.random_range(900u64..1100);
        let v: Vec<f64> = (0..96)
            .map(|_| f64::from_bits(((rng.random::<bool>() as u64) << 63) | (e << 52) | (rng.random::<u64>() >> 12)))
            .collect();
        let mut basis = KrylovBasis::new(v.len(), 1, frsz32).unwrap();
        basis.write_vector(0, &v).unwrap();
        let unit = 2f64.powi(e as i32 - 1023);
        for (x, y) in v.iter().zip(basis.read_column(0).unwrap()) {
            assert!((x - y).abs() <= 2f64.powi(-30) * unit);
            assert!((x - y).abs() < 2f64.powi(-24) * x.abs());
        }
    }
}

#[test]
fn frsz2_error_stays_under_block_bound() {
    for l in [16, 21, 32] {
        let format = StorageFormat::frsz2(l).unwrap();
        let v = random_vector(777, u64::from(l));
        let mut basis = KrylovBasis::new(v.len(), 1, format).unwrap();
        basis.write_vector(0, &v).unwrap();
        let read = basis.read_column(0).unwrap();
        for (b, chunk) in v.chunks(32).enumerate() {
            let bound = frsz2::codec::max_abs_error_bound(block_exponent(chunk), l);
            for (k, &x) in chunk.iter().enumerate() {
                assert!((x - read[b * 32 + k]).abs() < bound);
            }
        }
    }
}

#[test]
fn columns_do_not_interfere() {
    let n = 333;
    for format in formats() {
        let mut basis = KrylovBasis::new(n, 4, format).unwrap();
        for j in 0..4 {
            basis.write_vector(j, &random_vector(n, j as u64)).unwrap();
        }
        let snapshot: Vec<Vec<f64>> = (0..4).map(|j| basis.read_column(j).unwrap()).collect();
        basis.write_vector(2, &random_vector(n, 99)).unwrap();
        for j in [0, 1, 3] {
            assert_eq!(basis.read_column(j).unwrap(), snapshot[j], "{format}");
        }
        assert_ne!(basis.read_column(2).unwrap(), snapshot[2]);
    }
}

#[test]
fn dot_matches_compensated_oracle() {
    let n = 5000;
    for format in formats() {
        let mut basis = KrylovBasis::new(n, 1, format).unwrap();
        basis.write_vector(0, &random_vector(n, 3)).unwrap();
        let v = basis.read_column(0).unwrap();
        let w = random_vector(n, 4);
        let scale: f64 = v.iter().zip(&w).map(|(a, b)| (a * b).abs()).sum();
        let got = basis.dot(0, &w).unwrap();
        assert!((got - compensated_dot(&v, &w)).abs() <= 2f64.powi(-40) * scale, "{format}");

        let mut y = w.clone();
        basis.axpy(0, 0.375, &mut y).unwrap();
        for ((y, w), v) in y.iter().zip(&w).zip(&v) {
            assert_eq!(*y, w - 0.375 * v);
        }
    }
}

#[test]
fn block_and_element_reads_agree() {
    let n = 101;
    for format in formats() {
        let mut basis = KrylovBasis::new(n, 2, format).unwrap();
        basis.write_vector(0, &random_vector(n, 7)).unwrap();
        basis.write_vector(1, &random_vector(n, 8)).unwrap();
        let bs = basis.block_size();
        let column = basis.read_column(1).unwrap();
        for b in 0..basis.num_blocks() {
            let block = basis.read_block(1, b).unwrap();
            assert_eq!(block.len(), bs);
            for (k, &v) in block.iter().enumerate() {
                let i = b * bs + k;
                if i < n {
                    assert_eq!(v.to_bits(), basis.read_value(1, i).unwrap().to_bits());
                    assert_eq!(v.to_bits(), column[i].to_bits());
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
        assert_eq!(basis.stored_bytes(), 2 * format.storage_bytes(n));
    }
}

proptest! {
    #[test]
    fn f64_storage_is_transparent(v in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..200)) {
        let mut basis = KrylovBasis::new(v.len(), 1, StorageFormat::F64).unwrap();
        basis.write_vector(0, &v).unwrap();
        let back = basis.read_column(0).unwrap();
        prop_assert_eq!(back.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), v.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn narrow_lanes_round_to_nearest(v in proptest::collection::vec(-1e4f64..1e4, 1..100)) {
        for (name, narrow) in [("f32", (|x: f64| x as f32 as f64) as fn(f64) -> f64), ("f16", |x| half::f16::from_f64(x).to_f64())] {
            let mut basis = KrylovBasis::new(v.len(), 1, name.parse().unwrap()).unwrap();
            basis.write_vector(0, &v).unwrap();
            for (x, y) in v.iter().zip(basis.read_column(0).unwrap()) {
                prop_assert_eq!(y, narrow(*x));
            }
        }
    }
}
