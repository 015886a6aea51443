//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//! Set `FRSZ2_BLESS_GOLDEN=1` to rewrite the golden container file.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use frsz2::basis::StorageFormat;
use frsz2::bench::BenchConfig;
use frsz2::codec::{compress, compress_block, max_abs_error_bound, storage_bytes, CompressedVector, Frsz2Params};
use frsz2::solver::{gmres_solve, ArnoldiOutcome, GmresConfig, GmresState, SolveResult};
use frsz2::sparsela::{gen_convdiff, generate_problem, scale_rows_geometric, CsrMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Criterion 1: Every round-tripped value is the exact truncation, strictly inside the
/// block bound and no larger in magnitude than the input.
fn codec_error_bound() -> Outcome {
    const N: usize = 1_000_000;
    for l in [16, 21, 32] {
        let mut rng = support::rng(u64::from(l));
        let values: Vec<f64> = (0..N).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let cv = compress(&values, &Frsz2Params::new(32, l).unwrap()).map_err(|e| e.to_string())?;
        let decoded = cv.decompress();
        for (b, chunk) in values.chunks(32).enumerate() {
            let e_max = support::block_exponent(chunk);
            ensure(cv.exponents()[b] == e_max, || format!("l={l} block {b}: exponent {}", cv.exponents()[b]))?;
            let bound = max_abs_error_bound(e_max, l);
            for (k, &x) in chunk.iter().enumerate() {
                let y = decoded[b * 32 + k];
                support::check_truncation(x, y, e_max, l).map_err(|e| format!("l={l}: {e}"))?;
                ensure((x - y).abs() < bound && y.abs() <= x.abs(), || format!("l={l}: {x:e} -> {y:e}"))?;
            }
        }
    }
    Ok(format!("{N} values for each of l = 16, 21, 32 match the exact-rational truncation"))
}

/// Criterion 2: All 8^4 blocks over a fixed grid, l = 8, against exhaustive search.
fn codec_oracle_equivalence() -> Outcome {
    let grid = [0.0, -0.0, 0.3, -0.75, 1.0, -1.5, 3.0e-3, 7.25];
    let mut blocks = 0;
    for index in 0..grid.len().pow(4) {
        let block: Vec<f64> = (0..4).map(|k| grid[index / grid.len().pow(k) % grid.len()]).collect();
        let (e_max, codes) = compress_block(&block, 8).map_err(|e| e.to_string())?;
        ensure(e_max == support::block_exponent(&block), || format!("{block:?}: exponent {e_max}"))?;
        for (&x, &c) in block.iter().zip(&codes) {
            let want = support::brute_force_code(x, e_max, 8);
            ensure(c == want, || format!("{block:?}: code {c:#x} for {x}, oracle {want:#x}"))?;
        }
        blocks += 1;
    }
    Ok(format!("{blocks} blocks bit-identical to the brute-force oracle"))
}

/// Criterion 3: Storage arithmetic.
fn storage_arithmetic() -> Outcome {
    let p = Frsz2Params::default();
    let bytes = storage_bytes(64, &p);
    ensure(bytes == 264, || format!("storage_bytes(64, 32, 32) = {bytes}"))?;
    ensure(p.bits_per_value() == 33.0, || format!("bits per value {}", p.bits_per_value()))?;
    Ok(format!("storage_bytes = {bytes}, bits per value = {}", p.bits_per_value()))
}

fn golden_input() -> Vec<f64> {
    let mut v: Vec<f64> = (0..100).map(|i| ((i + 1) as f64).sin() * 2f64.powi(i % 9 - 4)).collect();
    v[10] = 0.0;
    v[41] = -0.0;
    v[99] = -1e-3;
    v
}

fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_l21_bs32.frsz2")
}

/// Criterion 4: Serialization is lossless and byte-stable.
fn container_round_trip() -> Outcome {
    let values = golden_input();
    let params = Frsz2Params::new(32, 21).unwrap();
    let cv = compress(&values, &params).map_err(|e| e.to_string())?;
    let bytes = cv.to_bytes();
    let back = CompressedVector::from_bytes(&bytes).map_err(|e| e.to_string())?;
    ensure(back.decompress() == cv.decompress(), || "decoded values changed".into())?;
    ensure(compress(&back.decompress(), &params).map_err(|e| e.to_string())? == cv, || "recompression differs".into())?;

    let path = golden_path();
    if std::env::var_os("FRSZ2_BLESS_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(&path, &bytes).map_err(|e| e.to_string())?;
    }
    let golden = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(golden == bytes, || format!("{} differs from the serialized container", path.display()))?;
    let parsed = CompressedVector::from_bytes(&golden).map_err(|e| e.to_string())?;
    ensure(parsed.decompress() == cv.decompress(), || "golden file decodes differently".into())?;
    Ok(format!("{} values, {} bytes identical to the golden file", values.len(), golden.len()))
}

/// Criterion 5: Finite termination on diag(1..k).
fn solver_finite_termination() -> Outcome {
    let mut counts = Vec::new();
    for k in 2..=10usize {
        let a = CsrMatrix::from_diagonal(&(1..=k).map(|i| i as f64).collect::<Vec<_>>()).unwrap();
        let p = generate_problem(&a).map_err(|e| e.to_string())?;
        let cfg = GmresConfig { target_rrn: 1e-12, ..Default::default() };
        let res = gmres_solve(&a, &p.b, &vec![0.0; k], &cfg).map_err(|e| e.to_string())?;
        ensure(res.converged && res.final_rrn <= 1e-12, || format!("k={k}: rrn {:e}", res.final_rrn))?;
        ensure(res.total_iterations <= k, || format!("k={k}: {} iterations", res.total_iterations))?;
        counts.push(res.total_iterations);
    }
    // k = 1 has no generated right-hand side (sin 0 = 0)
    let res = gmres_solve(&CsrMatrix::identity(1), &[2.0], &[0.0], &GmresConfig { target_rrn: 1e-12, ..Default::default() })
        .map_err(|e| e.to_string())?;
    ensure(res.converged && res.total_iterations <= 1, || "k=1 failed".into())?;
    Ok(format!("iterations for k = 2..10: {counts:?}"))
}

/// Criterion 6: Arnoldi relation, orthogonality and the incremental least-squares
/// residual on random systems.
fn arnoldi_invariants() -> Outcome {
    let mut rng = support::rng(2024);
    let (mut worst_rel, mut worst_orth, mut worst_ls) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..20u64 {
        let n = rng.random_range(20..=200);
        let steps = rng.random_range(4..=20usize);
        let mut triplets: Vec<(usize, usize, f64)> =
            (0..5 * n).map(|_| (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(-1.0..1.0))).collect();
        triplets.extend((0..n).map(|i| (i, i, 3.0 + rng.random_range(0.0..1.0))));
        let a = CsrMatrix::from_triplets(n, n, &triplets).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();

        let mut state = GmresState::new(n, steps, StorageFormat::F64, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        state.start(&b).map_err(|e| e.to_string())?;
        for _ in 0..steps {
            let outcome = state.arnoldi_step(&a).map_err(|e| e.to_string())?;
            state.update_least_squares();
            ensure(outcome == ArnoldiOutcome::Continue, || format!("case {case}: early breakdown"))?;
        }
        let cols: Vec<DVector<f64>> =
            (0..=steps).map(|j| DVector::from_vec(state.basis().read_column(j).unwrap())).collect();
        let v = DMatrix::from_columns(&cols);
        let h = DMatrix::from_fn(steps + 1, steps, |i, j| state.hessenberg(i, j));
        let dense = a.to_dense();
        let ad = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
        let rel = (&ad * v.columns(0, steps) - &v * &h).norm() / a.frobenius_norm();
        let orth = (v.transpose() * &v - DMatrix::identity(steps + 1, steps + 1)).abs().max();
        let mut rhs = DVector::zeros(steps + 1);
        rhs[0] = state.beta();
        let y = h.clone().svd(true, true).solve(&rhs, 0.0).map_err(|e| e.to_string())?;
        let ls = ((&rhs - &h * &y).norm() - state.rhs()[steps].abs()).abs() / state.beta();
        worst_rel = worst_rel.max(rel);
        worst_orth = worst_orth.max(orth);
        worst_ls = worst_ls.max(ls);
    }
    ensure(worst_rel <= 1e-12, || format!("Arnoldi relation {worst_rel:e}"))?;
    ensure(worst_orth <= 1e-8, || format!("orthogonality {worst_orth:e}"))?;
    ensure(worst_ls <= 1e-12, || format!("least-squares residual mismatch {worst_ls:e}"))?;
    Ok(format!("20 systems: relation {worst_rel:.1e}, orthogonality {worst_orth:.1e}, |g| vs dense LS {worst_ls:.1e}"))
}

fn solve_with(a: &CsrMatrix, format: &str) -> Result<SolveResult, String> {
    let p = generate_problem(a).map_err(|e| e.to_string())?;
    let cfg = GmresConfig::with_format(format.parse().map_err(|e: frsz2::basis::BasisError| e.to_string())?);
    gmres_solve(a, &p.b, &vec![0.0; a.n_rows()], &cfg).map_err(|e| e.to_string())
}

/// Iteration counts measured on the first run of the ordering check.
const REGRESSION_ITERATIONS: [(&str, usize); 3] = [("f64", 626), ("frsz2-32", 627), ("f32", 658)];

/// Criterion 7: Storage-format ordering on the pinned convection-diffusion instance.
fn convergence_ordering() -> Outcome {
    let a = gen_convdiff(100, 100, 1.0).unwrap();
    let mut its = Vec::new();
    for (format, _) in REGRESSION_ITERATIONS {
        let res = solve_with(&a, format)?;
        ensure(res.converged, || format!("{format} did not converge (rrn {:e})", res.final_rrn))?;
        its.push(res.total_iterations);
    }
    let (f64_it, frsz_it, f32_it) = (its[0], its[1], its[2]);
    let detail = format!("f64 {f64_it}, frsz2-32 {frsz_it}, f32 {f32_it} iterations");
    ensure(f64_it <= frsz_it && frsz_it <= f32_it, || format!("ordering violated: {detail}"))?;
    ensure(frsz_it as f64 <= 1.5 * f64_it as f64, || format!("frsz2-32 above 1.5x f64: {detail}"))?;
    for ((format, want), got) in REGRESSION_ITERATIONS.iter().zip(&its) {
        ensure(want == got, || format!("{format}: {got} iterations, regression value {want}"))?;
    }
    Ok(detail)
}

/// Criterion 8: Half precision cannot cope with a wide exponent range.
fn half_precision_degradation() -> Outcome {
    let a = scale_rows_geometric(&gen_convdiff(14, 14, 1.0).unwrap(), 12.0).unwrap();
    let frsz = solve_with(&a, "frsz2-32")?;
    let half = solve_with(&a, "f16")?;
    ensure(frsz.converged, || format!("frsz2-32 did not converge (rrn {:e})", frsz.final_rrn))?;
    ensure(!half.converged, || format!("f16 converged in {} iterations", half.total_iterations))?;
    Ok(format!(
        "rows span 1e12: frsz2-32 converged in {} iterations, f16 stopped at rrn {:.2e} after {}",
        frsz.total_iterations, half.final_rrn, half.total_iterations
    ))
}

/// Criterion 9: Read throughput of frsz2-32 relative to f64.
fn throughput_report() -> Outcome {
    let cfg = BenchConfig {
        elements: 1 << 24,
        formats: vec![StorageFormat::F64, StorageFormat::frsz2(32).unwrap()],
        intensities: vec![4],
        trials: 10,
        seed: 0,
    };
    let rows = frsz2::bench::run(&cfg, |_| {}).map_err(|e| e.to_string())?;
    let (base, frsz) = (&rows[0], &rows[1]);
    let ratio = frsz.logical_gbps() / base.logical_gbps();
    let detail = format!(
        "intensity 4, 2^24 values: f64 {:.2} GB/s, frsz2-32 {:.2} GB/s logical = {:.1}% of f64",
        base.logical_gbps(),
        frsz.logical_gbps(),
        100.0 * ratio
    );
    ensure(ratio >= 0.5, || detail.clone())?;
    Ok(detail)
}

/// Criterion 10: Two identical solver invocations write identical residual files.
fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("residuals{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_frsz2"))
            .args(["solve", "--gen-convdiff", "40", "--format", "frsz2-21", "--restart", "30", "--residuals"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || format!("exit status {}", status.status))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "residual files differ".into())?;
    let lines = outputs[0].iter().filter(|&&b| b == b'\n').count();
    Ok(format!("two runs, {lines} identical lines"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("codec error bound", codec_error_bound),
        ("codec oracle equivalence", codec_oracle_equivalence),
        ("storage arithmetic", storage_arithmetic),
        ("container round trip", container_round_trip),
        ("solver finite termination", solver_finite_termination),
        ("Arnoldi and least-squares invariants", arnoldi_invariants),
        ("convergence ordering", convergence_ordering),
        ("half-precision degradation", half_precision_degradation),
        ("throughput report", throughput_report),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{}/{} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
