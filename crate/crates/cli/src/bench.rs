use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use frsz2::basis::StorageFormat;
use frsz2::bench::{default_intensities, BenchConfig, BenchRow};

use crate::BenchArgs;

pub fn config(args: &BenchArgs) -> BenchConfig {
    BenchConfig {
        elements: 1usize << args.log2_elements,
        formats: if args.formats.is_empty() { StorageFormat::standard_set() } else { args.formats.clone() },
        intensities: if args.intensities.is_empty() { default_intensities() } else { args.intensities.clone() },
        trials: args.trials,
        seed: args.seed,
    }
}

pub fn write_csv(path: &Path, rows: &[BenchRow]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record([
        "format",
        "intensity",
        "elements",
        "trials",
        "min_seconds",
        "stored_bytes",
        "stored_gbps",
        "logical_gbps",
        "gflops",
    ])?;
    for r in rows {
        w.write_record([
            r.format.to_string(),
            r.intensity.to_string(),
            r.elements.to_string(),
            r.trials.to_string(),
            format!("{:e}", r.min_time.as_secs_f64()),
            r.stored_bytes.to_string(),
            format!("{:.4}", r.stored_gbps()),
            format!("{:.4}", r.logical_gbps()),
            format!("{:.4}", r.gflops()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Logical throughput of `row` as a fraction of the f64 row with the same
/// intensity, if there is one.
pub fn ratio_to_f64(rows: &[BenchRow], row: &BenchRow) -> Option<f64> {
    rows.iter()
        .find(|r| r.format == StorageFormat::F64 && r.intensity == row.intensity)
        .map(|base| row.logical_gbps() / base.logical_gbps())
}

pub fn run(args: &BenchArgs) -> anyhow::Result<()> {
    let cfg = config(args);
    let rows = frsz2::bench::run(&cfg, |r| {
        println!(
            "{:<12} intensity {:>3}: {:>9.3} ms  stored {:>7.2} GB/s  logical {:>7.2} GB/s",
            r.format.to_string(),
            r.intensity,
            r.min_time.as_secs_f64() * 1e3,
            r.stored_gbps(),
            r.logical_gbps()
        );
    })?;
    write_csv(&args.output, &rows)?;
    for r in rows.iter().filter(|r| r.format != StorageFormat::F64) {
        if let Some(ratio) = ratio_to_f64(&rows, r) {
            println!("{} at intensity {}: {:.1}% of f64 logical throughput", r.format, r.intensity, 100.0 * ratio);
        }
    }
    Ok(())
}
