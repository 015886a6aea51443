use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use frsz2::analyze::{exponent_histogram, value_histogram, ExponentHistogram, ValueHistogram};
use frsz2::sparsela::read_matrix_market;

use crate::codec::read_container;
use crate::io::read_raw_f64;
use crate::AnalyzeArgs;

/// Values of a `.mtx` matrix (its stored entries), a `.frsz2` container
/// (decoded) or a raw binary64 file.
pub fn load_values(path: &Path) -> anyhow::Result<Vec<f64>> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("mtx") => Ok(read_matrix_market(path).with_context(|| format!("loading {}", path.display()))?.values().to_vec()),
        Some("frsz2") => Ok(read_container(path)?.decompress()),
        _ => read_raw_f64(path),
    }
}

pub fn write_value_csv(path: &Path, h: Option<&ValueHistogram>) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["bin", "lower", "upper", "count"])?;
    if let Some(h) = h {
        for (k, count) in h.counts.iter().enumerate() {
            let (lo, hi) = h.bin_edges(k);
            w.write_record([k.to_string(), format!("{lo:e}"), format!("{hi:e}"), count.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_exponent_csv(path: &Path, h: &ExponentHistogram) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["exponent", "count"])?;
    for (e, count) in &h.counts {
        w.write_record([e.to_string(), count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &AnalyzeArgs) -> anyhow::Result<()> {
    let values = load_values(&args.input)?;
    let vh = value_histogram(&values, args.bins);
    let eh = exponent_histogram(&values);
    write_value_csv(&args.values_csv, vh.as_ref())?;
    write_exponent_csv(&args.exponents_csv, &eh)?;

    let show = |e: Option<i32>| e.map_or_else(|| "none".to_string(), |e| e.to_string());
    println!("values: {}", values.len());
    println!("zeros: {}", eh.zeros);
    println!("non_finite: {}", eh.non_finite);
    if let Some(h) = &vh {
        println!("min_value: {:e}", h.min);
        println!("max_value: {:e}", h.max);
    }
    println!("min_exponent: {}", show(eh.min_exponent()));
    println!("max_exponent: {}", show(eh.max_exponent()));
    Ok(())
}
