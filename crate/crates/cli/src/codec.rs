use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};

use anyhow::Context;
use frsz2::codec::{compress, max_abs_error_bound, CompressedVector, Frsz2Params, HEADER_BYTES};

use crate::io::{read_raw_f64, write_raw_f64};
use crate::{CodecCommand, ParamArgs};

fn params(p: &ParamArgs) -> anyhow::Result<Frsz2Params> {
    Ok(Frsz2Params::new(p.block_size, p.bit_length)?)
}

/// Errors and sizes of one in-memory round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub values: usize,
    pub max_abs_error: f64,
    /// Largest per-block error bound.
    pub max_error_bound: f64,
    /// Every value is strictly within its block's bound.
    pub within_bound: bool,
    pub compressed_bytes: usize,
    pub container_bytes: usize,
    pub raw_bytes: usize,
}

pub fn roundtrip(values: &[f64], params: &Frsz2Params) -> anyhow::Result<RoundtripReport> {
    let cv = compress(values, params)?;
    let decoded = cv.decompress();
    let bs = params.block_size();
    let mut max_abs_error = 0.0f64;
    let mut max_error_bound = 0.0f64;
    let mut within_bound = true;
    for (b, (xs, ys)) in values.chunks(bs).zip(decoded.chunks(bs)).enumerate() {
        let bound = max_abs_error_bound(cv.exponents()[b], params.bit_length());
        max_error_bound = max_error_bound.max(bound);
        for (x, y) in xs.iter().zip(ys) {
            let err = (x - y).abs();
            max_abs_error = max_abs_error.max(err);
            within_bound &= err < bound;
        }
    }
    Ok(RoundtripReport {
        values: values.len(),
        max_abs_error,
        max_error_bound,
        within_bound,
        compressed_bytes: cv.storage_bytes(),
        container_bytes: HEADER_BYTES + cv.storage_bytes(),
        raw_bytes: values.len() * 8,
    })
}

pub fn run(cmd: &CodecCommand) -> anyhow::Result<()> {
    match cmd {
        CodecCommand::Compress { input, output, params: p } => {
            let values = read_raw_f64(input)?;
            let cv = compress(&values, &params(p)?)?;
            let mut w = BufWriter::new(File::create(output).with_context(|| format!("creating {}", output.display()))?);
            cv.write_to(&mut w)?;
            w.flush()?;
            println!("compressed {} values into {} bytes", values.len(), HEADER_BYTES + cv.storage_bytes());
        }
        CodecCommand::Decompress { input, output } => {
            let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
            let cv = CompressedVector::read_from(BufReader::new(file)).with_context(|| format!("parsing {}", input.display()))?;
            write_raw_f64(output, &cv.decompress())?;
            println!("decompressed {} values", cv.len());
        }
        CodecCommand::Roundtrip { input, params: p } => {
            let values = read_raw_f64(input)?;
            let r = roundtrip(&values, &params(p)?)?;
            println!("values: {}", r.values);
            println!("max_abs_error: {:e}", r.max_abs_error);
            println!("max_error_bound: {:e}", r.max_error_bound);
            println!("within_bound: {}", r.within_bound);
            println!("compressed_bytes: {}", r.compressed_bytes);
            println!("container_bytes: {}", r.container_bytes);
            println!("raw_bytes: {}", r.raw_bytes);
        }
    }
    Ok(())
}

/// Reads a container file fully; used by `analyze` for `.frsz2` inputs.
pub fn read_container(path: &std::path::Path) -> anyhow::Result<CompressedVector> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    CompressedVector::from_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))
}
