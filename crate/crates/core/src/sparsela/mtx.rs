//! MatrixMarket coordinate format, `real`/`integer` fields, `general` or
//! `symmetric` storage. Indices in files are 1-based.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{CsrMatrix, LinalgError};

fn parse_err(line: usize, message: impl Into<String>) -> LinalgError {
    LinalgError::Parse { line, message: message.into() }
}

/// Parses a MatrixMarket coordinate file. Symmetric files are expanded to
/// full storage and duplicate entries are summed.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix, LinalgError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header.map_err(|e| LinalgError::Io(e.to_string()))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, "header must start with %%MatrixMarket"));
    }
    match tokens.get(1..4) {
        Some([object, format, field]) => {
            if object != "matrix" {
                return Err(parse_err(1, format!("unsupported object `{object}`")));
            }
            if format != "coordinate" {
                return Err(parse_err(1, format!("unsupported format `{format}`, expected coordinate")));
            }
            if field != "real" && field != "integer" {
                return Err(parse_err(1, format!("unsupported field `{field}`")));
            }
        }
        _ => return Err(parse_err(1, "incomplete header")),
    }
    let symmetric = match tokens.get(4).map(String::as_str) {
        Some("general") => false,
        Some("symmetric") => true,
        Some(other) => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
        None => return Err(parse_err(1, "missing symmetry in header")),
    };

    let mut size = None;
    let mut triplets = Vec::new();
    let mut entries = 0usize;
    let mut last_line = 1;
    for (number, line) in lines {
        last_line = number;
        let line = line.map_err(|e| LinalgError::Io(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some((n_rows, n_cols, nnz)) = size else {
            if fields.len() != 3 {
                return Err(parse_err(number, "size line must have three integers"));
            }
            let parse = |s: &str| s.parse::<usize>().map_err(|_| parse_err(number, format!("bad size `{s}`")));
            let (r, c, z) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            if symmetric && r != c {
                return Err(parse_err(number, "symmetric matrix must be square"));
            }
            size = Some((r, c, z));
            triplets.reserve(if symmetric { 2 * z } else { z });
            continue;
        };
        if fields.len() != 3 {
            return Err(parse_err(number, format!("expected `row col value`, found {} fields", fields.len())));
        }
        if entries == nnz {
            return Err(parse_err(number, format!("more than the declared {nnz} entries")));
        }
        let index = |s: &str, bound: usize| -> Result<usize, LinalgError> {
            let i = s.parse::<usize>().map_err(|_| parse_err(number, format!("bad index `{s}`")))?;
            if i == 0 || i > bound {
                return Err(parse_err(number, format!("index {i} out of bounds 1..={bound}")));
            }
            Ok(i - 1)
        };
        let i = index(fields[0], n_rows)?;
        let j = index(fields[1], n_cols)?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(number, format!("bad value `{}`", fields[2])))?;
        if !v.is_finite() {
            return Err(parse_err(number, format!("non-finite value `{}`", fields[2])));
        }
        triplets.push((i, j, v));
        if symmetric && i != j {
            triplets.push((j, i, v));
        }
        entries += 1;
    }
    let (n_rows, n_cols, nnz) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if entries != nnz {
        return Err(parse_err(last_line, format!("declared {nnz} entries, found {entries}")));
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix, LinalgError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LinalgError::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_market(BufReader::new(file))
}

/// Writes `a` as a `general` coordinate file. Values use the shortest
/// representation that parses back to the same binary64.
pub fn write_matrix_market<W: Write>(a: &CsrMatrix, mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(writer, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(writer, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}
