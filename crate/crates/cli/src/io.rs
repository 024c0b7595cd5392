//! Numeric text files: comma-separated rows, optional one-line header.

use std::path::Path;

use anyhow::{bail, Context, Result};
use binrec::DenseMatrix;

/// Reads numeric rows. A first line that does not parse as numbers is taken
/// as a header and skipped.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: malformed line", path.display()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => bail!("{}: record {}: {e}", path.display(), i + 1),
        }
    }
    if rows.is_empty() {
        bail!("{}: no numeric data", path.display());
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let rows = read_rows(path)?;
    DenseMatrix::from_rows(&rows).with_context(|| format!("{}: not a matrix", path.display()))
}

/// A vector stored either as one row or as one column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let rows = read_rows(path)?;
    if rows.len() == 1 {
        return Ok(rows.into_iter().next().unwrap());
    }
    if rows.iter().all(|r| r.len() == 1) {
        return Ok(rows.into_iter().map(|r| r[0]).collect());
    }
    bail!("{}: expected a single row or a single column", path.display())
}

/// `"0,3,5"` → `[0, 3, 5]`.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().with_context(|| format!("`{t}` is not an index")))
        .collect()
}

/// `"0.1,0.5,0.9"` → levels.
pub fn parse_levels(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(str::trim).map(|t| t.parse::<f64>().with_context(|| format!("`{t}` is not a number"))).collect()
}
