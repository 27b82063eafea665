//! Matrix Market text files: sparse symmetric (`coordinate real symmetric`)
//! and dense (`array real general`, column-major).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use eigrom_core::linalg::{DenseMatrix, SparseSymMatrix};

use crate::report::fmt_f64;

/// Lower triangle, 1-based, as the format requires for `symmetric`.
pub fn sparse_to_string(a: &SparseSymMatrix, comment: &str) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    for line in comment.lines() {
        let _ = writeln!(s, "% {line}");
    }
    let entries: Vec<_> = a.upper_entries().collect();
    let _ = writeln!(s, "{} {} {}", a.dim(), a.dim(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(s, "{} {} {}", j + 1, i + 1, fmt_f64(v));
    }
    s
}

pub fn dense_to_string(a: &DenseMatrix, comment: &str) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    for line in comment.lines() {
        let _ = writeln!(s, "% {line}");
    }
    let _ = writeln!(s, "{} {}", a.nrows(), a.ncols());
    for v in a.as_slice() {
        let _ = writeln!(s, "{}", fmt_f64(*v));
    }
    s
}

pub fn write_sparse(path: &Path, a: &SparseSymMatrix, comment: &str) -> Result<()> {
    fs::write(path, sparse_to_string(a, comment)).with_context(|| format!("writing {}", path.display()))
}

pub fn write_dense(path: &Path, a: &DenseMatrix, comment: &str) -> Result<()> {
    fs::write(path, dense_to_string(a, comment)).with_context(|| format!("writing {}", path.display()))
}

/// Header fields after `%%MatrixMarket matrix`, lower-cased.
struct Header {
    format: String,
    field: String,
    symmetry: String,
}

fn split_body(text: &str) -> Result<(Header, Vec<&str>)> {
    let mut lines = text.lines();
    let first = lines.next().context("empty Matrix Market file")?;
    let words: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    ensure!(
        words.len() == 5 && words[0] == "%%matrixmarket" && words[1] == "matrix",
        "bad Matrix Market banner: {first}"
    );
    let header = Header {
        format: words[2].clone(),
        field: words[3].clone(),
        symmetry: words[4].clone(),
    };
    ensure!(header.field == "real" || header.field == "integer", "unsupported field '{}'", header.field);
    let body = lines.filter(|l| !l.starts_with('%') && !l.trim().is_empty()).collect();
    Ok((header, body))
}

fn parse_usize(tok: Option<&str>, what: &str) -> Result<usize> {
    tok.with_context(|| format!("missing {what}"))?
        .parse()
        .with_context(|| format!("bad {what}"))
}

fn parse_f64(tok: Option<&str>) -> Result<f64> {
    tok.context("missing value")?.parse().context("bad value")
}

/// Reads a square coordinate matrix. `general` input keeps only its upper
/// triangle, so it must already be symmetric.
pub fn sparse_from_str(text: &str) -> Result<SparseSymMatrix> {
    let (h, body) = split_body(text)?;
    ensure!(h.format == "coordinate", "expected coordinate format, found '{}'", h.format);
    let general = match h.symmetry.as_str() {
        "symmetric" => false,
        "general" => true,
        other => bail!("unsupported symmetry '{other}'"),
    };
    let mut it = body.into_iter();
    let size = it.next().context("missing size line")?;
    let mut t = size.split_whitespace();
    let (nr, nc, nnz) = (
        parse_usize(t.next(), "row count")?,
        parse_usize(t.next(), "column count")?,
        parse_usize(t.next(), "entry count")?,
    );
    ensure!(nr == nc, "matrix is {nr}x{nc}, not square");
    let mut triplets = Vec::with_capacity(nnz);
    for line in it.by_ref().take(nnz) {
        let mut t = line.split_whitespace();
        let i = parse_usize(t.next(), "row index")?;
        let j = parse_usize(t.next(), "column index")?;
        let v = parse_f64(t.next())?;
        ensure!((1..=nr).contains(&i) && (1..=nc).contains(&j), "index ({i}, {j}) out of range");
        if general && i > j {
            continue;
        }
        triplets.push((i - 1, j - 1, v));
    }
    ensure!(it.next().is_none(), "more entries than declared");
    ensure!(
        triplets.len() == nnz || general,
        "declared {nnz} entries, found {}",
        triplets.len()
    );
    Ok(SparseSymMatrix::from_upper_triplets(nr, &triplets))
}

pub fn dense_from_str(text: &str) -> Result<DenseMatrix> {
    let (h, body) = split_body(text)?;
    ensure!(h.format == "array", "expected array format, found '{}'", h.format);
    ensure!(h.symmetry == "general", "unsupported array symmetry '{}'", h.symmetry);
    let mut it = body.into_iter();
    let size = it.next().context("missing size line")?;
    let mut t = size.split_whitespace();
    let (nr, nc) = (parse_usize(t.next(), "row count")?, parse_usize(t.next(), "column count")?);
    let data = it.map(|l| parse_f64(Some(l.trim()))).collect::<Result<Vec<_>>>()?;
    ensure!(data.len() == nr * nc, "expected {} values, found {}", nr * nc, data.len());
    Ok(DenseMatrix::from_col_major(nr, nc, data))
}

pub fn read_sparse(path: &Path) -> Result<SparseSymMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    sparse_from_str(&text).with_context(|| format!("in {}", path.display()))
}

pub fn read_dense(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    dense_from_str(&text).with_context(|| format!("in {}", path.display()))
}
