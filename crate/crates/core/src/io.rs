//! Plain-text matrix, label and index-list files.
//!
//! Matrix files: a `<rows> <cols>` header line, then `rows` lines of `cols`
//! whitespace-separated decimals, optionally followed by `#` comment lines.
//! Values are printed with the shortest representation that parses back to
//! the identical `f64` (never more than 17 significant digits). A
//! `# kind=performance` comment marks a late-pickup-rate matrix.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{DissimilarityMatrix, MatrixKind, RectRelationalMatrix};

/// A parsed dense matrix file before it is given a meaning.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    /// Trailing `#` lines without the marker.
    pub comments: Vec<String>,
}

pub const PERFORMANCE_TAG: &str = "kind=performance";

impl DenseMatrix {
    /// Kind declared by the trailer; generic when absent.
    pub fn declared_kind(&self) -> MatrixKind {
        if self.comments.iter().any(|c| c.trim() == PERFORMANCE_TAG) {
            MatrixKind::Performance
        } else {
            MatrixKind::Generic
        }
    }

    pub fn into_rect(self, kind: MatrixKind) -> Result<RectRelationalMatrix> {
        RectRelationalMatrix::new(self.rows, self.cols, self.values, kind)
    }

    pub fn into_dissimilarity(self) -> Result<DissimilarityMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "dissimilarity matrix must be square, got {}x{}",
                self.rows, self.cols
            )));
        }
        DissimilarityMatrix::new(self.rows, self.values)
    }
}

/// Formats `v` so that `v.to_string().parse::<f64>() == v` bit for bit.
pub fn format_value(v: f64, out: &mut String) {
    let a = v.abs();
    if v == 0.0 {
        out.push('0');
    } else if (1e-5..1e16).contains(&a) {
        let _ = write!(out, "{v}");
    } else {
        let _ = write!(out, "{v:e}");
    }
}

pub fn write_dense(path: &Path, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    assert_eq!(values.len(), rows * cols);
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = String::new();
    writeln!(w, "{rows} {cols}").map_err(|e| Error::io(path, e))?;
    for r in 0..rows {
        line.clear();
        for (c, &v) in values[r * cols..(r + 1) * cols].iter().enumerate() {
            if c > 0 {
                line.push(' ');
            }
            format_value(v, &mut line);
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Dense text plus the performance marker when `m` is a performance matrix.
pub fn write_rect(path: &Path, m: &RectRelationalMatrix) -> Result<()> {
    write_dense(path, m.rows(), m.cols(), m.values())?;
    if m.kind() == MatrixKind::Performance {
        let mut f = fs::OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        writeln!(f, "# {PERFORMANCE_TAG}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn write_dissimilarity(path: &Path, d: &DissimilarityMatrix) -> Result<()> {
    write_dense(path, d.n(), d.n(), d.values())
}

pub fn read_dense(path: &Path) -> Result<DenseMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dense(BufReader::new(file), path)
}

pub fn read_rect(path: &Path, kind: MatrixKind) -> Result<RectRelationalMatrix> {
    read_dense(path)?.into_rect(kind)
}

/// Reads a rectangular matrix with the kind its trailer declares.
pub fn read_rect_tagged(path: &Path) -> Result<RectRelationalMatrix> {
    let dense = read_dense(path)?;
    let kind = dense.declared_kind();
    dense.into_rect(kind)
}

pub fn read_dissimilarity(path: &Path) -> Result<DissimilarityMatrix> {
    read_dense(path)?.into_dissimilarity()
}

fn parse_dense(reader: impl BufRead, path: &Path) -> Result<DenseMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    let (rows, cols) = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(err(1, "missing header".into()));
        };
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| s.parse::<usize>().ok();
        match fields.as_slice() {
            [r, c] => match (parse(r), parse(c)) {
                (Some(r), Some(c)) => break (r, c),
                _ => return Err(err(idx + 1, format!("malformed header {line:?}"))),
            },
            _ => return Err(err(idx + 1, format!("malformed header {line:?}"))),
        }
    };
    let mut values = Vec::with_capacity(rows * cols);
    let mut seen = 0usize;
    let mut in_trailer = false;
    let mut comments = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if let Some(c) = trimmed.strip_prefix('#') {
            in_trailer = true;
            comments.push(c.trim().to_owned());
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        if in_trailer || seen == rows {
            return Err(err(idx + 1, format!("unexpected data after {rows} rows")));
        }
        let before = values.len();
        for tok in trimmed.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(idx + 1, format!("non-numeric token {tok:?}")))?;
            values.push(v);
        }
        let got = values.len() - before;
        if got != cols {
            return Err(err(idx + 1, format!("expected {cols} values, found {got}")));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(err(0, format!("expected {rows} rows, found {seen}")));
    }
    Ok(DenseMatrix {
        rows,
        cols,
        values,
        comments,
    })
}

/// One non-negative integer per line.
pub fn write_indices(path: &Path, indices: &[usize]) -> Result<()> {
    let mut s = String::with_capacity(indices.len() * 6);
    for i in indices {
        let _ = writeln!(s, "{i}");
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_indices(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected an integer, found {l:?}"),
            })
        })
        .collect()
}

/// One string per line (key maps for performance matrices).
pub fn write_lines(path: &Path, items: &[String]) -> Result<()> {
    let mut s = String::new();
    for item in items {
        s.push_str(item);
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::to_owned).collect())
}
