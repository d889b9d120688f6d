//! Matrix Market and CSV readers and writers.
//!
//! Matrix Market: `array` and `coordinate` layouts, `real` or `integer`
//! fields, `general` or `symmetric` symmetry (symmetric files are expanded on
//! read). CSV: one row per line, comma separated. In the exact regime every
//! value may be a decimal or a `p/q` fraction and is stored exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Matrix};
use crate::scalar::{parse_rational, Rational, Regime, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    MatrixMarket,
    Csv,
}

impl Format {
    /// `.mtx`/`.mm` files are Matrix Market; everything else is CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") | Some("mm") => Format::MatrixMarket,
            _ => Format::Csv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::MatrixMarket => "mtx",
            Format::Csv => "csv",
        }
    }
}

pub fn parse_matrix(text: &[u8], format: Format, regime: Regime) -> Result<DenseMatrix> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Parse {
        line: 1 + text[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        column: 1,
        message: "input is not valid UTF-8".into(),
    })?;
    match regime {
        Regime::ExactRational => {
            parse_typed(text, format, parse_rational).map(DenseMatrix::Exact)
        }
        Regime::Float64 => parse_typed(text, format, parse_float).map(DenseMatrix::Float),
    }
}

fn parse_float(token: &str) -> Option<f64> {
    if token.contains('/') {
        return parse_rational(token).map(|q| Scalar::to_f64(&q));
    }
    token.parse::<f64>().ok()
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn value<T: Scalar>(tok: &Token<'_>, parse: &impl Fn(&str) -> Option<T>) -> Result<T> {
    let v = parse(tok.text).ok_or_else(|| {
        parse_error(tok.line, tok.column, format!("invalid number '{}'", tok.text))
    })?;
    if !v.is_finite_value() {
        return Err(Error::NonFinite {
            row: tok.line,
            col: tok.column,
        });
    }
    Ok(v)
}

fn parse_typed<T: Scalar>(
    text: &str,
    format: Format,
    parse: impl Fn(&str) -> Option<T>,
) -> Result<Matrix<T>> {
    match format {
        Format::Csv => parse_csv(text, &parse),
        Format::MatrixMarket => parse_mm(text, &parse),
    }
}

fn parse_csv<T: Scalar>(text: &str, parse: &impl Fn(&str) -> Option<T>) -> Result<Matrix<T>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut width = None;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        let mut col_start = 0;
        for field in line.split(',') {
            let lead = field.len() - field.trim_start().len();
            let tok = Token {
                text: field.trim(),
                line: line_no,
                column: col_start + lead + 1,
            };
            row.push(value(&tok, parse)?);
            col_start += field.len() + 1;
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_error(
                    line_no,
                    1,
                    format!("expected {w} fields, found {}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    let cols = width.ok_or_else(|| parse_error(1, 1, "empty input"))?;
    if cols != rows.len() {
        return Err(Error::NonSquare {
            rows: rows.len(),
            cols,
        });
    }
    Matrix::from_rows(rows)
}

fn tokens(line: &str, line_no: usize) -> impl Iterator<Item = Token<'_>> {
    let base = line.as_ptr() as usize;
    line.split_whitespace().map(move |t| Token {
        text: t,
        line: line_no,
        column: t.as_ptr() as usize - base + 1,
    })
}

fn parse_index(tok: &Token<'_>, what: &str) -> Result<usize> {
    tok.text
        .parse::<usize>()
        .map_err(|_| parse_error(tok.line, tok.column, format!("invalid {what} '{}'", tok.text)))
}

fn parse_mm<T: Scalar>(text: &str, parse: &impl Fn(&str) -> Option<T>) -> Result<Matrix<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_error(1, 1, "empty input"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_error(1, 1, "missing '%%MatrixMarket matrix' header"));
    }
    let coordinate = match fields[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(parse_error(1, 1, format!("unsupported layout '{other}'"))),
    };
    if !matches!(fields[3].as_str(), "real" | "integer") {
        return Err(parse_error(1, 1, format!("unsupported field '{}'", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_error(1, 1, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line_no, size_line) = body
        .next()
        .ok_or_else(|| parse_error(2, 1, "missing size line"))?;
    let size: Vec<Token<'_>> = tokens(size_line, size_line_no).collect();
    let expected = if coordinate { 3 } else { 2 };
    if size.len() != expected {
        return Err(parse_error(
            size_line_no,
            1,
            format!("size line needs {expected} integers"),
        ));
    }
    let rows = parse_index(&size[0], "row count")?;
    let cols = parse_index(&size[1], "column count")?;
    if rows != cols || rows == 0 {
        return Err(Error::NonSquare { rows, cols });
    }
    let n = rows;
    let mut entries = vec![T::zero(); n * n];

    if coordinate {
        let nnz = parse_index(&size[2], "entry count")?;
        let mut seen = 0;
        for (line_no, line) in body {
            let toks: Vec<Token<'_>> = tokens(line, line_no).collect();
            if toks.len() != 3 {
                return Err(parse_error(line_no, 1, "coordinate entry needs 'i j value'"));
            }
            let i = parse_index(&toks[0], "row index")?;
            let j = parse_index(&toks[1], "column index")?;
            if i == 0 || i > n || j == 0 || j > n {
                return Err(parse_error(line_no, toks[0].column, "entry index out of range"));
            }
            let v = value(&toks[2], parse)?;
            if symmetric && i != j {
                entries[(j - 1) * n + (i - 1)] = v.clone();
            }
            entries[(i - 1) * n + (j - 1)] = v;
            seen += 1;
        }
        if seen != nnz {
            return Err(parse_error(
                size_line_no,
                1,
                format!("header declares {nnz} entries, found {seen}"),
            ));
        }
    } else {
        // Column-major; symmetric arrays list the lower triangle only.
        let positions: Vec<(usize, usize)> = (0..n)
            .flat_map(|c| {
                let start = if symmetric { c } else { 0 };
                (start..n).map(move |r| (r, c))
            })
            .collect();
        let mut values = Vec::with_capacity(positions.len());
        let mut last_line = size_line_no;
        for (line_no, line) in body {
            last_line = line_no;
            for tok in tokens(line, line_no) {
                if values.len() == positions.len() {
                    return Err(parse_error(line_no, tok.column, "too many values"));
                }
                values.push(value(&tok, parse)?);
            }
        }
        if values.len() != positions.len() {
            return Err(parse_error(
                last_line,
                1,
                format!("expected {} values, found {}", positions.len(), values.len()),
            ));
        }
        for ((r, c), v) in positions.into_iter().zip(values) {
            if symmetric && r != c {
                entries[c * n + r] = v.clone();
            }
            entries[r * n + c] = v;
        }
    }
    Ok(Matrix::from_fn(n, |r, c| entries[r * n + c].clone()))
}

pub fn serialize_matrix(a: &DenseMatrix, format: Format) -> Vec<u8> {
    match a {
        DenseMatrix::Exact(m) => serialize_typed(m, format, Rational::to_string),
        DenseMatrix::Float(m) => serialize_typed(m, format, |v| format_float(*v)),
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let abs = v.abs();
    if abs != 0.0 && !(1e-5..1e16).contains(&abs) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn serialize_typed<T: Scalar>(m: &Matrix<T>, format: Format, fmt: impl Fn(&T) -> String) -> Vec<u8> {
    let n = m.order();
    let mut out = String::new();
    match format {
        Format::Csv => {
            let lines: Vec<String> = m
                .rows()
                .map(|row| row.iter().map(&fmt).collect::<Vec<_>>().join(","))
                .collect();
            out.push_str(&lines.join("\n"));
        }
        Format::MatrixMarket => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            let _ = writeln!(out, "{n} {n}");
            for c in 1..=n {
                for r in 1..=n {
                    out.push_str(&fmt(m.get(r, c)));
                    out.push('\n');
                }
            }
        }
    }
    out.into_bytes()
}
