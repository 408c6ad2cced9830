//! Matrix files.
//!
//! Dense: a line `n`, then `n` rows of `n` tokens. Sparse: a line `n m`, then
//! `m` lines `i j w` with 1-based indices. Tokens are integers, `p/q`, or
//! `.` / `-inf` for ε. Blank lines and `#` comments are ignored.

use std::collections::BTreeSet;

use maxplus_csr::rational::ParseRationalError;
use maxplus_csr::{Matrix, Rational, Tropical};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("empty input: expected a header line")]
    Empty,
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error("invalid matrix: {0}")]
    Matrix(String),
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((k + 1, tokens))
    })
}

fn parse_count(line: usize, tok: &str, what: &str) -> Result<usize, FormatError> {
    tok.parse()
        .map_err(|_| err(line, format!("{what} must be a non-negative integer, got `{tok}`")))
}

pub fn parse_matrix(text: &str) -> Result<Matrix, FormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(FormatError::Empty)?;
    match header.as_slice() {
        [n] => {
            let n = parse_count(hline, n, "dimension")?;
            parse_dense(n, lines)
        }
        [n, m] => {
            let n = parse_count(hline, n, "dimension")?;
            let m = parse_count(hline, m, "entry count")?;
            parse_sparse(n, m, lines)
        }
        _ => Err(err(hline, "header must be `n` (dense) or `n m` (sparse)")),
    }
}

fn parse_dense<'a>(
    n: usize,
    mut lines: impl Iterator<Item = (usize, Vec<&'a str>)>,
) -> Result<Matrix, FormatError> {
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (line, tokens) = lines
            .next()
            .ok_or_else(|| FormatError::Truncated(format!("expected {n} rows, found {i}")))?;
        if tokens.len() != n {
            return Err(err(line, format!("expected {n} entries, found {}", tokens.len())));
        }
        let row = tokens
            .iter()
            .map(|t| t.parse::<Tropical>().map_err(|e| err(line, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, format!("unexpected content after {n} rows")));
    }
    Matrix::from_dense(rows).map_err(|e| FormatError::Matrix(e.to_string()))
}

fn parse_sparse<'a>(
    n: usize,
    m: usize,
    mut lines: impl Iterator<Item = (usize, Vec<&'a str>)>,
) -> Result<Matrix, FormatError> {
    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(m);
    for k in 0..m {
        let (line, tokens) = lines
            .next()
            .ok_or_else(|| FormatError::Truncated(format!("expected {m} entries, found {k}")))?;
        let [i, j, w] = tokens.as_slice() else {
            return Err(err(line, "sparse entries are `i j w`"));
        };
        let index = |tok: &str| -> Result<usize, FormatError> {
            let v = parse_count(line, tok, "index")?;
            if v == 0 || v > n {
                return Err(err(line, format!("index {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let (i, j) = (index(i)?, index(j)?);
        let w: Rational = w.parse().map_err(|e: ParseRationalError| err(line, e.to_string()))?;
        if !seen.insert((i, j)) {
            return Err(err(line, format!("duplicate entry ({}, {})", i + 1, j + 1)));
        }
        entries.push((i, j, w));
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, format!("unexpected content after {m} entries")));
    }
    Matrix::from_entries(n, n, entries).map_err(|e| FormatError::Matrix(e.to_string()))
}

/// Canonical dense text: single spaces, `.` for ε, trailing newline.
pub fn to_dense(a: &Matrix) -> String {
    let mut out = format!("{}\n", a.rows());
    for row in a.to_dense() {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Canonical sparse text: entries in row-major order.
pub fn to_sparse(a: &Matrix) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.finite_count());
    for (i, j, w) in a.entries() {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, w));
    }
    out
}
