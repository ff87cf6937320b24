//! Plain-text matrix files: a "m n" header followed by m rows of n integers.
//! Blank lines and lines starting with '#' are skipped.

use std::path::Path;

use num_bigint::BigInt;

use crate::error::Error;
use crate::matrix::TernaryMatrix;
use crate::unimodular::IntegerMatrix;

struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokens(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(k),
            (true, Some(s)) => {
                out.push(Token { text: &line[s..k], line: line_no, col: line[..s].chars().count() + 1 });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn at(t: &Token<'_>, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("line {}, column {}: {msg}", t.line, t.col))
}

fn integer(t: &Token<'_>) -> Result<BigInt, Error> {
    t.text.parse::<BigInt>().map_err(|_| at(t, format_args!("'{}' is not an integer", t.text)))
}

fn dimension(t: &Token<'_>) -> Result<usize, Error> {
    t.text.parse::<usize>().map_err(|_| at(t, format_args!("'{}' is not a dimension", t.text)))
}

pub fn parse_integer_matrix(text: &str) -> Result<IntegerMatrix, Error> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let Some((hline, header)) = lines.next() else {
        return Err(Error::Input("empty matrix file".into()));
    };
    let h = tokens(header, hline);
    if h.len() != 2 {
        return Err(Error::Input(format!("line {hline}: header must be \"m n\", found {} fields", h.len())));
    }
    let (m, n) = (dimension(&h[0])?, dimension(&h[1])?);
    let mut a = IntegerMatrix::zeros(m, n);
    let mut i = 0;
    for (line_no, line) in lines {
        let ts = tokens(line, line_no);
        if i == m {
            return Err(at(&ts[0], format_args!("more than the {m} declared rows")));
        }
        if ts.len() != n {
            let col = ts.get(n).map_or(line.chars().count() + 1, |t| t.col);
            return Err(Error::Input(format!(
                "line {line_no}, column {col}: row {} has {} of {n} entries",
                i + 1,
                ts.len()
            )));
        }
        for (j, t) in ts.iter().enumerate() {
            a.set(i, j, integer(t)?);
        }
        i += 1;
    }
    if i < m {
        return Err(Error::Input(format!("found {i} of {m} declared rows")));
    }
    Ok(a)
}

pub fn parse_matrix_file(path: &Path) -> Result<IntegerMatrix, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_integer_matrix(&text)
}

pub fn parse_ternary_matrix(text: &str) -> Result<TernaryMatrix, Error> {
    let a = parse_integer_matrix(text)?;
    ternary_of(&a)
}

/// The ternary matrix, or the first entry outside {0, ±1}.
pub fn ternary_of(a: &IntegerMatrix) -> Result<TernaryMatrix, Error> {
    a.to_ternary().ok_or_else(|| {
        let (row, col) = first_out_of_range(a).expect("some entry is out of range");
        Error::EntryOutOfRange { row, col, value: a.get(row, col).to_string() }
    })
}

pub fn first_out_of_range(a: &IntegerMatrix) -> Option<(usize, usize)> {
    let one = BigInt::from(1);
    (0..a.nrows())
        .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
        .find(|&(i, j)| a.get(i, j) > &one || a.get(i, j) < &-&one)
}

pub fn format_integer_matrix(a: &IntegerMatrix) -> String {
    let mut s = format!("{} {}\n", a.nrows(), a.ncols());
    for row in a.to_rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

pub fn format_matrix(a: &TernaryMatrix) -> String {
    format_integer_matrix(&IntegerMatrix::from(a))
}
