//! Text matrix formats.
//!
//! Coordinate format: a header `order count real|complex`, then `count`
//! lines `i j value` (or `i j re im`), 0-indexed. Unlisted entries are zero.
//!
//! Tridiagonal format: a header `TRIDIAG N`, then three lines holding
//! `a_1..a_N`, `b_0..b_{N-1}` and `c_0..c_N`.
//!
//! Lines starting with `#` and blank lines are ignored by the reader. Values
//! are written in shortest round-trip form so reading back is bit-exact.

use std::fmt::{self, Write as _};
use std::path::Path;

use maxeig_core::{Complex64, DenseMatrix, Model, Scalar, TridiagonalSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// 1-based line number, 0 when the error is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Coordinate,
    Tridiagonal,
}

/// Tridiagonal models default to the compact layout.
pub fn default_layout(model: &Model) -> Layout {
    match model {
        Model::Tridiagonal(_) => Layout::Tridiagonal,
        _ => Layout::Coordinate,
    }
}

pub fn write_model(model: &Model, layout: Layout) -> Result<String, ParseError> {
    match (layout, model) {
        (Layout::Tridiagonal, Model::Tridiagonal(t)) => Ok(write_tridiagonal(t)),
        (Layout::Tridiagonal, Model::Real(m)) => match TridiagonalSystem::from_dense(m) {
            Ok(t) if m.is_tridiagonal() && t.to_dense() == *m => Ok(write_tridiagonal(&t)),
            _ => err(0, "matrix is not a tridiagonal Q-matrix with positive off-diagonals"),
        },
        (Layout::Tridiagonal, Model::Complex(_)) => err(0, "complex matrices need the coordinate layout"),
        (Layout::Coordinate, Model::Tridiagonal(t)) => Ok(write_real(&t.to_dense())),
        (Layout::Coordinate, Model::Real(m)) => Ok(write_real(m)),
        (Layout::Coordinate, Model::Complex(m)) => Ok(write_complex(m)),
    }
}

fn entries<T: Scalar>(m: &DenseMatrix<T>, zero: T) -> Vec<(usize, usize, T)> {
    let n = m.order();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if i == j || v != zero {
                out.push((i, j, v));
            }
        }
    }
    out
}

pub fn write_real(m: &DenseMatrix<f64>) -> String {
    let e = entries(m, 0.0);
    let mut s = format!("{} {} real\n", m.order(), e.len());
    for (i, j, v) in e {
        let _ = writeln!(s, "{i} {j} {v:?}");
    }
    s
}

pub fn write_complex(m: &DenseMatrix<Complex64>) -> String {
    let e = entries(m, Complex64::new(0.0, 0.0));
    let mut s = format!("{} {} complex\n", m.order(), e.len());
    for (i, j, v) in e {
        let _ = writeln!(s, "{i} {j} {:?} {:?}", v.re, v.im);
    }
    s
}

pub fn write_tridiagonal(t: &TridiagonalSystem) -> String {
    let line = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    format!(
        "TRIDIAG {}\n{}\n{}\n{}\n",
        t.n(),
        line(t.a_seq()),
        line(t.b_seq()),
        line(t.c_seq())
    )
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn number<T: std::str::FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T, ParseError> {
    match token {
        None => err(line, format!("missing {what}")),
        Some(t) => t.parse().or_else(|_| err(line, format!("invalid {what} `{t}`"))),
    }
}

/// Reads either layout, detected from the header.
pub fn read_model(text: &str) -> Result<Model, ParseError> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return err(0, "empty input");
    };
    let mut tok = header.split_whitespace();
    if tok.clone().next() == Some("TRIDIAG") {
        tok.next();
        let n: usize = number(hl, tok.next(), "N")?;
        if tok.next().is_some() {
            return err(hl, "trailing tokens after TRIDIAG N");
        }
        let mut seq = |len: usize, what: &str| -> Result<Vec<f64>, ParseError> {
            let Some((l, body)) = lines.next() else {
                return err(0, format!("missing {what} line"));
            };
            let v: Vec<f64> = body
                .split_whitespace()
                .map(|t| number(l, Some(t), what))
                .collect::<Result<_, _>>()?;
            if v.len() != len {
                return err(l, format!("expected {len} {what} values, found {}", v.len()));
            }
            Ok(v)
        };
        let a = seq(n, "a")?;
        let b = seq(n, "b")?;
        let c = seq(n + 1, "c")?;
        if let Some((l, _)) = lines.next() {
            return err(l, "unexpected content after the c line");
        }
        return TridiagonalSystem::new(a, b, c)
            .map(Model::Tridiagonal)
            .or_else(|e| err(0, e.to_string()));
    }

    let order: usize = number(hl, tok.next(), "order")?;
    let count: usize = number(hl, tok.next(), "entry count")?;
    let complex = match tok.next() {
        Some("real") => false,
        Some("complex") => true,
        Some(t) => return err(hl, format!("field must be real or complex, found `{t}`")),
        None => return err(hl, "missing field (real|complex)"),
    };
    if order == 0 {
        return err(hl, "order must be positive");
    }
    let mut data = vec![Complex64::new(0.0, 0.0); order * order];
    let mut seen = vec![false; order * order];
    let mut read = 0;
    for (l, body) in lines {
        if read == count {
            return err(l, format!("more than {count} entries"));
        }
        let mut t = body.split_whitespace();
        let i: usize = number(l, t.next(), "row index")?;
        let j: usize = number(l, t.next(), "column index")?;
        if i >= order || j >= order {
            return err(l, format!("index ({i}, {j}) outside order {order}"));
        }
        let re: f64 = number(l, t.next(), "value")?;
        let im: f64 = if complex { number(l, t.next(), "imaginary part")? } else { 0.0 };
        if t.next().is_some() {
            return err(l, "trailing tokens");
        }
        if !(re.is_finite() && im.is_finite()) {
            return err(l, "non-finite value");
        }
        if std::mem::replace(&mut seen[i * order + j], true) {
            return err(l, format!("duplicate entry ({i}, {j})"));
        }
        data[i * order + j] = Complex64::new(re, im);
        read += 1;
    }
    if read != count {
        return err(0, format!("header announces {count} entries, found {read}"));
    }
    let built = if complex {
        DenseMatrix::new(order, data).map(Model::Complex)
    } else {
        DenseMatrix::new(order, data.into_iter().map(|c| c.re).collect()).map(Model::Real)
    };
    built.or_else(|e| err(0, e.to_string()))
}

#[derive(Debug)]
pub enum ReadError {
    Io(std::io::Error),
    Parse(ParseError),
}

impl fmt::Display for ReadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReadError::Io(e) => write!(f, "{e}"),
            ReadError::Parse(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ReadError {}

pub fn read_file(path: &Path) -> Result<Model, ReadError> {
    let text = std::fs::read_to_string(path).map_err(ReadError::Io)?;
    read_model(&text).map_err(ReadError::Parse)
}
