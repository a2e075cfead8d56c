//! Flat text serialization of problem data for regression fixtures.
//!
//! ```text
//! bimatrix 10 20
//! <10 lines of 20 space-separated entries>
//! solution 30
//! <30 space-separated entries>
//! value 0.0123
//! ```
//!
//! The header names the kind and the matrix shape; matrix rows follow in
//! row-major order. `offset <n>`, `solution <n>` and `value <v>` sections are
//! optional. Numbers use the shortest decimal that round-trips exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub kind: String,
    pub matrix: Matrix,
    pub offset: Option<Vector>,
    pub solution: Option<Vector>,
    pub value: Option<f64>,
}

fn join(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl Fixture {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let (rows, cols) = self.matrix.shape();
        writeln!(out, "{} {} {}", self.kind, rows, cols).unwrap();
        for r in 0..rows {
            writeln!(out, "{}", join(self.matrix.row(r).iter().copied())).unwrap();
        }
        if let Some(b) = &self.offset {
            writeln!(out, "offset {}", b.len()).unwrap();
            writeln!(out, "{}", join(b.iter().copied())).unwrap();
        }
        if let Some(s) = &self.solution {
            writeln!(out, "solution {}", s.len()).unwrap();
            writeln!(out, "{}", join(s.iter().copied())).unwrap();
        }
        if let Some(v) = self.value {
            writeln!(out, "value {v}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| Error::invalid("fixture: empty input"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [kind, rows, cols] = parts.as_slice() else {
            return Err(Error::invalid(format!(
                "fixture line {line_no}: expected `<kind> <rows> <cols>`"
            )));
        };
        let rows = parse_count(rows, line_no)?;
        let cols = parse_count(cols, line_no)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (no, line) = lines
                .next()
                .ok_or_else(|| Error::invalid("fixture: truncated matrix"))?;
            let row = parse_numbers(line, no)?;
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "fixture line {no}: expected {cols} entries, found {}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        let mut fixture = Fixture {
            kind: kind.to_string(),
            matrix: Matrix::from_row_slice(rows, cols, &data),
            offset: None,
            solution: None,
            value: None,
        };
        while let Some((no, line)) = lines.next() {
            let (key, arg) = line
                .split_once(' ')
                .ok_or_else(|| Error::invalid(format!("fixture line {no}: malformed section")))?;
            match key {
                "offset" | "solution" => {
                    let len = parse_count(arg, no)?;
                    let (vno, vline) = lines
                        .next()
                        .ok_or_else(|| Error::invalid(format!("fixture: missing {key} entries")))?;
                    let v = parse_numbers(vline, vno)?;
                    if v.len() != len {
                        return Err(Error::invalid(format!(
                            "fixture line {vno}: expected {len} entries, found {}",
                            v.len()
                        )));
                    }
                    let v = Vector::from_vec(v);
                    if key == "offset" {
                        fixture.offset = Some(v);
                    } else {
                        fixture.solution = Some(v);
                    }
                }
                "value" => fixture.value = Some(parse_numbers(arg, no)?[0]),
                other => {
                    return Err(Error::invalid(format!(
                        "fixture line {no}: unknown section `{other}`"
                    )))
                }
            }
        }
        Ok(fixture)
    }
}

fn parse_count(s: &str, line: usize) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("fixture line {line}: bad count `{s}`")))
}

fn parse_numbers(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::invalid(format!("fixture line {line}: bad number `{t}`")))
        })
        .collect()
}
