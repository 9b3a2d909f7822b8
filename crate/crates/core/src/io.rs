//! `htp-solution v1` text format.
//!
//! ```text
//! htp-solution v1
//! shape diamond 2
//! magic 62
//! values 15 3 ...
//! ```
//!
//! UTF-8, every line terminated by a single LF, no trailing whitespace.
//! Values are listed in canonical vertex order.

use std::fmt;

use thiserror::Error;

use crate::hexgrid::{expected_vertex_count, Assignment, ShapeError, ShapeFamily};

pub const HEADER: &str = "htp-solution v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionFile {
    pub family: ShapeFamily,
    pub order: u32,
    pub magic: u64,
    pub values: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("file must end with a newline")]
    MissingFinalNewline,
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("{found} values given, shape {family} {order} has {expected} vertices")]
    WrongLength { family: ShapeFamily, order: u32, expected: usize, found: usize },
}

fn malformed(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Malformed { line, message: message.into() }
}

fn keyword<'a>(line_no: usize, line: &'a str, key: &str) -> Result<&'a str, ParseError> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| malformed(line_no, format!("expected `{key} ...`")))
}

fn number<T: std::str::FromStr>(line_no: usize, token: &str) -> Result<T, ParseError> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(line_no, format!("`{token}` is not a decimal integer")));
    }
    token
        .parse()
        .map_err(|_| malformed(line_no, format!("`{token}` is out of range")))
}

impl SolutionFile {
    pub fn from_assignment(assignment: &Assignment, magic: u64) -> Self {
        SolutionFile {
            family: assignment.family,
            order: assignment.order,
            magic,
            values: assignment.values.clone(),
        }
    }

    pub fn assignment(&self) -> Assignment {
        Assignment { family: self.family, order: self.order, values: self.values.clone() }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let body = text.strip_suffix('\n').ok_or(ParseError::MissingFinalNewline)?;
        let lines: Vec<&str> = body.split('\n').collect();
        for (i, line) in lines.iter().enumerate() {
            if line.contains('\r') {
                return Err(malformed(i + 1, "carriage return in line"));
            }
            if line.ends_with(char::is_whitespace) || line.starts_with(char::is_whitespace) {
                return Err(malformed(i + 1, "leading or trailing whitespace"));
            }
            if line.contains("  ") || line.contains('\t') {
                return Err(malformed(i + 1, "fields must be separated by single spaces"));
            }
        }
        if lines.len() != 4 {
            return Err(malformed(lines.len().min(4), format!("expected 4 lines, found {}", lines.len())));
        }
        if lines[0] != HEADER {
            return Err(malformed(1, format!("expected header `{HEADER}`")));
        }

        let shape = keyword(2, lines[1], "shape")?;
        let (family, order) = shape
            .split_once(' ')
            .ok_or_else(|| malformed(2, "expected `shape <family> <order>`"))?;
        let family: ShapeFamily = family.parse()?;
        let order: u32 = number(2, order)?;

        let magic: u64 = number(3, keyword(3, lines[2], "magic")?)?;
        let values: Vec<u32> = keyword(4, lines[3], "values")?
            .split(' ')
            .map(|t| number(4, t))
            .collect::<Result<_, _>>()?;

        let expected = expected_vertex_count(family, order)?;
        if values.len() != expected {
            return Err(ParseError::WrongLength { family, order, expected, found: values.len() });
        }
        Ok(SolutionFile { family, order, magic, values })
    }
}

impl fmt::Display for SolutionFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{HEADER}")?;
        writeln!(f, "shape {} {}", self.family, self.order)?;
        writeln!(f, "magic {}", self.magic)?;
        f.write_str("values")?;
        for v in &self.values {
            write!(f, " {v}")?;
        }
        writeln!(f)
    }
}
