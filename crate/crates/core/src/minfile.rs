//! The `MIN1` minutiae text format.
//!
//! ```text
//! MIN1
//! # comment
//! CORE <x> <y>
//! <x> <y> <theta> <E|B>
//! ```
//!
//! Numbers are written with 9 significant digits.

use thiserror::Error;

use crate::geometry::{CorePoint, GeometryError, Minutia, MinutiaKind, MinutiaeSet};
use crate::numfmt::sig;

pub const MAGIC: &str = "MIN1";
pub const DIGITS: usize = 9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinFileError {
    #[error("missing or unknown header (expected MIN1)")]
    MalformedHeader,
    #[error("malformed line {0}")]
    MalformedLine(usize),
    #[error("line {0} repeats the position of an earlier minutia")]
    DuplicatePoint(usize),
    #[error("no minutiae in file")]
    EmptySet,
}

fn parse_f64(tok: &str, line_no: usize) -> Result<f64, MinFileError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or(MinFileError::MalformedLine(line_no))
}

/// Parses a `MIN1` document. Line numbers in errors are 1-based.
pub fn parse_minutiae(input: &[u8], source_id: &str) -> Result<MinutiaeSet, MinFileError> {
    let text = std::str::from_utf8(input).map_err(|_| MinFileError::MalformedHeader)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(MinFileError::MalformedHeader),
    }

    let mut core = None;
    let mut minutiae = Vec::new();
    // line number of each minutia, for duplicate reporting
    let mut origin = Vec::new();
    for (line_no, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] == "CORE" {
            if toks.len() != 3 || core.is_some() || !minutiae.is_empty() {
                return Err(MinFileError::MalformedLine(line_no));
            }
            core = Some(CorePoint::new(
                parse_f64(toks[1], line_no)?,
                parse_f64(toks[2], line_no)?,
            ));
            continue;
        }
        if toks.len() != 4 {
            return Err(MinFileError::MalformedLine(line_no));
        }
        let x = parse_f64(toks[0], line_no)?;
        let y = parse_f64(toks[1], line_no)?;
        let theta = parse_f64(toks[2], line_no)?;
        let kind = MinutiaKind::from_code(toks[3]).ok_or(MinFileError::MalformedLine(line_no))?;
        minutiae.push(Minutia::new(x, y, theta, kind));
        origin.push(line_no);
    }

    if minutiae.is_empty() {
        return Err(MinFileError::EmptySet);
    }
    MinutiaeSet::new(minutiae, core, source_id).map_err(|e| match e {
        GeometryError::DuplicatePoint(i) => MinFileError::DuplicatePoint(origin[i]),
        GeometryError::NonFinite(i) => MinFileError::MalformedLine(origin[i]),
        GeometryError::NonFiniteCore => MinFileError::MalformedLine(1),
    })
}

/// Writes `set` as a `MIN1` document: the header, an optional `CORE` line and
/// one line per minutia, in order.
pub fn serialize_minutiae(set: &MinutiaeSet) -> Vec<u8> {
    let mut out = String::with_capacity(16 + set.len() * 32);
    out.push_str(MAGIC);
    out.push('\n');
    if let Some(c) = set.core() {
        out.push_str(&format!("CORE {} {}\n", sig(c.x, DIGITS), sig(c.y, DIGITS)));
    }
    for m in set.minutiae() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            sig(m.x, DIGITS),
            sig(m.y, DIGITS),
            sig(m.theta, DIGITS),
            m.kind.code()
        ));
    }
    out.into_bytes()
}
