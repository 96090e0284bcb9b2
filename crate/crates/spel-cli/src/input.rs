//! Strict reader for score CSV files.
//!
//! The format is deliberately rigid so that a malformed file fails loudly
//! with a line-numbered message instead of silently shifting columns: a
//! UTF-8 header `policy_1,...,policy_J` followed by one row of J finite
//! decimal numbers per observation. CRLF line endings are accepted.

use std::path::Path;

use spel::scores::ScoreMatrix;

use crate::Failure;

pub(crate) fn read_score_csv(path: &Path) -> Result<ScoreMatrix, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::input(format!("{}: not valid UTF-8", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Failure::input(format!("{}: line 1: missing header", path.display())))?;
    let num_policies = parse_header(path, header)?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.is_empty() {
            return Err(Failure::input(format!(
                "{}: line {lineno}: empty line",
                path.display()
            )));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != num_policies {
            return Err(Failure::input(format!(
                "{}: line {lineno}: expected {num_policies} fields, found {}",
                path.display(),
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(num_policies);
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Failure::input(format!(
                    "{}: line {lineno}: column {}: cannot parse {field:?} as a number",
                    path.display(),
                    col + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(Failure::input(format!(
                    "{}: line {lineno}: column {}: non-finite value {field:?}",
                    path.display(),
                    col + 1
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(Failure::input(format!(
            "{}: need at least 2 observations, found {}",
            path.display(),
            rows.len()
        )));
    }
    ScoreMatrix::from_rows(&rows).map_err(Failure::from)
}

/// Checks the header is exactly `policy_1,...,policy_J` and returns J.
fn parse_header(path: &Path, header: &str) -> Result<usize, Failure> {
    let fields: Vec<&str> = header.split(',').collect();
    for (i, field) in fields.iter().enumerate() {
        let expected = format!("policy_{}", i + 1);
        if *field != expected {
            return Err(Failure::input(format!(
                "{}: line 1: expected column {} to be {expected:?}, found {field:?}",
                path.display(),
                i + 1
            )));
        }
    }
    if fields.len() < 2 {
        return Err(Failure::input(format!(
            "{}: line 1: need at least 2 policy columns, found {}",
            path.display(),
            fields.len()
        )));
    }
    Ok(fields.len())
}
