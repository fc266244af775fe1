//! The `subject_id,a,b,chosen` comparison file format.
//!
//! A header row is required. Item indices are 1-based integers and `chosen`
//! must repeat one of `a` or `b`. Fields are trimmed of surrounding spaces.

use std::io::{Read, Write};

use thiserror::Error;

use crate::types::{Comparison, ComparisonError, ItemId};

pub const HEADER: [&str; 4] = ["subject_id", "a", "b", "chosen"];

#[derive(Debug, Error)]
pub enum ComparisonsCsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("expected header `subject_id,a,b,chosen`, found `{0}`")]
    BadHeader(String),
    #[error("line {line}: expected 4 fields, found {found}")]
    FieldCount { line: u64, found: usize },
    #[error("line {line}: `{value}` is not a 1-based item index")]
    BadItem { line: u64, value: String },
    #[error("line {line}: {source}")]
    Invalid { line: u64, source: ComparisonError },
}

fn parse_item(value: &str, line: u64) -> Result<ItemId, ComparisonsCsvError> {
    match value.parse::<u32>() {
        Ok(v) if v >= 1 => Ok(ItemId(v)),
        _ => Err(ComparisonsCsvError::BadItem {
            line,
            value: value.to_owned(),
        }),
    }
}

pub fn read_comparisons<R: Read>(reader: R) -> Result<Vec<Comparison>, ComparisonsCsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(ComparisonsCsvError::BadHeader(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(ComparisonsCsvError::FieldCount {
                line,
                found: record.len(),
            });
        }
        let a = parse_item(&record[1], line)?;
        let b = parse_item(&record[2], line)?;
        let chosen = parse_item(&record[3], line)?;
        let c = Comparison::new(&record[0], a, b, chosen)
            .map_err(|source| ComparisonsCsvError::Invalid { line, source })?;
        out.push(c);
    }
    Ok(out)
}

/// Parses an in-memory comparison file.
pub fn parse_comparisons(data: &[u8]) -> Result<Vec<Comparison>, ComparisonsCsvError> {
    read_comparisons(data)
}

pub fn write_comparisons<W: Write>(writer: W, comparisons: &[Comparison]) -> Result<(), ComparisonsCsvError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(HEADER)?;
    for c in comparisons {
        wtr.write_record([
            c.subject_id().to_owned(),
            c.a().to_string(),
            c.b().to_string(),
            c.chosen().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
