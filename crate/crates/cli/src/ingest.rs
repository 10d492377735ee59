//! CSV ingestion with strict timestamp checks.
//!
//! Rows are numbered from 1 at the first data row (the header is row 0).
//! Gaps are reported, never filled.

use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime};
use thiserror::Error;
use vbpbb::TimeSeries;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("row {row}: unparseable value {value:?}")]
    UnparseableValue { row: usize, value: String },
    #[error("row {row}: unparseable timestamp {value:?}")]
    UnparseableTimestamp { row: usize, value: String },
    #[error("row {row}: timestamp does not advance")]
    NonMonotoneTimestamps { row: usize },
    #[error("sampling gaps at rows {}", fmt_rows(.rows))]
    GapDetected { rows: Vec<usize> },
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Series(#[from] vbpbb::Error),
}

fn fmt_rows(rows: &[usize]) -> String {
    const SHOWN: usize = 20;
    let mut s: Vec<String> = rows.iter().take(SHOWN).map(|r| r.to_string()).collect();
    if rows.len() > SHOWN {
        s.push(format!("... ({} total)", rows.len()));
    }
    s.join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub timestamp_column: String,
    pub value_column: String,
    pub step_hours: f64,
    /// `1.234,56` style numbers: `.` groups thousands, `,` is the decimal mark.
    pub decimal_comma: bool,
    pub delimiter: u8,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            timestamp_column: "timestamp".into(),
            value_column: "value".into(),
            step_hours: 1.0,
            decimal_comma: false,
            delimiter: b',',
        }
    }
}

/// Parses a number after stripping thousands separators and spaces.
pub fn parse_number(raw: &str, decimal_comma: bool) -> Option<f64> {
    let cleaned: String = raw
        .trim()
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '_' && *c != '\'')
        .filter(|&c| if decimal_comma { c != '.' } else { c != ',' })
        .map(|c| if decimal_comma && c == ',' { '.' } else { c })
        .collect();
    let v: f64 = cleaned.parse().ok()?;
    v.is_finite().then_some(v)
}

const FORMATS: [&str; 6] = [
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%d %H:%M",
    "%d.%m.%Y %H:%M",
    "%d/%m/%Y %H:%M",
];

/// ISO-8601 timestamp, with or without seconds or a UTC offset. Offsets
/// are converted to UTC.
pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.naive_utc());
    }
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h.trim().trim_start_matches('\u{feff}') == name)
        .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<TimeSeries, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ingest_reader(file, path, opts)
}

pub fn ingest_reader<R: std::io::Read>(
    reader: R,
    path: &Path,
    opts: &IngestOptions,
) -> Result<TimeSeries, IngestError> {
    let csv_err = |source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let ts_col = column(&headers, &opts.timestamp_column)?;
    let val_col = column(&headers, &opts.value_column)?;

    let step_ms = (opts.step_hours * 3_600_000.0).round() as i64;
    let mut values = Vec::new();
    let mut start: Option<NaiveDateTime> = None;
    let mut prev: Option<NaiveDateTime> = None;
    let mut gaps = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_err)?;
        let ts_raw = record.get(ts_col).unwrap_or("");
        let ts = parse_timestamp(ts_raw).ok_or_else(|| IngestError::UnparseableTimestamp {
            row,
            value: ts_raw.to_string(),
        })?;
        let v_raw = record.get(val_col).unwrap_or("");
        let v = parse_number(v_raw, opts.decimal_comma).ok_or_else(|| {
            IngestError::UnparseableValue {
                row,
                value: v_raw.to_string(),
            }
        })?;
        if let Some(p) = prev {
            let delta = (ts - p).num_milliseconds();
            if delta <= 0 {
                return Err(IngestError::NonMonotoneTimestamps { row });
            }
            if delta != step_ms {
                gaps.push(row);
            }
        } else {
            start = Some(ts);
        }
        prev = Some(ts);
        values.push(v);
    }
    if !gaps.is_empty() {
        return Err(IngestError::GapDetected { rows: gaps });
    }
    let start = start.ok_or(IngestError::Empty)?;
    let name = path
        .file_stem()
        .map_or_else(|| "input".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(TimeSeries::new(values, start, opts.step_hours, name)?)
}
