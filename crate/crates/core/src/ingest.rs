//! Tab-separated corpus ingestion.
//!
//! Rows that cannot be trusted are never repaired: they are logged with a
//! machine-readable reason and skipped.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str;

use chrono::{DateTime, DurationRound, TimeDelta, Timelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoBounds;

/// Column order of the corpus header line.
pub const COLUMNS: [&str; 7] = [
    "id",
    "username",
    "follower_count",
    "timestamp",
    "latitude",
    "longitude",
    "text",
];

const ID: usize = 0;
const USERNAME: usize = 1;
const FOLLOWERS: usize = 2;
const TIMESTAMP: usize = 3;
const LATITUDE: usize = 4;
const LONGITUDE: usize = 5;
const TEXT: usize = 6;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format: empty input")]
    EmptyInput,
    #[error("format: header mismatch, expected {expected:?}, found {found:?}")]
    HeaderMismatch { expected: String, found: String },
}

/// Why a line did not become a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    ColumnCount,
    BadTimestamp,
    BadCoordinate,
    BadInteger,
    EmptyRequiredField,
    InvalidUtf8,
    DuplicateId,
    OutOfBounds,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::ColumnCount => "column-count",
            RejectReason::BadTimestamp => "bad-timestamp",
            RejectReason::BadCoordinate => "bad-coordinate",
            RejectReason::BadInteger => "bad-integer",
            RejectReason::EmptyRequiredField => "empty-required-field",
            RejectReason::InvalidUtf8 => "invalid-utf8",
            RejectReason::DuplicateId => "duplicate-id",
            RejectReason::OutOfBounds => "out-of-bounds",
        }
    }

    /// Malformed rows, as opposed to well-formed rows outside the bounds.
    pub fn is_malformed(self) -> bool {
        self != RejectReason::OutOfBounds
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One input line split on tabs. Cells stay as raw bytes so that encoding
/// problems surface as a per-row rejection instead of a fatal error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRow {
    pub line_number: usize,
    pub cells: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line_number: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub username: String,
    pub follower_count: u64,
    #[serde(with = "timestamp")]
    pub timestamp: DateTime<Utc>,
    pub latitude: f64,
    pub longitude: f64,
    pub text: String,
    pub tags: BTreeSet<String>,
}

impl TweetRecord {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<TweetRecord>,
    pub bounds: GeoBounds,
    /// Malformed rows (column count or validation failures).
    pub skipped: usize,
    /// Well-formed rows dropped by the bounds filter.
    pub out_of_bounds: usize,
    /// Every dropped line in input order, malformed and out-of-bounds alike.
    pub reject_log: Vec<Rejection>,
}

impl Dataset {
    /// Builds a dataset from already-validated records, sorting them.
    pub fn from_records(mut records: Vec<TweetRecord>, bounds: GeoBounds) -> Self {
        sort_chronologically(&mut records);
        Dataset {
            records,
            bounds,
            skipped: 0,
            out_of_bounds: 0,
            reject_log: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TweetRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Total lines seen after the header.
    pub fn lines_read(&self) -> usize {
        self.records.len() + self.skipped + self.out_of_bounds
    }
}

/// Sorts by timestamp, ties broken by id.
pub fn sort_chronologically(records: &mut [TweetRecord]) {
    records.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
}

/// Splits `input` into header-checked rows.
///
/// Lines whose cell count differs from the header are returned as
/// `column-count` rejections. A single trailing newline does not count as an
/// extra line.
pub fn parse_tsv(input: &[u8], header: &[&str]) -> Result<(Vec<RawRow>, Vec<Rejection>), IngestError> {
    if input.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let body = input.strip_suffix(b"\n").unwrap_or(input);
    let mut lines = body.split(|&b| b == b'\n');

    let expected = header.join("\t");
    let first = lines.next().unwrap_or_default();
    if first != expected.as_bytes() {
        return Err(IngestError::HeaderMismatch {
            expected,
            found: String::from_utf8_lossy(first).into_owned(),
        });
    }

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_number = i + 2;
        let cells: Vec<Vec<u8>> = line.split(|&b| b == b'\t').map(<[u8]>::to_vec).collect();
        if cells.len() == header.len() {
            rows.push(RawRow { line_number, cells });
        } else {
            errors.push(Rejection {
                line_number,
                reason: RejectReason::ColumnCount,
            });
        }
    }
    Ok((rows, errors))
}

/// Parses one row laid out as [`COLUMNS`].
pub fn validate_record(row: &RawRow) -> Result<TweetRecord, RejectReason> {
    if row.cells.len() != COLUMNS.len() {
        return Err(RejectReason::ColumnCount);
    }
    let mut cells = [""; COLUMNS.len()];
    for (slot, raw) in cells.iter_mut().zip(&row.cells) {
        *slot = str::from_utf8(raw).map_err(|_| RejectReason::InvalidUtf8)?;
    }
    if cells.iter().any(|c| c.trim().is_empty()) {
        return Err(RejectReason::EmptyRequiredField);
    }

    let follower_count = cells[FOLLOWERS]
        .parse::<u64>()
        .map_err(|_| RejectReason::BadInteger)?;
    let timestamp = parse_timestamp(cells[TIMESTAMP]).ok_or(RejectReason::BadTimestamp)?;
    let latitude = parse_degrees(cells[LATITUDE], 90.0)?;
    let longitude = parse_degrees(cells[LONGITUDE], 180.0)?;

    Ok(TweetRecord {
        id: cells[ID].to_owned(),
        username: cells[USERNAME].to_owned(),
        follower_count,
        timestamp,
        latitude,
        longitude,
        text: cells[TEXT].to_owned(),
        tags: BTreeSet::new(),
    })
}

fn parse_degrees(cell: &str, limit: f64) -> Result<f64, RejectReason> {
    let value: f64 = cell.parse().map_err(|_| RejectReason::BadCoordinate)?;
    if value.is_finite() && (-limit..=limit).contains(&value) {
        Ok(value)
    } else {
        Err(RejectReason::BadCoordinate)
    }
}

/// Parses an RFC 3339 instant, normalized to UTC at millisecond precision.
pub fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    // RFC 3339 also admits a space separator; ISO 8601 does not.
    if text.as_bytes().get(10) != Some(&b'T') {
        return None;
    }
    let parsed = DateTime::parse_from_rfc3339(text).ok()?.with_timezone(&Utc);
    // chrono encodes a `:60` leap second as an overflowing nanosecond field
    if parsed.nanosecond() >= 1_000_000_000 {
        return None;
    }
    parsed.duration_trunc(TimeDelta::milliseconds(1)).ok()
}

/// Runs parsing, validation, de-duplication and the bounds filter over an
/// in-memory corpus.
pub fn load_dataset_from_bytes(input: &[u8], bounds: GeoBounds) -> Result<Dataset, IngestError> {
    let (rows, column_errors) = parse_tsv(input, &COLUMNS)?;

    let mut reject_log = column_errors;
    let mut records = Vec::with_capacity(rows.len());
    let mut seen = HashSet::with_capacity(rows.len());
    let mut skipped = reject_log.len();
    let mut out_of_bounds = 0;

    for row in &rows {
        let outcome = validate_record(row).and_then(|record| {
            if !seen.insert(record.id.clone()) {
                Err(RejectReason::DuplicateId)
            } else if !bounds.contains(record.latitude, record.longitude) {
                Err(RejectReason::OutOfBounds)
            } else {
                Ok(record)
            }
        });
        match outcome {
            Ok(record) => records.push(record),
            Err(reason) => {
                if reason.is_malformed() {
                    skipped += 1;
                } else {
                    out_of_bounds += 1;
                }
                reject_log.push(Rejection {
                    line_number: row.line_number,
                    reason,
                });
            }
        }
    }

    reject_log.sort_by_key(|r| r.line_number);
    sort_chronologically(&mut records);
    Ok(Dataset {
        records,
        bounds,
        skipped,
        out_of_bounds,
        reject_log,
    })
}

pub fn load_dataset(path: &Path, bounds: GeoBounds) -> Result<Dataset, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    load_dataset_from_bytes(&bytes, bounds)
}

/// Serde adapter writing instants as `YYYY-MM-DDTHH:MM:SS.sssZ`.
pub mod timestamp {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn format(ts: &DateTime<Utc>) -> String {
        ts.to_rfc3339_opts(SecondsFormat::Millis, true)
    }

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_timestamp(&text).ok_or_else(|| de::Error::custom("invalid timestamp"))
    }
}
