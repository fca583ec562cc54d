//! Read-only analytic queries over a loaded [`Dataset`].

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{GeoError, SceneFrame};
use crate::ingest::{Dataset, TweetRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("empty-query")]
    EmptyQuery,
    #[error("empty-keyword")]
    EmptyKeyword,
    #[error("bad-interval: start is after end")]
    InvalidInterval,
    #[error("bad-cell-size: {0}")]
    InvalidCellSize(f64),
    #[error("record {id}: {source}")]
    OutOfFrame {
        id: String,
        #[source]
        source: GeoError,
    },
}

impl AnalyticsError {
    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            AnalyticsError::EmptyQuery => "empty-query",
            AnalyticsError::EmptyKeyword => "empty-keyword",
            AnalyticsError::InvalidInterval => "bad-interval",
            AnalyticsError::InvalidCellSize(_) => "bad-cell-size",
            AnalyticsError::OutOfFrame { .. } => "out-of-frame",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagRule {
    pub keyword: String,
    pub tag: String,
    #[serde(default)]
    pub case_sensitive: bool,
}

impl TagRule {
    pub fn new(keyword: impl Into<String>, tag: impl Into<String>, case_sensitive: bool) -> Result<Self, AnalyticsError> {
        let keyword = keyword.into();
        if keyword.is_empty() {
            return Err(AnalyticsError::EmptyKeyword);
        }
        Ok(TagRule {
            keyword,
            tag: tag.into(),
            case_sensitive,
        })
    }

    /// The buzz-word rule rendering alarming posts as skulls.
    pub fn danger() -> Self {
        TagRule {
            keyword: "danger".into(),
            tag: "skull".into(),
            case_sensitive: false,
        }
    }

    pub fn matches(&self, text: &str) -> bool {
        if self.case_sensitive {
            text.contains(&self.keyword)
        } else {
            contains_ignore_ascii_case(text, &self.keyword)
        }
    }
}

/// Substring test under ASCII case folding.
pub fn contains_ignore_ascii_case(haystack: &str, needle: &str) -> bool {
    let (h, n) = (haystack.as_bytes(), needle.as_bytes());
    if n.is_empty() {
        return true;
    }
    h.windows(n.len()).any(|w| w.eq_ignore_ascii_case(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeInterval {
    #[serde(with = "crate::ingest::timestamp")]
    pub start: DateTime<Utc>,
    #[serde(with = "crate::ingest::timestamp")]
    pub end: DateTime<Utc>,
}

impl TimeInterval {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, AnalyticsError> {
        if start > end {
            return Err(AnalyticsError::InvalidInterval);
        }
        Ok(TimeInterval { start, end })
    }

    /// The widest representable interval.
    pub fn all() -> Self {
        TimeInterval {
            start: DateTime::<Utc>::MIN_UTC,
            end: DateTime::<Utc>::MAX_UTC,
        }
    }

    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        self.start <= ts && ts <= self.end
    }
}

/// Adds each matching rule's tag to every record; returns a new dataset.
pub fn tag_keywords(ds: &Dataset, rules: &[TagRule]) -> Dataset {
    let mut out = ds.clone();
    for record in &mut out.records {
        for rule in rules {
            if rule.matches(&record.text) {
                record.tags.insert(rule.tag.clone());
            }
        }
    }
    out
}

/// Ids of records inside the closed interval, chronologically.
///
/// Relies on the dataset's chronological ordering.
pub fn filter_time(ds: &Dataset, interval: &TimeInterval) -> Vec<String> {
    let records = &ds.records;
    let lo = records.partition_point(|r| r.timestamp < interval.start);
    let hi = records.partition_point(|r| r.timestamp <= interval.end);
    records[lo..hi.max(lo)].iter().map(|r| r.id.clone()).collect()
}

/// Ids of records whose text contains `keyword`, ignoring ASCII case.
/// Surrounding whitespace of the keyword is ignored.
pub fn search(ds: &Dataset, keyword: &str) -> Result<Vec<String>, AnalyticsError> {
    let needle = keyword.trim();
    if needle.is_empty() {
        return Err(AnalyticsError::EmptyQuery);
    }
    Ok(ds
        .records
        .iter()
        .filter(|r| contains_ignore_ascii_case(&r.text, needle))
        .map(|r| r.id.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathEdge {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserPath {
    pub username: String,
    pub tweet_ids: Vec<String>,
    pub edges: Vec<PathEdge>,
}

/// A user's posts in time order, linked consecutively.
pub fn user_path(ds: &Dataset, username: &str) -> UserPath {
    let mut own: Vec<&TweetRecord> = ds.records.iter().filter(|r| r.username == username).collect();
    own.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    let tweet_ids: Vec<String> = own.iter().map(|r| r.id.clone()).collect();
    let edges = tweet_ids
        .windows(2)
        .map(|w| PathEdge {
            from: w[0].clone(),
            to: w[1].clone(),
        })
        .collect();
    UserPath {
        username: username.to_owned(),
        tweet_ids,
        edges,
    }
}

/// Per-cell record counts over a square grid laid on the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCounts {
    pub cell_size_m: f64,
    #[serde(with = "cells")]
    pub counts: BTreeMap<(i64, i64), usize>,
}

impl CellCounts {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// JSON has no tuple keys, so cells travel as a list of entries.
mod cells {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        cell_x: i64,
        cell_y: i64,
        count: usize,
    }

    pub fn serialize<S: Serializer>(counts: &BTreeMap<(i64, i64), usize>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(counts.iter().map(|(&(cell_x, cell_y), &count)| Entry { cell_x, cell_y, count }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(i64, i64), usize>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| ((e.cell_x, e.cell_y), e.count)).collect())
    }
}

/// Grid cell containing a scene position.
#[inline]
pub fn cell_of(x: f64, y: f64, cell_size_m: f64) -> (i64, i64) {
    ((x / cell_size_m).floor() as i64, (y / cell_size_m).floor() as i64)
}

pub fn cluster_stats(ds: &Dataset, frame: &SceneFrame, cell_size_m: f64) -> Result<CellCounts, AnalyticsError> {
    if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
        return Err(AnalyticsError::InvalidCellSize(cell_size_m));
    }
    let mut counts = BTreeMap::new();
    for r in &ds.records {
        let p = frame
            .project(r.latitude, r.longitude)
            .map_err(|source| AnalyticsError::OutOfFrame {
                id: r.id.clone(),
                source,
            })?;
        *counts.entry(cell_of(p.x, p.y, cell_size_m)).or_insert(0) += 1;
    }
    Ok(CellCounts { cell_size_m, counts })
}
