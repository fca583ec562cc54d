//! Naive reference implementations used to cross-check the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeDelta, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tweetscape::analytics::TagRule;
use tweetscape::{Dataset, GeoBounds, SceneFrame, TweetRecord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const VOCAB: &[&str] = &["Danger", "dining", "hall", "DORM", "lib", "coffee", "Snow", "ab", "b", "café", "zz"];

/// Small random corpus with heavy timestamp, user and location reuse so
/// ties and stacks are common.
pub fn random_dataset(seed: u64, n: usize) -> Dataset {
    let mut rng = rng(seed);
    let bounds = GeoBounds::cambridge_campus();
    let base = DateTime::parse_from_rfc3339("2013-10-01T00:00:00Z").unwrap().with_timezone(&Utc);
    let spots: Vec<(f64, f64)> = (0..20)
        .map(|_| {
            (
                rng.gen_range(bounds.min_lat..=bounds.max_lat),
                rng.gen_range(bounds.min_lon..=bounds.max_lon),
            )
        })
        .collect();
    let records = (0..n)
        .map(|i| {
            let (latitude, longitude) = if rng.gen_bool(0.4) {
                spots[rng.gen_range(0..spots.len())]
            } else {
                (
                    rng.gen_range(bounds.min_lat..=bounds.max_lat),
                    rng.gen_range(bounds.min_lon..=bounds.max_lon),
                )
            };
            let words = rng.gen_range(1..6);
            let text = (0..words)
                .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())])
                .collect::<Vec<_>>()
                .join(" ");
            TweetRecord {
                id: format!("id{:05}", rng.gen_range(0..1_000_000) * 1000 + i),
                username: format!("u{}", rng.gen_range(0..25)),
                follower_count: rng.gen_range(0..100),
                timestamp: base + TimeDelta::minutes(rng.gen_range(0..2_000)),
                latitude,
                longitude,
                text,
                tags: BTreeSet::new(),
            }
        })
        .collect();
    Dataset::from_records(records, bounds)
}

pub fn random_keyword(rng: &mut ChaCha8Rng) -> String {
    let pick = VOCAB[rng.gen_range(0..VOCAB.len())];
    let chars = pick.chars().count();
    let len = rng.gen_range(1..=chars.min(4));
    let start = rng.gen_range(0..=chars - len);
    let piece: String = pick.chars().skip(start).take(len).collect();
    if rng.gen_bool(0.5) {
        piece.to_uppercase()
    } else {
        piece
    }
}

fn ascii_lower(s: &str) -> String {
    s.chars().map(|c| c.to_ascii_lowercase()).collect()
}

pub fn oracle_search(ds: &Dataset, keyword: &str) -> Vec<String> {
    let k = ascii_lower(keyword.trim());
    let mut hits: Vec<&TweetRecord> = ds.records.iter().filter(|r| ascii_lower(&r.text).contains(&k)).collect();
    hits.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
    hits.into_iter().map(|r| r.id.clone()).collect()
}

pub fn oracle_filter_time(ds: &Dataset, start: DateTime<Utc>, end: DateTime<Utc>) -> Vec<String> {
    let mut hits: Vec<&TweetRecord> = ds
        .records
        .iter()
        .filter(|r| r.timestamp >= start && r.timestamp <= end)
        .collect();
    hits.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
    hits.into_iter().map(|r| r.id.clone()).collect()
}

pub fn oracle_tags(ds: &Dataset, rules: &[TagRule]) -> Vec<BTreeSet<String>> {
    ds.records
        .iter()
        .map(|r| {
            let mut tags = r.tags.clone();
            for rule in rules {
                let hit = if rule.case_sensitive {
                    r.text.contains(&rule.keyword)
                } else {
                    ascii_lower(&r.text).contains(&ascii_lower(&rule.keyword))
                };
                if hit {
                    tags.insert(rule.tag.clone());
                }
            }
            tags
        })
        .collect()
}

/// Sorts the user's records and zips neighbours.
pub fn oracle_user_path(ds: &Dataset, user: &str) -> (Vec<String>, Vec<(String, String)>) {
    let mut own: Vec<(DateTime<Utc>, String)> = ds
        .records
        .iter()
        .filter(|r| r.username == user)
        .map(|r| (r.timestamp, r.id.clone()))
        .collect();
    own.sort();
    let ids: Vec<String> = own.into_iter().map(|(_, id)| id).collect();
    let edges = ids.iter().zip(ids.iter().skip(1)).map(|(a, b)| (a.clone(), b.clone())).collect();
    (ids, edges)
}

/// Grid coordinates computed from first principles rather than through
/// `SceneFrame::project`.
pub fn oracle_cells(ds: &Dataset, frame: &SceneFrame, cell: f64) -> BTreeMap<(i64, i64), usize> {
    let b = frame.bounds;
    let r = 6_371_000.0_f64;
    let mean = ((b.min_lat + b.max_lat) / 2.0).to_radians();
    let mut out = BTreeMap::new();
    for rec in &ds.records {
        let x = (rec.longitude - b.min_lon).to_radians() * r * mean.cos();
        let y = (rec.latitude - b.min_lat).to_radians() * r;
        *out.entry(((x / cell).floor() as i64, (y / cell).floor() as i64)).or_insert(0) += 1;
    }
    out
}
