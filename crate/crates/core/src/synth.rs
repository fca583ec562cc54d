//! Seeded synthetic data: campus-like post corpora with a ledger of the
//! rows deliberately broken, and campus-like heightmaps.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::{DateTime, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geo::GeoBounds;
use crate::ingest::{timestamp, RejectReason, Rejection, TweetRecord, COLUMNS};
use crate::terrain::Heightmap;

/// Start of the collection window (2013-10-01T00:00:00Z).
pub fn window_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2013, 10, 1, 0, 0, 0).unwrap()
}

/// End of the collection window (2014-02-28T23:59:59Z).
pub fn window_end() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2014, 2, 28, 23, 59, 59).unwrap()
}

const WORDS: &[&str] = &[
    "lunch", "dining", "hall", "dorm", "library", "exam", "coffee", "snow", "river", "bridge", "lab", "problem",
    "set", "late", "night", "game", "class", "walk", "rain", "party", "study", "campus", "food", "finally",
    "friday", "cold", "sunset", "bike", "lecture", "tired",
];

const ALERTS: &[&str] = &["danger", "Danger", "DANGER"];

/// Which validation failures the corpus generator may inject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    /// Only rows with a missing or extra field.
    ColumnCountOnly,
    /// A rotating mix of every malformed-row reason.
    Mixed,
}

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub rows: usize,
    pub corrupt: usize,
    /// Well-formed rows placed outside `bounds`.
    pub out_of_bounds: usize,
    pub corruption: Corruption,
    pub bounds: GeoBounds,
    pub users: usize,
    /// Fraction of valid rows posted from one of a few shared hotspots.
    pub hotspot_fraction: f64,
    /// Fraction of valid rows mentioning an alert keyword.
    pub alert_fraction: f64,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn new(rows: usize, corrupt: usize, seed: u64) -> Self {
        CorpusSpec {
            rows,
            corrupt,
            out_of_bounds: 0,
            corruption: Corruption::Mixed,
            bounds: GeoBounds::cambridge_campus(),
            users: 250,
            hotspot_fraction: 0.3,
            alert_fraction: 0.05,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub bytes: Vec<u8>,
    /// Lines the generator broke on purpose, with the expected reason,
    /// including out-of-bounds rows.
    pub ledger: Vec<Rejection>,
    /// Ids of rows that should load.
    pub valid_ids: Vec<String>,
}

impl SyntheticCorpus {
    pub fn malformed(&self) -> usize {
        self.ledger.iter().filter(|r| r.reason.is_malformed()).count()
    }
}

const MIXED_REASONS: [RejectReason; 6] = [
    RejectReason::ColumnCount,
    RejectReason::BadTimestamp,
    RejectReason::BadCoordinate,
    RejectReason::BadInteger,
    RejectReason::EmptyRequiredField,
    RejectReason::InvalidUtf8,
];

/// Writes a header plus `spec.rows` data lines; exactly `spec.corrupt` of
/// them are malformed and `spec.out_of_bounds` fall outside the bounds.
pub fn generate_corpus(spec: &CorpusSpec) -> SyntheticCorpus {
    assert!(
        spec.corrupt + spec.out_of_bounds <= spec.rows,
        "more broken rows than rows"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let hotspots: Vec<(f64, f64)> = (0..8).map(|_| random_point(&mut rng, &spec.bounds)).collect();
    let users: Vec<String> = (0..spec.users.max(1)).map(|i| format!("user{i:04}")).collect();

    // Which data lines to break, and how.
    let mut slots: Vec<usize> = (0..spec.rows).collect();
    slots.shuffle(&mut rng);
    let mut plan = vec![None; spec.rows];
    for (k, &slot) in slots[..spec.corrupt].iter().enumerate() {
        plan[slot] = Some(match spec.corruption {
            Corruption::ColumnCountOnly => RejectReason::ColumnCount,
            Corruption::Mixed => MIXED_REASONS[k % MIXED_REASONS.len()],
        });
    }
    for &slot in &slots[spec.corrupt..spec.corrupt + spec.out_of_bounds] {
        plan[slot] = Some(RejectReason::OutOfBounds);
    }

    let mut bytes = COLUMNS.join("\t").into_bytes();
    bytes.push(b'\n');
    let mut ledger = Vec::new();
    let mut valid_ids = Vec::new();
    let span = (window_end() - window_start()).num_milliseconds();

    for (i, fault) in plan.into_iter().enumerate() {
        let line_number = i + 2;
        let id = format!("t{:07}", i + 1);
        let user = users[rng.gen_range(0..users.len())].clone();
        let followers: u64 = rng.gen_range(0..5_000);
        let ts = window_start() + chrono::TimeDelta::milliseconds(rng.gen_range(0..=span));
        let (lat, lon) = if rng.gen_bool(spec.hotspot_fraction) {
            hotspots[rng.gen_range(0..hotspots.len())]
        } else {
            random_point(&mut rng, &spec.bounds)
        };
        let text = random_text(&mut rng, spec.alert_fraction);

        let mut cells: Vec<Vec<u8>> = vec![
            id.clone().into_bytes(),
            user.into_bytes(),
            followers.to_string().into_bytes(),
            timestamp::format(&ts).into_bytes(),
            format!("{lat:.7}").into_bytes(),
            format!("{lon:.7}").into_bytes(),
            text.into_bytes(),
        ];
        match fault {
            None => valid_ids.push(id),
            Some(reason) => {
                break_row(&mut cells, reason, &spec.bounds, &mut rng);
                ledger.push(Rejection { line_number, reason });
            }
        }
        bytes.extend_from_slice(&cells.join(&b'\t'));
        bytes.push(b'\n');
    }

    SyntheticCorpus {
        bytes,
        ledger,
        valid_ids,
    }
}

fn break_row(cells: &mut Vec<Vec<u8>>, reason: RejectReason, bounds: &GeoBounds, rng: &mut ChaCha8Rng) {
    match reason {
        RejectReason::ColumnCount => {
            if rng.gen_bool(0.5) {
                cells.remove(rng.gen_range(0..cells.len()));
            } else {
                cells.push(b"stray".to_vec());
            }
        }
        RejectReason::BadTimestamp => {
            let bad = ["2013-13-40T99:99:99Z", "yesterday", "2013-10-01 12:00", "1381000000"];
            cells[3] = bad[rng.gen_range(0..bad.len())].as_bytes().to_vec();
        }
        RejectReason::BadCoordinate => {
            let bad = ["91.0", "-95.5", "north", "NaN"];
            cells[4] = bad[rng.gen_range(0..bad.len())].as_bytes().to_vec();
        }
        RejectReason::BadInteger => {
            let bad = ["-12", "many", "1.5e3", "12k"];
            cells[2] = bad[rng.gen_range(0..bad.len())].as_bytes().to_vec();
        }
        RejectReason::EmptyRequiredField => {
            let col = [0, 1, 2, 3, 4, 5, 6][rng.gen_range(0..7)];
            cells[col].clear();
        }
        RejectReason::InvalidUtf8 => {
            cells[6].extend_from_slice(&[0xc3, 0x28, 0xff]);
        }
        RejectReason::OutOfBounds => {
            let lat = bounds.max_lat + 0.01 + rng.gen_range(0.0..0.05);
            cells[4] = format!("{lat:.7}").into_bytes();
        }
        RejectReason::DuplicateId => {
            cells[0] = b"t0000001".to_vec();
        }
    }
}

fn random_point<R: Rng>(rng: &mut R, b: &GeoBounds) -> (f64, f64) {
    (
        rng.gen_range(b.min_lat..=b.max_lat),
        rng.gen_range(b.min_lon..=b.max_lon),
    )
}

fn random_text<R: Rng>(rng: &mut R, alert_fraction: f64) -> String {
    let n = rng.gen_range(3..10);
    let mut words: Vec<&str> = (0..n).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
    if rng.gen_bool(alert_fraction) {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, ALERTS[rng.gen_range(0..ALERTS.len())]);
    }
    words.join(" ")
}

/// `n` valid records scattered uniformly over `bounds` and the collection
/// window.
pub fn uniform_records(n: usize, bounds: &GeoBounds, seed: u64) -> Vec<TweetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (window_end() - window_start()).num_milliseconds();
    (0..n)
        .map(|i| {
            let (latitude, longitude) = random_point(&mut rng, bounds);
            TweetRecord {
                id: format!("r{i:07}"),
                username: format!("user{:04}", rng.gen_range(0..500)),
                follower_count: rng.gen_range(0..5_000),
                timestamp: window_start() + chrono::TimeDelta::milliseconds(rng.gen_range(0..=span)),
                latitude,
                longitude,
                text: random_text(&mut rng, 0.05),
                tags: BTreeSet::new(),
            }
        })
        .collect()
}

/// Gently sloping ground with box-shaped buildings and a little sensor
/// noise, in meters.
pub fn campus_heightmap(cols: usize, rows: usize, resolution_m: f64, seed: u64) -> Heightmap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut heights: Vec<f64> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (c, r)))
        .map(|(c, r)| 3.0 + 0.004 * c as f64 + 0.002 * r as f64)
        .collect();

    let buildings = (cols * rows / 4_000).max(1);
    for _ in 0..buildings {
        let w = rng.gen_range(8..40).min(cols);
        let d = rng.gen_range(8..40).min(rows);
        let c0 = rng.gen_range(0..=cols - w);
        let r0 = rng.gen_range(0..=rows - d);
        let roof = rng.gen_range(8.0..45.0);
        for r in r0..r0 + d {
            for c in c0..c0 + w {
                let h = &mut heights[r * cols + c];
                *h = h.max(3.0 + roof);
            }
        }
    }
    for h in &mut heights {
        *h += rng.gen_range(-0.25..0.25);
    }
    Heightmap {
        cols,
        rows,
        resolution_m,
        heights,
    }
}

/// Writes records as a corpus file body (header included).
pub fn records_to_tsv(records: &[TweetRecord]) -> String {
    let mut out = COLUMNS.join("\t");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.id,
            r.username,
            r.follower_count,
            timestamp::format(&r.timestamp),
            r.latitude,
            r.longitude,
            r.text
        );
    }
    out
}
