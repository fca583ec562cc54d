//! Scene placement of records: terrain anchoring, chronological stacking of
//! co-located records, query walls and the placement scaling benchmark.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::cell_of;
use crate::geo::{GeoError, SceneFrame, ScenePoint};
use crate::ingest::{Dataset, TweetRecord};
use crate::synth;
use crate::terrain::Heightmap;

/// Tag that switches a record's marker to the alert model.
pub const SKULL_TAG: &str = "skull";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("record {id}: {source}")]
    OutOfFrame {
        id: String,
        #[source]
        source: GeoError,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown record id {0}")]
    UnknownRecord(String),
    #[error("record id {0} listed twice")]
    DuplicateMatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelClass {
    Bird,
    Skull,
}

impl ModelClass {
    pub fn for_record(record: &TweetRecord) -> Self {
        if record.has_tag(SKULL_TAG) {
            ModelClass::Skull
        } else {
            ModelClass::Bird
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelClass::Bird => "bird",
            ModelClass::Skull => "skull",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StackParams {
    /// Edge of the square cell that counts as "the same location".
    pub cell_size_m: f64,
    /// Vertical spacing between stacked markers.
    pub marker_height_m: f64,
    pub ground_offset_m: f64,
}

impl Default for StackParams {
    fn default() -> Self {
        StackParams {
            cell_size_m: 2.0,
            marker_height_m: 1.0,
            ground_offset_m: 0.5,
        }
    }
}

impl StackParams {
    pub fn validate(&self) -> Result<(), LayoutError> {
        let fields = [
            ("cell_size_m", self.cell_size_m),
            ("marker_height_m", self.marker_height_m),
            ("ground_offset_m", self.ground_offset_m),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(LayoutError::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub record_id: String,
    #[serde(flatten)]
    pub position: ScenePoint,
    pub stack_index: u32,
    pub model_class: ModelClass,
}

/// Positions every record in the scene.
///
/// Records sharing a stack cell form a column ordered by `(timestamp, id)`.
/// The column stands on the terrain under its oldest record; each later
/// record sits `marker_height_m` above the previous one. Output is in
/// chronological order and does not depend on the input record order.
pub fn place(
    ds: &Dataset,
    frame: &SceneFrame,
    terrain: Option<&Heightmap>,
    params: &StackParams,
) -> Result<Vec<Placement>, LayoutError> {
    params.validate()?;
    let mut order: Vec<&TweetRecord> = ds.records.iter().collect();
    order.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));

    // cell -> (height of the stack's ground, items so far)
    let mut stacks: HashMap<(i64, i64), (f64, u32)> = HashMap::with_capacity(order.len());
    let mut placements = Vec::with_capacity(order.len());
    for record in order {
        let ground = frame
            .project(record.latitude, record.longitude)
            .map_err(|source| LayoutError::OutOfFrame {
                id: record.id.clone(),
                source,
            })?;
        let cell = cell_of(ground.x, ground.y, params.cell_size_m);
        let (base, count) = stacks.entry(cell).or_insert_with(|| {
            let terrain_z = terrain.and_then(|hm| hm.sample(ground.x, ground.y)).unwrap_or(0.0);
            (terrain_z + params.ground_offset_m, 0)
        });
        let stack_index = *count;
        *count += 1;
        placements.push(Placement {
            record_id: record.id.clone(),
            position: ScenePoint::new(ground.x, ground.y, *base + stack_index as f64 * params.marker_height_m),
            stack_index,
            model_class: ModelClass::for_record(record),
        });
    }
    Ok(placements)
}

/// Number of placements resting on another marker.
pub fn collisions(placements: &[Placement]) -> usize {
    placements.iter().filter(|p| p.stack_index > 0).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WallParams {
    pub columns: u32,
    pub slot_spacing_m: f64,
    /// Height of the wall's lower-left anchor above the scene center.
    pub altitude_m: f64,
}

impl Default for WallParams {
    fn default() -> Self {
        WallParams {
            columns: 10,
            slot_spacing_m: 3.0,
            altitude_m: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallSlot {
    pub record_id: String,
    pub wall_row: u32,
    pub wall_col: u32,
}

/// Floating grid of query matches, filled row-major from the bottom up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryWall {
    pub keyword: String,
    pub origin: ScenePoint,
    pub columns: u32,
    pub slot_spacing_m: f64,
    pub assignments: Vec<WallSlot>,
}

impl QueryWall {
    pub fn slot_position(&self, index: usize) -> ScenePoint {
        slot_position(self.origin, self.columns, self.slot_spacing_m, index)
    }
}

/// Scene position of the `index`-th wall slot. The wall stands in the x/z
/// plane: columns run east, rows run up.
pub fn slot_position(origin: ScenePoint, columns: u32, slot_spacing_m: f64, index: usize) -> ScenePoint {
    let columns = columns.max(1) as usize;
    let (row, col) = (index / columns, index % columns);
    ScenePoint::new(
        origin.x + col as f64 * slot_spacing_m,
        origin.y,
        origin.z + row as f64 * slot_spacing_m,
    )
}

pub fn build_wall(
    ds: &Dataset,
    keyword: &str,
    match_ids: &[String],
    frame: &SceneFrame,
    params: &WallParams,
) -> Result<QueryWall, LayoutError> {
    if params.columns == 0 {
        return Err(LayoutError::InvalidParams("wall needs at least one column".into()));
    }
    if !(params.slot_spacing_m.is_finite() && params.slot_spacing_m > 0.0) || !params.altitude_m.is_finite() {
        return Err(LayoutError::InvalidParams("bad wall spacing or altitude".into()));
    }
    let known: HashSet<&str> = ds.records.iter().map(|r| r.id.as_str()).collect();
    let mut seen = HashSet::with_capacity(match_ids.len());
    let mut assignments = Vec::with_capacity(match_ids.len());
    for (i, id) in match_ids.iter().enumerate() {
        if !known.contains(id.as_str()) {
            return Err(LayoutError::UnknownRecord(id.clone()));
        }
        if !seen.insert(id.as_str()) {
            return Err(LayoutError::DuplicateMatch(id.clone()));
        }
        assignments.push(WallSlot {
            record_id: id.clone(),
            wall_row: i as u32 / params.columns,
            wall_col: i as u32 % params.columns,
        });
    }
    let center = frame.center();
    Ok(QueryWall {
        keyword: keyword.to_owned(),
        origin: ScenePoint::new(center.x, center.y, params.altitude_m),
        columns: params.columns,
        slot_spacing_m: params.slot_spacing_m,
        assignments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub n: usize,
    pub elapsed: Duration,
    pub collisions: usize,
}

impl ScalingSample {
    pub fn collision_ratio(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.collisions as f64 / self.n as f64
        }
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.elapsed.as_secs_f64() * 1e3
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScalingReport {
    pub samples: Vec<ScalingSample>,
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,elapsed_ms,collisions,collision_ratio\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{:.6},{},{:.6}",
                s.n,
                s.elapsed_ms(),
                s.collisions,
                s.collision_ratio()
            );
        }
        out
    }
}

/// Timed runs per sample; the fastest one is reported.
pub const BENCHMARK_REPEATS: usize = 7;

/// Times [`place`] over growing random corpora.
///
/// One pool of `max(n_values)` uniformly scattered records is drawn from
/// `seed`, and each sample places the first `n` of them, so larger samples
/// extend smaller ones.
pub fn benchmark_placement(
    n_values: &[usize],
    frame: &SceneFrame,
    params: &StackParams,
    seed: u64,
) -> Result<ScalingReport, LayoutError> {
    benchmark_placement_with(n_values, frame, params, seed, BENCHMARK_REPEATS)
}

pub fn benchmark_placement_with(
    n_values: &[usize],
    frame: &SceneFrame,
    params: &StackParams,
    seed: u64,
    repeats: usize,
) -> Result<ScalingReport, LayoutError> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) || n_values.first() == Some(&0) {
        return Err(LayoutError::InvalidParams("n values must be positive and ascending".into()));
    }
    params.validate()?;
    let max_n = n_values.last().copied().unwrap_or(0);
    let pool = synth::uniform_records(max_n, &frame.bounds, seed);

    let mut samples = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let ds = Dataset::from_records(pool[..n].to_vec(), frame.bounds);
        let mut best = Duration::MAX;
        let mut placed = Vec::new();
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            placed = place(&ds, frame, None, params)?;
            best = best.min(start.elapsed());
        }
        samples.push(ScalingSample {
            n,
            elapsed: best,
            collisions: collisions(&placed),
        });
    }
    Ok(ScalingReport { samples })
}
