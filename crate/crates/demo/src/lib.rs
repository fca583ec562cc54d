//! Browser demo: three scene operations exported to JavaScript.
//!
//! Each export is a thin wrapper over a plain function so the numbers can be
//! tested natively. Arrays cross the boundary as `Float64Array`s.

use wasm_bindgen::prelude::*;

use tweetscape::analytics::{self, TagRule};
use tweetscape::layout::{self, ModelClass, StackParams};
use tweetscape::synth::{self, CorpusSpec};
use tweetscape::terrain::{self, Heightmap};
use tweetscape::{ingest, GeoBounds, SceneFrame};

fn campus_frame() -> SceneFrame {
    SceneFrame::new(GeoBounds::cambridge_campus()).expect("built-in bounds are valid")
}

/// `[width_m, depth_m, min_lat, min_lon, max_lat, max_lon]`
#[wasm_bindgen]
pub fn frame_info() -> Vec<f64> {
    let f = campus_frame();
    let b = f.bounds;
    vec![f.width_m, f.depth_m, b.min_lat, b.min_lon, b.max_lat, b.max_lon]
}

/// Scene meters for a campus coordinate, `[x, y]`.
#[wasm_bindgen]
pub fn project(lat: f64, lon: f64) -> Result<Vec<f64>, JsError> {
    let p = campus_frame().project(lat, lon).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(vec![p.x, p.y])
}

/// Campus coordinate for scene meters, `[lat, lon]`.
#[wasm_bindgen]
pub fn unproject(x: f64, y: f64) -> Result<Vec<f64>, JsError> {
    let (lat, lon) = campus_frame().unproject(x, y).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(vec![lat, lon])
}

const PROFILE_COLS: usize = 240;
const PROFILE_ROWS: usize = 41;

fn profile_terrain(seed: u64) -> Heightmap {
    synth::campus_heightmap(PROFILE_COLS, PROFILE_ROWS, 1.0, seed)
}

/// West-to-east height profile through the middle of a synthetic campus
/// strip, before and after smoothing.
pub fn smoothing_profile(seed: u64, iterations: usize, lambda: f64) -> Result<(Vec<f64>, Vec<f64>), String> {
    let raw = profile_terrain(seed);
    let smoothed = terrain::smooth(&raw, iterations, lambda).map_err(|e| e.to_string())?;
    let row = PROFILE_ROWS / 2;
    let cut = |hm: &Heightmap| (0..hm.cols).map(|c| hm.at(c, row)).collect();
    Ok((cut(&raw), cut(&smoothed)))
}

/// Raw profile followed by the smoothed one, both `PROFILE_COLS` long.
#[wasm_bindgen]
pub fn smooth_profile(seed: u32, iterations: u32, lambda: f64) -> Result<Vec<f64>, JsError> {
    let (mut raw, smoothed) =
        smoothing_profile(seed as u64, iterations as usize, lambda).map_err(|e| JsError::new(&e))?;
    raw.extend(smoothed);
    Ok(raw)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedMarker {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub stack_index: u32,
    pub alert: bool,
}

/// Places a seeded campus corpus of `n` posts on flat ground.
pub fn stack_corpus(n: usize, seed: u64, cell_size_m: f64) -> Result<Vec<StackedMarker>, String> {
    let frame = campus_frame();
    let corpus = synth::generate_corpus(&CorpusSpec::new(n, 0, seed));
    let ds = ingest::load_dataset_from_bytes(&corpus.bytes, frame.bounds).map_err(|e| e.to_string())?;
    let ds = analytics::tag_keywords(&ds, &[TagRule::danger()]);
    let params = StackParams {
        cell_size_m,
        ..StackParams::default()
    };
    let placed = layout::place(&ds, &frame, None, &params).map_err(|e| e.to_string())?;
    Ok(placed
        .into_iter()
        .map(|p| StackedMarker {
            x: p.position.x,
            y: p.position.y,
            z: p.position.z,
            stack_index: p.stack_index,
            alert: p.model_class == ModelClass::Skull,
        })
        .collect())
}

/// Five numbers per marker: `x, y, z, stack_index, alert (0|1)`.
#[wasm_bindgen]
pub fn stack_markers(n: u32, seed: u32, cell_size_m: f64) -> Result<Vec<f64>, JsError> {
    let markers = stack_corpus(n as usize, seed as u64, cell_size_m).map_err(|e| JsError::new(&e))?;
    Ok(markers
        .iter()
        .flat_map(|m| [m.x, m.y, m.z, m.stack_index as f64, if m.alert { 1.0 } else { 0.0 }])
        .collect())
}
