use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};

use tweetscape::analytics;
use tweetscape::ingest;
use tweetscape::layout;
use tweetscape::terrain::{self, Heightmap, MeshChunk};
use tweetscape::{Dataset, Placement, SceneFrame, ScenePoint, StackParams, TweetRecord, WallParams};

use crate::config::ServiceConfig;
use crate::BootError;

/// Everything the API serves from one load. Never mutated after it is
/// published.
#[derive(Debug)]
pub struct Snapshot {
    pub dataset: Dataset,
    pub frame: SceneFrame,
    pub placements: Vec<Placement>,
    pub terrain: Option<Heightmap>,
    pub terrain_chunks: Vec<MeshChunk>,
    pub ground_image: Option<PathBuf>,
    pub stack: StackParams,
    pub wall: WallParams,
    pub load_timestamp: DateTime<Utc>,
    by_id: HashMap<String, usize>,
}

impl Snapshot {
    pub fn record(&self, id: &str) -> Option<&TweetRecord> {
        self.by_id.get(id).map(|&i| &self.dataset.records[i])
    }

    pub fn placement(&self, id: &str) -> Option<&Placement> {
        // placements and records share chronological order
        self.by_id.get(id).map(|&i| &self.placements[i])
    }
}

/// Loads, tags, meshes and lays out everything named by `config`.
pub fn build_snapshot(config: &ServiceConfig) -> Result<Snapshot, BootError> {
    config.validate()?;
    let frame = SceneFrame::new(config.bounds).map_err(|e| BootError::new("config", e.to_string()))?;

    let loaded = ingest::load_dataset(&config.dataset, config.bounds).map_err(|e| BootError::new("ingest", e.to_string()))?;
    let dataset = analytics::tag_keywords(&loaded, &config.tag_rules);

    let terrain = match &config.heightmap {
        None => None,
        Some(path) => {
            let raw = terrain::load_heightmap(path).map_err(|e| BootError::new("terrain", e.to_string()))?;
            let smoothed = terrain::smooth(&raw, config.terrain.smooth_iterations, config.terrain.smooth_lambda)
                .map_err(|e| BootError::new("terrain", e.to_string()))?;
            Some(smoothed)
        }
    };
    let terrain_chunks = match &terrain {
        None => Vec::new(),
        Some(hm) => {
            let mesh = terrain::triangulate(hm, ScenePoint::ORIGIN).map_err(|e| BootError::new("terrain", e.to_string()))?;
            terrain::chunk_mesh(&mesh, config.terrain.max_vertices).map_err(|e| BootError::new("terrain", e.to_string()))?
        }
    };

    let placements = layout::place(&dataset, &frame, terrain.as_ref(), &config.stack)
        .map_err(|e| BootError::new("layout", e.to_string()))?;

    if let Some(img) = &config.ground_image {
        if !img.is_file() {
            return Err(BootError::new("config", format!("ground image {} not found", img.display())));
        }
    }

    let by_id = dataset
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.clone(), i))
        .collect();
    Ok(Snapshot {
        dataset,
        frame,
        placements,
        terrain,
        terrain_chunks,
        ground_image: config.ground_image.clone(),
        stack: config.stack,
        wall: config.wall,
        load_timestamp: Utc::now(),
        by_id,
    })
}

/// Holder of the currently published snapshot.
///
/// Readers take a cheap `Arc` clone and then work lock-free on that one
/// snapshot; publishing swaps the pointer under a short write lock.
#[derive(Debug)]
pub struct SnapshotStore {
    current: RwLock<Arc<Snapshot>>,
}

impl SnapshotStore {
    pub fn new(snapshot: Snapshot) -> Self {
        SnapshotStore {
            current: RwLock::new(Arc::new(snapshot)),
        }
    }

    pub fn current(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn publish(&self, snapshot: Snapshot) -> Arc<Snapshot> {
        let next = Arc::new(snapshot);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::clone(&next);
        next
    }
}
