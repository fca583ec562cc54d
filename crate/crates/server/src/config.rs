use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tweetscape::analytics::TagRule;
use tweetscape::terrain::{DEFAULT_MAX_VERTICES, DEFAULT_SMOOTH_ITERATIONS, DEFAULT_SMOOTH_LAMBDA};
use tweetscape::{GeoBounds, StackParams, WallParams};

use crate::BootError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TerrainConfig {
    pub smooth_iterations: usize,
    pub smooth_lambda: f64,
    pub max_vertices: usize,
}

impl Default for TerrainConfig {
    fn default() -> Self {
        TerrainConfig {
            smooth_iterations: DEFAULT_SMOOTH_ITERATIONS,
            smooth_lambda: DEFAULT_SMOOTH_LAMBDA,
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }
}

/// Service settings, usually read from a TOML file. Relative paths in a
/// file are resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub dataset: PathBuf,
    pub heightmap: Option<PathBuf>,
    /// Static image draped under the terrain by the client.
    pub ground_image: Option<PathBuf>,
    pub bounds: GeoBounds,
    pub stack: StackParams,
    pub wall: WallParams,
    pub terrain: TerrainConfig,
    pub tag_rules: Vec<TagRule>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            dataset: PathBuf::from("tweets.tsv"),
            heightmap: None,
            ground_image: None,
            bounds: GeoBounds::cambridge_campus(),
            stack: StackParams::default(),
            wall: WallParams::default(),
            terrain: TerrainConfig::default(),
            tag_rules: vec![TagRule::danger()],
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, BootError> {
        let mut config: ServiceConfig =
            toml::from_str(text).map_err(|e| BootError::new("config", e.to_string()))?;
        config.resolve_paths(base_dir);
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, BootError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BootError::new("config", format!("unreadable file {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut self.dataset);
        if let Some(p) = self.heightmap.as_mut() {
            resolve(p);
        }
        if let Some(p) = self.ground_image.as_mut() {
            resolve(p);
        }
    }

    pub fn validate(&self) -> Result<(), BootError> {
        let config = |e: String| BootError::new("config", e);
        self.bounds.validate().map_err(|e| config(e.to_string()))?;
        self.stack.validate().map_err(|e| config(e.to_string()))?;
        if self.wall.columns == 0 || self.wall.slot_spacing_m.is_nan() || self.wall.slot_spacing_m <= 0.0 {
            return Err(config("wall needs positive columns and spacing".into()));
        }
        if self.tag_rules.iter().any(|r| r.keyword.is_empty()) {
            return Err(config("tag rule with empty keyword".into()));
        }
        Ok(())
    }
}
