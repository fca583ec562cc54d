//! Geo-tagged post analytics over a metric 3D campus scene.
//!
//! The pipeline loads a tab-separated corpus ([`ingest`]), projects it into a
//! local scene frame ([`geo`]), builds chunked terrain meshes from a
//! heightmap ([`terrain`]), answers analytic queries ([`analytics`]) and lays
//! records out as stacked markers and query walls ([`layout`]).

pub mod analytics;
pub mod geo;
pub mod ingest;
pub mod layout;
pub mod synth;
pub mod terrain;

pub use analytics::{CellCounts, TagRule, TimeInterval, UserPath};
pub use geo::{GeoBounds, SceneFrame, ScenePoint};
pub use ingest::{Dataset, RejectReason, TweetRecord};
pub use layout::{ModelClass, Placement, QueryWall, StackParams, WallParams};
pub use terrain::{Heightmap, Mesh, MeshChunk};
