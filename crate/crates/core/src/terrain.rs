//! Heightmap terrain: loading, smoothing, triangulation, vertex-budget
//! chunking and binary STL export.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::ScenePoint;

/// Per-model vertex limit of the target game engine.
pub const DEFAULT_MAX_VERTICES: usize = 65_000;
pub const DEFAULT_SMOOTH_ITERATIONS: usize = 3;
pub const DEFAULT_SMOOTH_LAMBDA: f64 = 0.5;

pub const STL_HEADER_LEN: usize = 80;
pub const STL_TRIANGLE_LEN: usize = 50;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("unreadable file {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("unwritable path {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("heightmap format: {0}")]
    Format(String),
    #[error("invalid heightmap: {0}")]
    InvalidHeightmap(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("grid too small: {cols}x{rows}, need at least 2x2")]
    GridTooSmall { cols: usize, rows: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("stl: {0}")]
    Stl(String),
}

/// Regular elevation grid. Row 0 is the southern edge; cell `(col, row)`
/// sits at scene position `(col * resolution_m, row * resolution_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heightmap {
    pub cols: usize,
    pub rows: usize,
    pub resolution_m: f64,
    pub heights: Vec<f64>,
}

impl Heightmap {
    pub fn new(cols: usize, rows: usize, resolution_m: f64, heights: Vec<f64>) -> Result<Self, TerrainError> {
        let hm = Heightmap {
            cols,
            rows,
            resolution_m,
            heights,
        };
        hm.validate()?;
        Ok(hm)
    }

    pub fn flat(cols: usize, rows: usize, resolution_m: f64, height: f64) -> Result<Self, TerrainError> {
        Self::new(cols, rows, resolution_m, vec![height; cols * rows])
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        if self.cols == 0 || self.rows == 0 {
            return Err(TerrainError::InvalidHeightmap("cols and rows must be positive".into()));
        }
        if !(self.resolution_m.is_finite() && self.resolution_m > 0.0) {
            return Err(TerrainError::InvalidHeightmap("resolution must be positive".into()));
        }
        if self.heights.len() != self.cols * self.rows {
            return Err(TerrainError::InvalidHeightmap(format!(
                "{} heights for a {}x{} grid",
                self.heights.len(),
                self.cols,
                self.rows
            )));
        }
        if let Some(i) = self.heights.iter().position(|h| !h.is_finite()) {
            return Err(TerrainError::InvalidHeightmap(format!("non-finite height at index {i}")));
        }
        Ok(())
    }

    #[inline]
    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.heights[row * self.cols + col]
    }

    pub fn width_m(&self) -> f64 {
        (self.cols - 1) as f64 * self.resolution_m
    }

    pub fn depth_m(&self) -> f64 {
        (self.rows - 1) as f64 * self.resolution_m
    }

    /// Bilinear height at a scene position, `None` outside the grid.
    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        let gx = x / self.resolution_m;
        let gy = y / self.resolution_m;
        let max_c = (self.cols - 1) as f64;
        let max_r = (self.rows - 1) as f64;
        if !(gx >= 0.0 && gy >= 0.0 && gx <= max_c && gy <= max_r) {
            return None;
        }
        let c0 = (gx.floor() as usize).min(self.cols.saturating_sub(2));
        let r0 = (gy.floor() as usize).min(self.rows.saturating_sub(2));
        let c1 = (c0 + 1).min(self.cols - 1);
        let r1 = (r0 + 1).min(self.rows - 1);
        let tx = gx - c0 as f64;
        let ty = gy - r0 as f64;
        let south = self.at(c0, r0) * (1.0 - tx) + self.at(c1, r0) * tx;
        let north = self.at(c0, r1) * (1.0 - tx) + self.at(c1, r1) * tx;
        Some(south * (1.0 - ty) + north * ty)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.heights
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| (lo.min(h), hi.max(h)))
    }
}

/// Parses the ASCII grid format: `ncols`, `nrows` and `cellsize` header
/// lines followed by `nrows` lines of heights, northernmost row first.
pub fn parse_heightmap(text: &str) -> Result<Heightmap, TerrainError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let cols: usize = header_value(lines.next(), "ncols")?;
    let rows: usize = header_value(lines.next(), "nrows")?;
    let resolution_m: f64 = header_value(lines.next(), "cellsize")?;
    if cols == 0 || rows == 0 {
        return Err(TerrainError::Format("ncols and nrows must be positive".into()));
    }

    let mut file_rows = Vec::with_capacity(rows);
    for (i, line) in lines.enumerate() {
        if i >= rows {
            return Err(TerrainError::Format(format!("more than {rows} data rows")));
        }
        let values = line
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|h| h.is_finite())
                    .ok_or_else(|| TerrainError::Format(format!("row {}: bad value {v:?}", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != cols {
            return Err(TerrainError::Format(format!(
                "row {} has {} values, expected {cols}",
                i + 1,
                values.len()
            )));
        }
        file_rows.push(values);
    }
    if file_rows.len() != rows {
        return Err(TerrainError::Format(format!(
            "expected {rows} data rows, found {}",
            file_rows.len()
        )));
    }

    // File is north-first; storage is south-first.
    let heights = file_rows.into_iter().rev().flatten().collect();
    Heightmap::new(cols, rows, resolution_m, heights)
}

fn header_value<T: std::str::FromStr>(line: Option<&str>, key: &str) -> Result<T, TerrainError> {
    let line = line.ok_or_else(|| TerrainError::Format(format!("missing {key} header")))?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k.eq_ignore_ascii_case(key) => v
            .parse()
            .map_err(|_| TerrainError::Format(format!("bad {key} value {v:?}"))),
        _ => Err(TerrainError::Format(format!("expected `{key} <value>`, found {line:?}"))),
    }
}

pub fn load_heightmap(path: &Path) -> Result<Heightmap, TerrainError> {
    let text = std::fs::read_to_string(path).map_err(|source| TerrainError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_heightmap(&text)
}

pub fn format_heightmap(hm: &Heightmap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ncols {}", hm.cols);
    let _ = writeln!(out, "nrows {}", hm.rows);
    let _ = writeln!(out, "cellsize {}", hm.resolution_m);
    for row in (0..hm.rows).rev() {
        let line = &hm.heights[row * hm.cols..(row + 1) * hm.cols];
        for (i, h) in line.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{h}");
        }
        out.push('\n');
    }
    out
}

pub fn save_heightmap(hm: &Heightmap, path: &Path) -> Result<(), TerrainError> {
    std::fs::write(path, format_heightmap(hm)).map_err(|source| TerrainError::Write {
        path: path.to_owned(),
        source,
    })
}

/// Laplacian smoothing: every interior cell moves `lambda` of the way toward
/// the mean of its four neighbours, per iteration. Border cells are fixed.
pub fn smooth(hm: &Heightmap, iterations: usize, lambda: f64) -> Result<Heightmap, TerrainError> {
    if iterations == 0 {
        return Err(TerrainError::InvalidParameter("iterations must be positive".into()));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(TerrainError::InvalidParameter(format!("lambda {lambda} not in (0, 1]")));
    }
    let (cols, rows) = (hm.cols, hm.rows);
    let mut current = hm.heights.clone();
    let mut next = current.clone();
    if cols < 3 || rows < 3 {
        return Ok(hm.clone());
    }
    for _ in 0..iterations {
        for r in 1..rows - 1 {
            for c in 1..cols - 1 {
                let i = r * cols + c;
                let mean = (current[i - 1] + current[i + 1] + current[i - cols] + current[i + cols]) / 4.0;
                next[i] = current[i] + lambda * (mean - current[i]);
            }
        }
        std::mem::swap(&mut current, &mut next);
    }
    Ok(Heightmap {
        heights: current,
        ..hm.clone()
    })
}

/// Indexed triangle mesh in scene meters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) -> Result<Self, TerrainError> {
        let mesh = Mesh { vertices, triangles };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i as usize >= n) {
                return Err(TerrainError::InvalidMesh(format!("triangle {t} indexes past {n} vertices")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(TerrainError::InvalidMesh(format!("triangle {t} is degenerate")));
            }
        }
        Ok(())
    }

    pub fn triangle_positions(&self, t: usize) -> [[f64; 3]; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshChunk {
    pub chunk_id: u32,
    #[serde(flatten)]
    pub mesh: Mesh,
}

/// One vertex per grid cell, two counter-clockwise triangles per grid square.
pub fn triangulate(hm: &Heightmap, origin: ScenePoint) -> Result<Mesh, TerrainError> {
    let (cols, rows) = (hm.cols, hm.rows);
    if cols < 2 || rows < 2 {
        return Err(TerrainError::GridTooSmall { cols, rows });
    }
    if cols * rows > u32::MAX as usize {
        return Err(TerrainError::InvalidParameter("grid exceeds 32-bit vertex indexing".into()));
    }
    let mut vertices = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        for c in 0..cols {
            vertices.push([
                origin.x + c as f64 * hm.resolution_m,
                origin.y + r as f64 * hm.resolution_m,
                origin.z + hm.at(c, r),
            ]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * (cols - 1) * (rows - 1));
    let idx = |c: usize, r: usize| (r * cols + c) as u32;
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            let sw = idx(c, r);
            let se = idx(c + 1, r);
            let ne = idx(c + 1, r + 1);
            let nw = idx(c, r + 1);
            triangles.push([sw, se, ne]);
            triangles.push([sw, ne, nw]);
        }
    }
    Ok(Mesh { vertices, triangles })
}

/// Greedily partitions triangles, in order, into chunks of at most
/// `max_vertices` chunk-local vertices. Vertices shared across a chunk
/// boundary are duplicated.
pub fn chunk_mesh(mesh: &Mesh, max_vertices: usize) -> Result<Vec<MeshChunk>, TerrainError> {
    if max_vertices < 3 {
        return Err(TerrainError::InvalidParameter(format!(
            "max_vertices {max_vertices} cannot hold a triangle"
        )));
    }
    mesh.validate()?;

    let mut chunks = Vec::new();
    let mut local: HashMap<u32, u32> = HashMap::new();
    let mut current = Mesh::default();

    for tri in &mesh.triangles {
        let fresh = tri
            .iter()
            .enumerate()
            .filter(|&(k, v)| !local.contains_key(v) && !tri[..k].contains(v))
            .count();
        if current.vertices.len() + fresh > max_vertices {
            chunks.push(MeshChunk {
                chunk_id: chunks.len() as u32,
                mesh: std::mem::take(&mut current),
            });
            local.clear();
        }
        let remapped = tri.map(|global| {
            *local.entry(global).or_insert_with(|| {
                current.vertices.push(mesh.vertices[global as usize]);
                (current.vertices.len() - 1) as u32
            })
        });
        current.triangles.push(remapped);
    }
    if !current.triangles.is_empty() {
        chunks.push(MeshChunk {
            chunk_id: chunks.len() as u32,
            mesh: current,
        });
    }
    Ok(chunks)
}

/// A triangle as stored in binary STL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StlTriangle {
    pub normal: [f32; 3],
    pub vertices: [[f32; 3]; 3],
}

impl StlTriangle {
    /// Narrows to 32-bit floats; the normal follows the winding order.
    pub fn from_positions(p: [[f64; 3]; 3]) -> Self {
        let vertices = p.map(|v| v.map(|c| c as f32));
        StlTriangle {
            normal: winding_normal(&vertices),
            vertices,
        }
    }
}

fn winding_normal(v: &[[f32; 3]; 3]) -> [f32; 3] {
    let a = v[0].map(f64::from);
    let b = v[1].map(f64::from);
    let c = v[2].map(f64::from);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if len > 0.0 {
        n.map(|c| (c / len) as f32)
    } else {
        [0.0; 3]
    }
}

pub fn stl_triangles<'a>(meshes: impl IntoIterator<Item = &'a Mesh>) -> Vec<StlTriangle> {
    meshes
        .into_iter()
        .flat_map(|m| (0..m.triangles.len()).map(move |t| StlTriangle::from_positions(m.triangle_positions(t))))
        .collect()
}

pub fn write_stl<W: Write>(out: &mut W, triangles: &[StlTriangle]) -> io::Result<u64> {
    let count = u32::try_from(triangles.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "too many triangles for STL"))?;
    let mut header = [0u8; STL_HEADER_LEN];
    let label = b"binary STL terrain export";
    header[..label.len()].copy_from_slice(label);
    out.write_all(&header)?;
    out.write_all(&count.to_le_bytes())?;
    let mut record = [0u8; STL_TRIANGLE_LEN];
    for tri in triangles {
        let floats = tri.normal.iter().chain(tri.vertices.iter().flatten());
        for (slot, f) in record.chunks_exact_mut(4).zip(floats) {
            slot.copy_from_slice(&f.to_le_bytes());
        }
        record[48..].copy_from_slice(&0u16.to_le_bytes());
        out.write_all(&record)?;
    }
    Ok((STL_HEADER_LEN + 4 + triangles.len() * STL_TRIANGLE_LEN) as u64)
}

pub fn read_stl<R: Read>(input: &mut R) -> Result<Vec<StlTriangle>, TerrainError> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| TerrainError::Stl(e.to_string()))?;
    if bytes.len() < STL_HEADER_LEN + 4 {
        return Err(TerrainError::Stl("file shorter than the 84-byte preamble".into()));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let body = &bytes[84..];
    if body.len() != count * STL_TRIANGLE_LEN {
        return Err(TerrainError::Stl(format!(
            "{count} triangles declared but {} body bytes present",
            body.len()
        )));
    }
    Ok(body
        .chunks_exact(STL_TRIANGLE_LEN)
        .map(|rec| {
            let f = |i: usize| f32::from_le_bytes(rec[i * 4..i * 4 + 4].try_into().unwrap());
            StlTriangle {
                normal: [f(0), f(1), f(2)],
                vertices: [[f(3), f(4), f(5)], [f(6), f(7), f(8)], [f(9), f(10), f(11)]],
            }
        })
        .collect())
}

/// Writes every triangle of `meshes` into one binary STL file.
pub fn export_stl<'a>(meshes: impl IntoIterator<Item = &'a Mesh>, path: &Path) -> Result<u64, TerrainError> {
    let triangles = stl_triangles(meshes);
    let write_err = |source| TerrainError::Write {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(write_err)?;
    let mut out = BufWriter::new(file);
    let written = write_stl(&mut out, &triangles).map_err(write_err)?;
    out.flush().map_err(write_err)?;
    Ok(written)
}

pub fn import_stl(path: &Path) -> Result<Vec<StlTriangle>, TerrainError> {
    let mut file = File::open(path).map_err(|source| TerrainError::Read {
        path: path.to_owned(),
        source,
    })?;
    read_stl(&mut file)
}
