//! Geodetic coordinates and the local metric scene frame.
//!
//! The scene uses an equirectangular local tangent plane anchored at the
//! southwest corner of the bounds: `x` grows east, `y` grows north and `z`
//! is height above the ground datum, all in meters.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Latitude,
    Longitude,
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Latitude => "latitude",
            Axis::Longitude => "longitude",
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Min,
    Max,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Min => "minimum",
            Side::Max => "maximum",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("{axis} {value} violates the {side} bound {limit}")]
    OutOfBounds {
        axis: Axis,
        side: Side,
        value: f64,
        limit: f64,
    },
}

/// Closed latitude/longitude rectangle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBounds {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl GeoBounds {
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self, GeoError> {
        let bounds = GeoBounds {
            min_lat,
            min_lon,
            max_lat,
            max_lon,
        };
        bounds.validate()?;
        Ok(bounds)
    }

    /// Builds bounds from two opposite corners given in any order.
    pub fn from_corners(a: (f64, f64), b: (f64, f64)) -> Result<Self, GeoError> {
        Self::new(a.0.min(b.0), a.1.min(b.1), a.0.max(b.0), a.1.max(b.1))
    }

    /// The MIT campus region in Cambridge, MA.
    pub fn cambridge_campus() -> Self {
        GeoBounds {
            min_lat: 42.350,
            min_lon: -71.099,
            max_lat: 42.357,
            max_lon: -71.090,
        }
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let all = [self.min_lat, self.min_lon, self.max_lat, self.max_lon];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GeoError::InvalidBounds("non-finite coordinate".into()));
        }
        if !(-90.0..=90.0).contains(&self.min_lat) || !(-90.0..=90.0).contains(&self.max_lat) {
            return Err(GeoError::InvalidBounds("latitude outside [-90, 90]".into()));
        }
        if !(-180.0..=180.0).contains(&self.min_lon) || !(-180.0..=180.0).contains(&self.max_lon) {
            return Err(GeoError::InvalidBounds("longitude outside [-180, 180]".into()));
        }
        if self.min_lat >= self.max_lat {
            return Err(GeoError::InvalidBounds("min_lat must be below max_lat".into()));
        }
        if self.min_lon >= self.max_lon {
            return Err(GeoError::InvalidBounds("min_lon must be below max_lon".into()));
        }
        Ok(())
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.min_lat..=self.max_lat).contains(&lat) && (self.min_lon..=self.max_lon).contains(&lon)
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.min_lat + self.max_lat) / 2.0,
            (self.min_lon + self.max_lon) / 2.0,
        )
    }

    fn check(&self, lat: f64, lon: f64) -> Result<(), GeoError> {
        check_axis(Axis::Latitude, lat, self.min_lat, self.max_lat)?;
        check_axis(Axis::Longitude, lon, self.min_lon, self.max_lon)
    }
}

fn check_axis(axis: Axis, value: f64, min: f64, max: f64) -> Result<(), GeoError> {
    // NaN fails both comparisons, so test the accepted range positively.
    if value >= min && value <= max {
        return Ok(());
    }
    let (side, limit) = if value > max {
        (Side::Max, max)
    } else {
        (Side::Min, min)
    };
    Err(GeoError::OutOfBounds {
        axis,
        side,
        value,
        limit,
    })
}

/// Metric extents `(width_m, depth_m)` of the bounds.
///
/// Depth is the meridian arc length; width is the parallel arc length scaled
/// by the cosine of the mean latitude.
pub fn scene_dimensions(bounds: &GeoBounds) -> (f64, f64) {
    let meters_per_degree = EARTH_RADIUS_M.to_radians();
    let mean_lat = (bounds.min_lat + bounds.max_lat) / 2.0;
    let depth = (bounds.max_lat - bounds.min_lat) * meters_per_degree;
    let width = (bounds.max_lon - bounds.min_lon) * meters_per_degree * mean_lat.to_radians().cos();
    (width, depth)
}

/// A position in the scene, in meters from the southwest corner.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ScenePoint {
    pub const ORIGIN: ScenePoint = ScenePoint {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        ScenePoint { x, y, z }
    }
}

/// Bounds together with their metric size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneFrame {
    pub bounds: GeoBounds,
    pub width_m: f64,
    pub depth_m: f64,
}

impl SceneFrame {
    pub fn new(bounds: GeoBounds) -> Result<Self, GeoError> {
        bounds.validate()?;
        let (width_m, depth_m) = scene_dimensions(&bounds);
        Ok(SceneFrame {
            bounds,
            width_m,
            depth_m,
        })
    }

    /// Maps a geodetic position onto the ground plane (`z = 0`).
    pub fn project(&self, lat: f64, lon: f64) -> Result<ScenePoint, GeoError> {
        self.bounds.check(lat, lon)?;
        let b = &self.bounds;
        Ok(ScenePoint {
            x: self.width_m * ((lon - b.min_lon) / (b.max_lon - b.min_lon)),
            y: self.depth_m * ((lat - b.min_lat) / (b.max_lat - b.min_lat)),
            z: 0.0,
        })
    }

    /// Inverse of [`SceneFrame::project`]; returns `(lat, lon)`.
    pub fn unproject(&self, x: f64, y: f64) -> Result<(f64, f64), GeoError> {
        check_axis(Axis::X, x, 0.0, self.width_m)?;
        check_axis(Axis::Y, y, 0.0, self.depth_m)?;
        let b = &self.bounds;
        // Far edges are pinned so corners round-trip bit-for-bit.
        let lat = if y == self.depth_m {
            b.max_lat
        } else {
            b.min_lat + (y / self.depth_m) * (b.max_lat - b.min_lat)
        };
        let lon = if x == self.width_m {
            b.max_lon
        } else {
            b.min_lon + (x / self.width_m) * (b.max_lon - b.min_lon)
        };
        Ok((lat, lon))
    }

    pub fn center(&self) -> ScenePoint {
        ScenePoint::new(self.width_m / 2.0, self.depth_m / 2.0, 0.0)
    }
}
