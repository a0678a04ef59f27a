//! Planar geometry kernel: points, boundary elements, domains, polyline paths.
//!
//! A domain is an open connected subset of the plane described two ways at
//! once: a region test built from closed primitives (union or complement of
//! a union) and an explicit boundary chain of segments, circular arcs and
//! isolated points. The chain is the authority for distances: the distance
//! from an interior point to the boundary is the exact minimum over chain
//! elements, never a raster approximation.

mod domain;
mod elements;
mod path;

pub use domain::{Domain, DomainSpec, PointClass, Primitive, Region, Truncation};
pub use elements::{BoundaryElement, Orientation};
pub use path::PolyPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative scale, multiplied by the bounding-box diagonal, below which a
/// point is classified as lying on the boundary.
pub const BOUNDARY_EPS_REL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("point ({0}, {1}) is not interior to the domain")]
    PointNotInterior(f64, f64),
    #[error("point ({0}, {1}) is not a vertex of the path")]
    VertexNotOnPath(f64, f64),
    #[error("invalid geometry: {0}")]
    Invalid(String),
}

/// A point in the plane. Coordinates are always finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "point coordinates must be finite");
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Signed area of the parallelogram spanned by `self` and `other`.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn add(self, other: Point) -> Point {
        Point { x: self.x + other.x, y: self.y + other.y }
    }

    pub fn sub(self, other: Point) -> Point {
        Point { x: self.x - other.x, y: self.y - other.y }
    }

    pub fn scale(self, s: f64) -> Point {
        Point { x: self.x * s, y: self.y * s }
    }

    /// Point at parameter `t` on the segment from `self` to `other`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point {
            x: self.x + t * (other.x - self.x),
            y: self.y + t * (other.y - self.y),
        }
    }
}

/// Axis-aligned rectangle with `x0 < x1` and `y0 < y1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        assert!(
            x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite() && x0 < x1 && y0 < y1,
            "rectangle must have finite corners with positive extent"
        );
        Rect { x0, y0, x1, y1 }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn diagonal(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> Point {
        Point { x: 0.5 * (self.x0 + self.x1), y: 0.5 * (self.y0 + self.y1) }
    }

    pub fn inflate(&self, m: f64) -> Rect {
        Rect::new(self.x0 - m, self.y0 - m, self.x1 + m, self.y1 + m)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.x0.min(other.x0),
            self.y0.min(other.y0),
            self.x1.max(other.x1),
            self.y1.max(other.y1),
        )
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        if x0 < x1 && y0 < y1 {
            Some(Rect::new(x0, y0, x1, y1))
        } else {
            None
        }
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(pts: I) -> Option<Rect> {
        let mut it = pts.into_iter();
        let first = it.next()?;
        let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
        for p in it {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        // Degenerate collections get a tiny positive extent so the result
        // is a valid rectangle.
        let pad = 1e-12 + 1e-12 * (x1.abs() + y1.abs());
        Some(Rect::new(x0 - pad, y0 - pad, x1 + pad, y1 + pad))
    }
}
