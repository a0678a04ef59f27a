//! Polygonal paths, the output form of grid geodesics.

use serde::{Deserialize, Serialize};

use super::{GeoError, Point};

/// A polyline. A single-vertex path is allowed and has length zero; it is
/// the degenerate geodesic from a point to itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPath {
    vertices: Vec<Point>,
}

impl PolyPath {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeoError> {
        if vertices.is_empty() {
            return Err(GeoError::Invalid("path needs at least one vertex".into()));
        }
        Ok(PolyPath { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn first(&self) -> Point {
        self.vertices[0]
    }

    pub fn last(&self) -> Point {
        *self.vertices.last().unwrap()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Euclidean length.
    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    /// Cumulative Euclidean length at each vertex; starts at 0.0, has one
    /// entry per vertex.
    pub fn prefix_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.vertices.len());
        let mut acc = 0.0;
        out.push(0.0);
        for (a, b) in self.segments() {
            acc += a.dist(b);
            out.push(acc);
        }
        out
    }

    pub fn reversed(&self) -> PolyPath {
        let mut v = self.vertices.clone();
        v.reverse();
        PolyPath { vertices: v }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn length_and_prefixes() {
        let p = PolyPath::new(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 4.0),
        ])
        .unwrap();
        assert_relative_eq!(p.length(), 7.0);
        let pre = p.prefix_lengths();
        assert_eq!(pre.len(), 3);
        assert_relative_eq!(pre[1], 3.0);
        assert_relative_eq!(pre[2], 7.0);
    }

    #[test]
    fn degenerate_single_vertex() {
        let p = PolyPath::new(vec![Point::new(1.0, 2.0)]).unwrap();
        assert_eq!(p.length(), 0.0);
        assert_eq!(p.first(), p.last());
        assert_eq!(p.prefix_lengths(), vec![0.0]);
    }

    #[test]
    fn empty_rejected() {
        assert!(PolyPath::new(vec![]).is_err());
    }
}
