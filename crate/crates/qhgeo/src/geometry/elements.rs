//! Boundary chain elements and the exact distance / crossing predicates
//! the rest of the crate relies on.

use serde::{Deserialize, Serialize};

use super::Point;

const TAU: f64 = std::f64::consts::TAU;

/// One element of a domain's boundary chain.
///
/// `Point` covers boundaries that degenerate to isolated points (the
/// punctured plane); segments and arcs cover everything polygonal or
/// circular. Arc angles are in radians; the arc sweeps from `start_angle`
/// to `end_angle` in the direction given by `orientation`. A sweep of a
/// full turn (or more) is treated as the whole circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryElement {
    Segment {
        a: Point,
        b: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        orientation: Orientation,
    },
    Point {
        at: Point,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Ccw,
    Cw,
}

impl BoundaryElement {
    pub fn segment(a: Point, b: Point) -> Self {
        assert!(a.dist(b) > 0.0, "segment endpoints must be distinct");
        BoundaryElement::Segment { a, b }
    }

    pub fn arc_ccw(center: Point, radius: f64, start_angle: f64, end_angle: f64) -> Self {
        assert!(radius > 0.0 && radius.is_finite(), "arc radius must be positive");
        BoundaryElement::Arc { center, radius, start_angle, end_angle, orientation: Orientation::Ccw }
    }

    pub fn full_circle(center: Point, radius: f64) -> Self {
        Self::arc_ccw(center, radius, 0.0, TAU)
    }

    pub fn point(at: Point) -> Self {
        BoundaryElement::Point { at }
    }

    /// Counterclockwise span `(start, sweep)` with `sweep` in `(0, TAU]`.
    pub fn ccw_span(&self) -> Option<(f64, f64)> {
        match *self {
            BoundaryElement::Arc { start_angle, end_angle, orientation, .. } => {
                let (from, to) = match orientation {
                    Orientation::Ccw => (start_angle, end_angle),
                    Orientation::Cw => (end_angle, start_angle),
                };
                let mut sweep = (to - from).rem_euclid(TAU);
                if sweep == 0.0 && (to - from).abs() > 0.0 {
                    sweep = TAU;
                }
                Some((from, sweep))
            }
            _ => None,
        }
    }

    fn angle_in_span(&self, theta: f64) -> bool {
        let (from, sweep) = self.ccw_span().expect("span of non-arc");
        if sweep >= TAU {
            return true;
        }
        (theta - from).rem_euclid(TAU) <= sweep
    }

    /// Exact Euclidean distance from `p` to this element.
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            BoundaryElement::Segment { a, b } => point_segment_distance(p, a, b),
            BoundaryElement::Arc { center, radius, .. } => {
                let d = p.sub(center);
                let dn = d.norm();
                let theta = d.y.atan2(d.x);
                if self.angle_in_span(theta) {
                    (dn - radius).abs()
                } else {
                    let (e0, e1) = self.arc_endpoints();
                    p.dist(e0).min(p.dist(e1))
                }
            }
            BoundaryElement::Point { at } => p.dist(at),
        }
    }

    /// Nearest point of this element to `p`.
    pub fn nearest(&self, p: Point) -> Point {
        match *self {
            BoundaryElement::Segment { a, b } => {
                let ab = b.sub(a);
                let t = (p.sub(a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
                a.lerp(b, t)
            }
            BoundaryElement::Arc { center, radius, .. } => {
                let d = p.sub(center);
                let dn = d.norm();
                let theta = d.y.atan2(d.x);
                if self.angle_in_span(theta) && dn > 0.0 {
                    center.add(d.scale(radius / dn))
                } else if dn == 0.0 {
                    // Center of the circle: every arc point is nearest.
                    let (e0, _) = self.arc_endpoints();
                    e0
                } else {
                    let (e0, e1) = self.arc_endpoints();
                    if p.dist(e0) <= p.dist(e1) {
                        e0
                    } else {
                        e1
                    }
                }
            }
            BoundaryElement::Point { at } => at,
        }
    }

    pub fn arc_endpoints(&self) -> (Point, Point) {
        match *self {
            BoundaryElement::Arc { center, radius, start_angle, end_angle, .. } => (
                Point::new(center.x + radius * start_angle.cos(), center.y + radius * start_angle.sin()),
                Point::new(center.x + radius * end_angle.cos(), center.y + radius * end_angle.sin()),
            ),
            _ => panic!("arc_endpoints of non-arc"),
        }
    }

    /// A representative interior point of the element (used by validation
    /// sampling: it must classify as boundary).
    pub fn midpoint(&self) -> Point {
        match *self {
            BoundaryElement::Segment { a, b } => a.lerp(b, 0.5),
            BoundaryElement::Arc { center, radius, .. } => {
                let (from, sweep) = self.ccw_span().unwrap();
                let theta = from + 0.5 * sweep;
                Point::new(center.x + radius * theta.cos(), center.y + radius * theta.sin())
            }
            BoundaryElement::Point { at } => at,
        }
    }

    /// Endpoints used for chain-adjacency detection. A full circle or an
    /// isolated point has none.
    pub fn chain_endpoints(&self) -> Vec<Point> {
        match *self {
            BoundaryElement::Segment { a, b } => vec![a, b],
            BoundaryElement::Arc { .. } => {
                let (_, sweep) = self.ccw_span().unwrap();
                if sweep >= TAU {
                    vec![]
                } else {
                    let (e0, e1) = self.arc_endpoints();
                    vec![e0, e1]
                }
            }
            BoundaryElement::Point { .. } => vec![],
        }
    }

    /// Does the segment `a..b` touch or cross this element? Used to reject
    /// graph edges that would jump over a wall or a slit. Tolerance `tol`
    /// is an absolute length; grazing within `tol` counts as a hit.
    pub fn segment_hits(&self, a: Point, b: Point, tol: f64) -> bool {
        match *self {
            BoundaryElement::Segment { a: e0, b: e1 } => segments_interfere(a, b, e0, e1, tol),
            BoundaryElement::Arc { center, radius, .. } => {
                self.segment_hits_arc(a, b, center, radius, tol)
            }
            BoundaryElement::Point { at } => point_segment_distance(at, a, b) <= tol,
        }
    }

    fn segment_hits_arc(&self, a: Point, b: Point, center: Point, radius: f64, tol: f64) -> bool {
        // Quick reject: distance from the center to the segment outside
        // the annulus [radius - tol, radius + tol] on the whole segment.
        let dmin = point_segment_distance(center, a, b);
        let dmax = center.dist(a).max(center.dist(b));
        if dmin > radius + tol || dmax < radius - tol {
            return false;
        }
        // Solve |a + t (b - a) - center|^2 = radius^2 for t in [0, 1].
        let d = b.sub(a);
        let f = a.sub(center);
        let qa = d.dot(d);
        if qa == 0.0 {
            return (f.norm() - radius).abs() <= tol && self.angle_in_span(f.y.atan2(f.x));
        }
        let qb = 2.0 * f.dot(d);
        let qc = f.dot(f) - radius * radius;
        let disc = qb * qb - 4.0 * qa * qc;
        // Inflate the discriminant test so tangential grazing is caught.
        let len = qa.sqrt();
        let graze = 2.0 * radius * tol;
        if disc < -4.0 * qa * graze {
            return false;
        }
        let sq = disc.max(0.0).sqrt();
        let t_eps = tol / len;
        for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
            if t < -t_eps || t > 1.0 + t_eps {
                continue;
            }
            let p = a.lerp(b, t.clamp(0.0, 1.0));
            let v = p.sub(center);
            if self.angle_in_span(v.y.atan2(v.x)) {
                return true;
            }
        }
        // Near-tangent case: the closest segment point may sit inside the
        // annulus without a root landing in span; check it directly.
        if (dmin - radius).abs() <= tol {
            let ab = b.sub(a);
            let t = (center.sub(a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            let p = a.lerp(b, t);
            let v = p.sub(center);
            if v.norm() > 0.0 && self.angle_in_span(v.y.atan2(v.x)) {
                return true;
            }
        }
        false
    }
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let denom = ab.dot(ab);
    if denom == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / denom).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

/// Minimum distance between two segments.
pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_cross_properly(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

fn segments_cross_properly(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = b.sub(a).cross(c.sub(a));
    let d2 = b.sub(a).cross(d.sub(a));
    let d3 = d.sub(c).cross(a.sub(c));
    let d4 = d.sub(c).cross(b.sub(c));
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != d2 && d3 != d4
}

/// True when segment `a..b` crosses, touches, or comes within `tol` of
/// segment `c..d`.
pub fn segments_interfere(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    segment_segment_distance(a, b, c, d) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn segment_distance_perpendicular_and_endpoint() {
        let e = BoundaryElement::segment(Point::new(0.0, 0.0), Point::new(4.0, 0.0));
        assert_eq!(e.distance(Point::new(2.0, 3.0)), 3.0);
        assert_eq!(e.distance(Point::new(-3.0, 4.0)), 5.0);
        assert_eq!(e.nearest(Point::new(2.0, 3.0)), Point::new(2.0, 0.0));
        assert_eq!(e.nearest(Point::new(-3.0, 4.0)), Point::new(0.0, 0.0));
    }

    #[test]
    fn arc_distance_in_and_out_of_span() {
        // Upper half circle of radius 2 about the origin.
        let e = BoundaryElement::arc_ccw(Point::new(0.0, 0.0), 2.0, 0.0, std::f64::consts::PI);
        assert_relative_eq!(e.distance(Point::new(0.0, 3.0)), 1.0);
        assert_relative_eq!(e.distance(Point::new(0.0, 1.0)), 1.0);
        // Below the diameter the nearest arc points are its endpoints.
        assert_relative_eq!(e.distance(Point::new(0.0, -1.0)), 5.0_f64.sqrt());
        assert_relative_eq!(e.distance(Point::new(5.0, -4.0)), 5.0);
    }

    #[test]
    fn full_circle_distance() {
        let e = BoundaryElement::full_circle(Point::new(1.0, 0.0), 1.0);
        assert_relative_eq!(e.distance(Point::new(1.0, 0.0)), 1.0);
        assert_relative_eq!(e.distance(Point::new(4.0, 0.0)), 2.0);
        assert_relative_eq!(e.distance(Point::new(1.0, 0.5)), 0.5);
    }

    #[test]
    fn point_element_distance() {
        let e = BoundaryElement::point(Point::new(0.0, 0.0));
        assert_eq!(e.distance(Point::new(3.0, 4.0)), 5.0);
        assert_eq!(e.nearest(Point::new(3.0, 4.0)), Point::new(0.0, 0.0));
    }

    #[test]
    fn segment_crossing_detection() {
        let wall = BoundaryElement::segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        // Proper crossing.
        assert!(wall.segment_hits(Point::new(0.5, -0.1), Point::new(0.5, 0.1), 1e-12));
        // Parallel pass at clear distance.
        assert!(!wall.segment_hits(Point::new(0.0, 0.01), Point::new(1.0, 0.01), 1e-12));
        // Collinear overlap rides on the wall.
        assert!(wall.segment_hits(Point::new(0.2, 0.0), Point::new(0.8, 0.0), 1e-12));
        // Around the tip is fine.
        assert!(!wall.segment_hits(Point::new(-0.05, -0.1), Point::new(-0.05, 0.1), 1e-12));
    }

    #[test]
    fn arc_crossing_detection() {
        let circle = BoundaryElement::full_circle(Point::new(0.0, 0.0), 1.0);
        assert!(circle.segment_hits(Point::new(0.0, 0.0), Point::new(2.0, 0.0), 1e-12));
        assert!(!circle.segment_hits(Point::new(-0.5, 0.0), Point::new(0.5, 0.0), 1e-12));
        // Tangent line grazing the top.
        assert!(circle.segment_hits(Point::new(-1.0, 1.0), Point::new(1.0, 1.0), 1e-9));
        // A chord strictly inside the disc touches nothing.
        assert!(!circle.segment_hits(Point::new(-0.9, -0.3), Point::new(0.9, -0.3), 1e-12));
        // Half-arc selectivity: a horizontal line through the disc crosses
        // the circle on one half only.
        let upper =
            BoundaryElement::arc_ccw(Point::new(0.0, 0.0), 1.0, 0.0, std::f64::consts::PI);
        let lower = BoundaryElement::arc_ccw(
            Point::new(0.0, 0.0),
            1.0,
            std::f64::consts::PI,
            std::f64::consts::TAU,
        );
        let (h0, h1) = (Point::new(-2.0, 0.3), Point::new(2.0, 0.3));
        let (l0, l1) = (Point::new(-2.0, -0.3), Point::new(2.0, -0.3));
        assert!(upper.segment_hits(h0, h1, 1e-12));
        assert!(!lower.segment_hits(h0, h1, 1e-12));
        assert!(lower.segment_hits(l0, l1, 1e-12));
        assert!(!upper.segment_hits(l0, l1, 1e-12));
    }

    #[test]
    fn cw_arc_matches_reversed_ccw() {
        let ccw = BoundaryElement::arc_ccw(Point::new(0.0, 0.0), 1.0, 0.0, std::f64::consts::PI);
        let cw = BoundaryElement::Arc {
            center: Point::new(0.0, 0.0),
            radius: 1.0,
            start_angle: std::f64::consts::PI,
            end_angle: 0.0,
            orientation: Orientation::Cw,
        };
        for p in [Point::new(0.3, 0.9), Point::new(0.0, -2.0), Point::new(2.0, 2.0)] {
            assert_relative_eq!(ccw.distance(p), cw.distance(p));
        }
    }
}
