//! Domains: region tests from closed primitives plus an explicit boundary
//! chain, with exact distance-to-boundary.

use serde::{Deserialize, Serialize};

use super::{BoundaryElement, GeoError, Point, Rect, BOUNDARY_EPS_REL};

/// A closed primitive region used by the inside test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Rectangle { x0: f64, y0: f64, x1: f64, y1: f64 },
    Disc { center: Point, radius: f64 },
    /// Half disc: the part of the disc on the side of the diameter that the
    /// unit vector at `axis_angle` points into. The diameter side is closed,
    /// so a semi-disc capping a rectangle stays connected to it.
    SemiDisc { center: Point, radius: f64, axis_angle: f64 },
    /// Convex polygon, vertices in counterclockwise order.
    Polygon { vertices: Vec<Point> },
    /// Closed half plane `(p - anchor) . normal >= 0`.
    HalfPlane { anchor: Point, normal: Point },
}

impl Primitive {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Primitive::Rectangle { x0, y0, x1, y1 } => {
                p.x >= *x0 && p.x <= *x1 && p.y >= *y0 && p.y <= *y1
            }
            Primitive::Disc { center, radius } => p.dist(*center) <= *radius,
            Primitive::SemiDisc { center, radius, axis_angle } => {
                let n = Point::new(axis_angle.cos(), axis_angle.sin());
                p.dist(*center) <= *radius && p.sub(*center).dot(n) >= 0.0
            }
            Primitive::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    b.sub(a).cross(p.sub(a)) >= 0.0
                })
            }
            Primitive::HalfPlane { anchor, normal } => p.sub(*anchor).dot(*normal) >= 0.0,
        }
    }

    /// Bounding box; `None` when unbounded.
    pub fn bbox(&self) -> Option<Rect> {
        match self {
            Primitive::Rectangle { x0, y0, x1, y1 } => Some(Rect::new(*x0, *y0, *x1, *y1)),
            Primitive::Disc { center, radius } => Some(Rect::new(
                center.x - radius,
                center.y - radius,
                center.x + radius,
                center.y + radius,
            )),
            Primitive::SemiDisc { center, radius, .. } => Some(Rect::new(
                center.x - radius,
                center.y - radius,
                center.x + radius,
                center.y + radius,
            )),
            Primitive::Polygon { vertices } => Rect::from_points(vertices.iter().copied()),
            Primitive::HalfPlane { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let ok = match self {
            Primitive::Rectangle { x0, y0, x1, y1 } => {
                x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite() && x0 < x1 && y0 < y1
            }
            Primitive::Disc { radius, .. } | Primitive::SemiDisc { radius, .. } => {
                *radius > 0.0 && radius.is_finite()
            }
            Primitive::Polygon { vertices } => {
                vertices.len() >= 3 && {
                    // Convex and counterclockwise: every turn is a left turn.
                    let n = vertices.len();
                    (0..n).all(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        let c = vertices[(i + 2) % n];
                        b.sub(a).cross(c.sub(b)) > 0.0
                    })
                }
            }
            Primitive::HalfPlane { normal, .. } => normal.norm() > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(GeoError::Invalid(format!("bad primitive: {self:?}")))
        }
    }
}

/// How the primitive list defines the interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Interior of the union of the primitives.
    Union,
    /// Complement of the closed union (an unbounded domain).
    Complement,
}

/// Clip region for discretization of unbounded domains. Never affects
/// classification or boundary distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    None,
    Box { rect: Rect },
    Annulus { center: Point, r_in: f64, r_out: f64 },
}

impl Truncation {
    pub fn admits(&self, p: Point) -> bool {
        match self {
            Truncation::None => true,
            Truncation::Box { rect } => rect.contains(p),
            Truncation::Annulus { center, r_in, r_out } => {
                let r = p.dist(*center);
                r >= *r_in && r <= *r_out
            }
        }
    }

    pub fn enclosing_rect(&self) -> Option<Rect> {
        match self {
            Truncation::None => None,
            Truncation::Box { rect } => Some(*rect),
            Truncation::Annulus { center, r_out, .. } => Some(Rect::new(
                center.x - r_out,
                center.y - r_out,
                center.x + r_out,
                center.y + r_out,
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Inside,
    Boundary,
    Outside,
}

/// Serializable description of a domain; the JSON interchange format is
/// exactly this struct.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    pub region: Region,
    pub primitives: Vec<Primitive>,
    pub boundary: Vec<BoundaryElement>,
    #[serde(default = "default_truncation")]
    pub truncation: Truncation,
}

fn default_truncation() -> Truncation {
    Truncation::None
}

/// An open planar domain.
///
/// Constructors are responsible for supplying a boundary chain that is
/// exactly the topological boundary of the region; there is no boolean
/// union engine recovering one from the primitives.
#[derive(Debug, Clone)]
pub struct Domain {
    name: String,
    region: Region,
    primitives: Vec<Primitive>,
    boundary: Vec<BoundaryElement>,
    truncation: Truncation,
    bbox: Rect,
    eps_boundary: f64,
    /// adjacency[i] lists elements sharing a chain endpoint with element i.
    adjacency: Vec<Vec<usize>>,
}

impl Domain {
    pub fn new(
        name: impl Into<String>,
        region: Region,
        primitives: Vec<Primitive>,
        boundary: Vec<BoundaryElement>,
        truncation: Truncation,
    ) -> Result<Self, GeoError> {
        let name = name.into();
        if boundary.is_empty() {
            return Err(GeoError::Invalid("boundary chain must be nonempty".into()));
        }
        for p in &primitives {
            p.validate()?;
        }
        let bbox = match truncation.enclosing_rect() {
            Some(r) => r,
            None => {
                let mut acc: Option<Rect> = None;
                for p in &primitives {
                    let b = p.bbox().ok_or_else(|| {
                        GeoError::Invalid("unbounded primitive requires a truncation".into())
                    })?;
                    acc = Some(match acc {
                        Some(a) => a.union(&b),
                        None => b,
                    });
                }
                acc.ok_or_else(|| GeoError::Invalid("bounded domain needs primitives".into()))?
            }
        };
        let eps_boundary = BOUNDARY_EPS_REL * bbox.diagonal();
        let adjacency = chain_adjacency(&boundary, eps_boundary);
        Ok(Domain { name, region, primitives, boundary, truncation, bbox, eps_boundary, adjacency })
    }

    pub fn from_spec(spec: DomainSpec) -> Result<Self, GeoError> {
        Domain::new(spec.name, spec.region, spec.primitives, spec.boundary, spec.truncation)
    }

    pub fn to_spec(&self) -> DomainSpec {
        DomainSpec {
            name: self.name.clone(),
            region: self.region,
            primitives: self.primitives.clone(),
            boundary: self.boundary.clone(),
            truncation: self.truncation,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn boundary(&self) -> &[BoundaryElement] {
        &self.boundary
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Bounding box of the region for bounded domains, of the truncation
    /// for unbounded ones.
    pub fn bbox(&self) -> Rect {
        self.bbox
    }

    /// Absolute distance below which a point counts as on the boundary.
    pub fn boundary_eps(&self) -> f64 {
        self.eps_boundary
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.truncation, Truncation::None)
    }

    /// Region membership ignoring the boundary band: is `p` in the closed
    /// union (or its complement)?
    pub fn region_contains(&self, p: Point) -> bool {
        let in_union = self.primitives.iter().any(|prim| prim.contains(p));
        match self.region {
            Region::Union => in_union,
            Region::Complement => !in_union,
        }
    }

    /// Exact distance from `p` to the boundary chain (no interiority
    /// requirement).
    pub fn chain_distance(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for e in &self.boundary {
            best = best.min(e.distance(p));
        }
        best
    }

    pub fn classify(&self, p: Point) -> PointClass {
        if self.chain_distance(p) < self.eps_boundary {
            PointClass::Boundary
        } else if self.region_contains(p) {
            PointClass::Inside
        } else {
            PointClass::Outside
        }
    }

    pub fn is_inside(&self, p: Point) -> bool {
        self.classify(p) == PointClass::Inside
    }

    /// Distance from an interior point to the boundary.
    pub fn boundary_distance(&self, p: Point) -> Result<f64, GeoError> {
        let d = self.chain_distance(p);
        if d < self.eps_boundary || !self.region_contains(p) {
            return Err(GeoError::PointNotInterior(p.x, p.y));
        }
        Ok(d)
    }

    /// Nearest boundary point and the distance to it, for an interior point.
    pub fn nearest_boundary(&self, p: Point) -> Result<(f64, Point), GeoError> {
        let mut best = f64::INFINITY;
        let mut nearest = p;
        for e in &self.boundary {
            let d = e.distance(p);
            if d < best {
                best = d;
                nearest = e.nearest(p);
            }
        }
        if best < self.eps_boundary || !self.region_contains(p) {
            return Err(GeoError::PointNotInterior(p.x, p.y));
        }
        Ok((best, nearest))
    }

    /// Does the open segment `a..b` stay clear of every boundary element?
    /// Endpoints are assumed interior; the test is a crossing test against
    /// the chain, which is complete for regions bounded by the chain.
    pub fn segment_clear(&self, a: Point, b: Point) -> bool {
        let tol = self.eps_boundary * 1e-3;
        !self.boundary.iter().any(|e| e.segment_hits(a, b, tol))
    }

    /// `segment_clear` with the ball shortcut: a segment shorter than either
    /// endpoint's boundary distance lies in an interior ball.
    pub fn segment_clear_with(&self, a: Point, b: Point, delta_a: f64, delta_b: f64) -> bool {
        let len = a.dist(b);
        if len <= delta_a.max(delta_b) {
            return true;
        }
        self.segment_clear(a, b)
    }

    /// Indices of elements adjacent (sharing a chain endpoint) to element `i`.
    pub fn element_adjacency(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// True when at least two non-adjacent boundary elements pass within
    /// `radius` of `p`: the domain is locally a thin feature (slot, thin
    /// tooth, doubled slit) that grid refinement must resolve beyond the
    /// plain near-wall depth.
    pub fn thin_feature(&self, p: Point, radius: f64) -> bool {
        let mut near: Vec<usize> = Vec::new();
        for (i, e) in self.boundary.iter().enumerate() {
            if e.distance(p) <= radius {
                near.push(i);
            }
        }
        if near.len() < 2 {
            return false;
        }
        for (ii, &i) in near.iter().enumerate() {
            for &j in &near[ii + 1..] {
                if !self.adjacency[i].contains(&j) {
                    return true;
                }
            }
        }
        false
    }

    /// Sanity check linking the chain to the region: every element must
    /// touch the closed region (elements strictly inside, like slits, are
    /// legitimate; elements floating outside it are modeling errors).
    pub fn validate_consistency(&self) -> Result<(), GeoError> {
        for e in &self.boundary {
            let m = e.midpoint();
            let r = self.eps_boundary * 4.0;
            let near_region = self.region_contains(m)
                || (0..8).any(|k| {
                    let th = k as f64 * std::f64::consts::FRAC_PI_4;
                    self.region_contains(Point::new(m.x + r * th.cos(), m.y + r * th.sin()))
                });
            if !near_region {
                return Err(GeoError::Invalid(format!(
                    "boundary element near ({}, {}) does not touch the region",
                    m.x, m.y
                )));
            }
        }
        Ok(())
    }
}

fn chain_adjacency(boundary: &[BoundaryElement], eps: f64) -> Vec<Vec<usize>> {
    let endpoints: Vec<Vec<Point>> = boundary.iter().map(|e| e.chain_endpoints()).collect();
    let mut adj = vec![Vec::new(); boundary.len()];
    for i in 0..boundary.len() {
        for j in (i + 1)..boundary.len() {
            let shared = endpoints[i]
                .iter()
                .any(|p| endpoints[j].iter().any(|q| p.dist(*q) <= eps * 10.0));
            if shared {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}
