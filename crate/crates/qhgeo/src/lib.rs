//! Planar quasihyperbolic geometry toolkit.
//!
//! The crate measures how strongly a planar domain distorts distance when
//! lengths are weighted by the reciprocal of the distance to the boundary.
//! It provides:
//!
//! * exact distance-ratio metrics and closed-form references on model
//!   domains ([`metrics`]),
//! * a catalog of benchmark domains including a comb with geometrically
//!   shrinking teeth ([`domains`]),
//! * a multi-level grid approximation of weighted geodesics ([`qhgrid`]),
//! * estimators for uniformity-type constants and distortion profiles
//!   ([`analysis`]),
//! * SVG rendering of domains and geodesics ([`render`]).

pub mod analysis;
pub mod domains;
pub mod geometry;
pub mod metrics;
pub mod qhgrid;
pub mod render;

pub use geometry::{
    BoundaryElement, Domain, DomainSpec, GeoError, Point, PointClass, PolyPath, Primitive, Rect,
    Region, Truncation,
};
