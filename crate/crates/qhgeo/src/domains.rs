//! Catalog of benchmark domains: unit disc, upper half-plane, punctured
//! plane, slit disc, and a comb with geometrically shrinking capped teeth
//! together with its exterior complement.

use thiserror::Error;

use crate::geometry::{
    BoundaryElement, Domain, GeoError, Point, Primitive, Rect, Region, Truncation,
};

/// Teeth narrower than this cannot be classified reliably against the
/// boundary tolerance, so parameter validation rejects them.
const MIN_TOOTH_WIDTH: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DomainsError {
    #[error("bad truncation radii: need 0 < r_in < r_out, got ({0}, {1})")]
    BadTruncation(f64, f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] GeoError),
}

/// Unit disc centered at the origin.
pub fn build_disc() -> Domain {
    Domain::new(
        "disc",
        Region::Union,
        vec![Primitive::Disc { center: Point::new(0.0, 0.0), radius: 1.0 }],
        vec![BoundaryElement::full_circle(Point::new(0.0, 0.0), 1.0)],
        Truncation::None,
    )
    .expect("disc construction is static")
}

/// Upper half-plane `y > 0`, truncated for discretization to a box that
/// comfortably contains the geodesics between points with moderate height.
pub fn build_half_plane() -> Domain {
    half_plane_at(0.0, Rect::new(-8.0, 0.0, 8.0, 8.0))
}

/// Half-plane `y > floor_y` with an explicit truncation box. The boundary
/// segment extends far enough past the box that the distance from any point
/// of the box to the segment equals its vertical distance to the line.
pub fn half_plane_at(floor_y: f64, trunc: Rect) -> Domain {
    assert!(trunc.y0 >= floor_y, "truncation box must lie in the half-plane");
    let reach = trunc.x0.abs().max(trunc.x1.abs()) + 4.0 * (trunc.y1 - floor_y) + 10.0;
    Domain::new(
        "half-plane",
        Region::Union,
        vec![Primitive::HalfPlane { anchor: Point::new(0.0, floor_y), normal: Point::new(0.0, 1.0) }],
        vec![BoundaryElement::segment(Point::new(-reach, floor_y), Point::new(reach, floor_y))],
        Truncation::Box { rect: trunc },
    )
    .expect("half-plane construction is static")
}

/// Plane with the origin removed. The boundary is the single point 0; the
/// annulus truncation only clips discretization, never the metric.
pub fn build_punctured_plane(r_in: f64, r_out: f64) -> Result<Domain, DomainsError> {
    if !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
        return Err(DomainsError::BadTruncation(r_in, r_out));
    }
    Ok(Domain::new(
        "punctured-plane",
        Region::Complement,
        vec![],
        vec![BoundaryElement::point(Point::new(0.0, 0.0))],
        Truncation::Annulus { center: Point::new(0.0, 0.0), r_in, r_out },
    )?)
}

/// Unit disc minus the radial slit from the center to (1, 0). The slit
/// segment is a wall seen from both sides; a single chain element carries
/// that, since distance to it is side-independent.
pub fn build_slit_disc() -> Domain {
    Domain::new(
        "slit-disc",
        Region::Union,
        vec![Primitive::Disc { center: Point::new(0.0, 0.0), radius: 1.0 }],
        vec![
            BoundaryElement::full_circle(Point::new(0.0, 0.0), 1.0),
            BoundaryElement::segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0)),
        ],
        Truncation::None,
    )
    .expect("slit disc construction is static")
}

/// Parameters of the comb: tooth widths `u^k`, gap widths `t^k`, tooth
/// heights `v^k`, for `k = 1..=k_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombParams {
    pub u: f64,
    pub t: f64,
    pub v: f64,
    pub k_max: usize,
}

impl CombParams {
    pub fn new(u: f64, t: f64, v: f64, k_max: usize) -> Result<Self, DomainsError> {
        if !(u > 0.0 && u < t && t < v && v < 1.0) {
            return Err(DomainsError::InvalidParams(format!(
                "need 0 < u < t < v < 1, got u={u}, t={t}, v={v}"
            )));
        }
        if k_max < 1 {
            return Err(DomainsError::InvalidParams("k_max must be at least 1".into()));
        }
        if u.powi(k_max as i32) < MIN_TOOTH_WIDTH {
            return Err(DomainsError::InvalidParams(format!(
                "tooth {k_max} would be {:.2e} wide, below the resolvable width {MIN_TOOTH_WIDTH:.0e}",
                u.powi(k_max as i32)
            )));
        }
        Ok(CombParams { u, t, v, k_max })
    }
}

/// Derived layout of the comb: tooth abscissae, base width, the exponent
/// linking gap and height scales, and the witness points centered in the
/// gaps between consecutive teeth.
#[derive(Debug, Clone)]
pub struct CombLayout {
    params: CombParams,
    /// Base width, the limit of the tooth span as the tooth count grows.
    pub s: f64,
    /// Exponent with `t^alpha = v`; lies in (0, 1).
    pub alpha: f64,
    x: Vec<f64>,
    z: Vec<Point>,
}

impl CombLayout {
    pub fn new(params: CombParams) -> Self {
        let CombParams { u, t, v, k_max } = params;
        let s = u / (1.0 - u) + t / (1.0 - t);
        let alpha = v.ln() / t.ln();
        let mut x = Vec::with_capacity(k_max + 1);
        x.push(0.0);
        for k in 1..=k_max {
            let prev = *x.last().unwrap();
            x.push(prev + (u.powi(k as i32) + t.powi(k as i32)));
        }
        let z = (1..=k_max)
            .map(|k| Point::new(x[k] - t.powi(k as i32) / 2.0, t.powi(k as i32)))
            .collect();
        CombLayout { params, s, alpha, x, z }
    }

    pub fn params(&self) -> CombParams {
        self.params
    }

    /// Left abscissa of tooth `k` (1-based); `k = k_max + 1` gives where the
    /// next tooth would start.
    pub fn x_k(&self, k: usize) -> f64 {
        assert!((1..=self.params.k_max + 1).contains(&k), "tooth index {k} out of range");
        self.x[k - 1]
    }

    /// Witness point centered in the gap to the right of tooth `k`
    /// (1-based), at height equal to the gap width.
    pub fn z_k(&self, k: usize) -> Point {
        assert!((1..=self.params.k_max).contains(&k), "gap index {k} out of range");
        self.z[k - 1]
    }

    pub fn tooth_width(&self, k: usize) -> f64 {
        self.params.u.powi(k as i32)
    }

    pub fn tooth_height(&self, k: usize) -> f64 {
        self.params.v.powi(k as i32)
    }

    pub fn gap_width(&self, k: usize) -> f64 {
        self.params.t.powi(k as i32)
    }

    /// Rectangle of tooth `k` (1-based), excluding the cap.
    pub fn tooth_rect(&self, k: usize) -> Rect {
        let x0 = self.x_k(k);
        Rect::new(x0, 0.0, x0 + self.tooth_width(k), self.tooth_height(k))
    }

    pub fn cap_center(&self, k: usize) -> Point {
        let r = self.tooth_rect(k);
        Point::new(r.center().x, r.y1)
    }

    pub fn cap_radius(&self, k: usize) -> f64 {
        self.tooth_width(k) / 2.0
    }
}

fn comb_primitives_and_boundary(
    layout: &CombLayout,
) -> (Vec<Primitive>, Vec<BoundaryElement>) {
    let k_max = layout.params.k_max;
    let s = layout.s;
    let mut primitives = Vec::with_capacity(2 * k_max + 1);
    primitives.push(Primitive::Rectangle { x0: 0.0, y0: -2.0, x1: s, y1: 0.0 });
    for k in 1..=k_max {
        let r = layout.tooth_rect(k);
        primitives.push(Primitive::Rectangle { x0: r.x0, y0: r.y0, x1: r.x1, y1: r.y1 });
        primitives.push(Primitive::SemiDisc {
            center: layout.cap_center(k),
            radius: layout.cap_radius(k),
            axis_angle: std::f64::consts::FRAC_PI_2,
        });
    }

    let mut boundary = Vec::with_capacity(4 * k_max + 4);
    // Base outline, leaving out the top edge, which the teeth and gap
    // floors partition.
    boundary.push(BoundaryElement::segment(Point::new(0.0, -2.0), Point::new(s, -2.0)));
    boundary.push(BoundaryElement::segment(Point::new(0.0, -2.0), Point::new(0.0, 0.0)));
    boundary.push(BoundaryElement::segment(Point::new(s, -2.0), Point::new(s, 0.0)));
    for k in 1..=k_max {
        let r = layout.tooth_rect(k);
        boundary.push(BoundaryElement::segment(Point::new(r.x0, 0.0), Point::new(r.x0, r.y1)));
        boundary.push(BoundaryElement::arc_ccw(
            layout.cap_center(k),
            layout.cap_radius(k),
            0.0,
            std::f64::consts::PI,
        ));
        boundary.push(BoundaryElement::segment(Point::new(r.x1, r.y1), Point::new(r.x1, 0.0)));
        // Gap floor to the right of tooth k; after the last tooth it runs
        // to the base's right edge.
        let gap_end = if k < k_max { layout.x_k(k + 1) } else { s };
        boundary.push(BoundaryElement::segment(Point::new(r.x1, 0.0), Point::new(gap_end, 0.0)));
    }
    (primitives, boundary)
}

/// Comb: base rectangle `(0,s) x (-2,0)` with `k_max` teeth on top, each a
/// thin rectangle capped by a semi-disc. Gap floors between teeth are
/// boundary.
pub fn build_comb(params: CombParams) -> (Domain, CombLayout) {
    let layout = CombLayout::new(params);
    let (primitives, boundary) = comb_primitives_and_boundary(&layout);
    let domain = Domain::new("comb", Region::Union, primitives, boundary, Truncation::None)
        .expect("validated comb parameters build a valid domain");
    (domain, layout)
}

/// Exterior of the closed comb, truncated to the comb's bounding box
/// inflated by `margin`. Shares the comb's boundary chain.
pub fn build_comb_complement(params: CombParams, margin: f64) -> Result<Domain, DomainsError> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(DomainsError::InvalidParams(format!("margin must be positive, got {margin}")));
    }
    let layout = CombLayout::new(params);
    let (primitives, boundary) = comb_primitives_and_boundary(&layout);
    let comb_bbox = Rect::new(0.0, -2.0, layout.s, layout.tooth_height(1) + layout.cap_radius(1));
    Ok(Domain::new(
        "comb-complement",
        Region::Complement,
        primitives,
        boundary,
        Truncation::Box { rect: comb_bbox.inflate(margin) },
    )?)
}

/// Catalog lookup for the CLI; `None` when the name is unknown. Comb
/// domains use the default parameters u=0.2, t=0.4, v=0.7, k_max=8 and
/// complement margin 1.0.
pub fn domain_by_name(name: &str) -> Option<Domain> {
    let default_comb = || CombParams::new(0.2, 0.4, 0.7, 8).expect("default comb parameters");
    match name {
        "disc" => Some(build_disc()),
        "half-plane" => Some(build_half_plane()),
        "punctured-plane" => Some(build_punctured_plane(0.05, 20.0).expect("static radii")),
        "slit-disc" => Some(build_slit_disc()),
        "comb" => Some(build_comb(default_comb()).0),
        "comb-complement" => {
            Some(build_comb_complement(default_comb(), 1.0).expect("static parameters"))
        }
        _ => None,
    }
}

pub const CATALOG_NAMES: [&str; 6] =
    ["disc", "half-plane", "punctured-plane", "slit-disc", "comb", "comb-complement"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointClass;
    use approx::assert_relative_eq;

    fn comb_params() -> CombParams {
        CombParams::new(0.2, 0.4, 0.7, 8).unwrap()
    }

    #[test]
    fn disc_center_distance() {
        let d = build_disc();
        assert_relative_eq!(d.boundary_distance(Point::new(0.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn half_plane_distance_is_height() {
        let d = build_half_plane();
        assert_relative_eq!(d.boundary_distance(Point::new(2.0, 3.0)).unwrap(), 3.0);
        assert_relative_eq!(d.boundary_distance(Point::new(-7.5, 0.25)).unwrap(), 0.25);
        assert_eq!(d.classify(Point::new(0.0, -1.0)), PointClass::Outside);
    }

    #[test]
    fn punctured_plane_distance_is_radius() {
        let d = build_punctured_plane(0.01, 100.0).unwrap();
        assert_relative_eq!(d.boundary_distance(Point::new(1.0, 0.0)).unwrap(), 1.0);
        assert_relative_eq!(d.boundary_distance(Point::new(-3.0, 4.0)).unwrap(), 5.0);
        // Truncation clips the grid, not the domain.
        assert_eq!(d.classify(Point::new(200.0, 0.0)), PointClass::Inside);
        assert_eq!(d.classify(Point::new(0.0, 0.0)), PointClass::Boundary);
    }

    #[test]
    fn punctured_plane_rejects_bad_radii() {
        assert!(matches!(build_punctured_plane(0.0, 1.0), Err(DomainsError::BadTruncation(..))));
        assert!(matches!(build_punctured_plane(2.0, 1.0), Err(DomainsError::BadTruncation(..))));
        assert!(matches!(
            build_punctured_plane(1.0, f64::INFINITY),
            Err(DomainsError::BadTruncation(..))
        ));
    }

    #[test]
    fn slit_disc_distance() {
        let d = build_slit_disc();
        // min(distance to slit = 0.3, distance to circle = 1 - sqrt(0.34)).
        assert_relative_eq!(d.boundary_distance(Point::new(0.5, 0.3)).unwrap(), 0.3);
        assert_relative_eq!(d.boundary_distance(Point::new(0.5, -0.3)).unwrap(), 0.3);
        assert_relative_eq!(
            d.boundary_distance(Point::new(-0.5, 0.0)).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_eq!(d.classify(Point::new(0.5, 0.0)), PointClass::Boundary);
    }

    #[test]
    fn comb_params_validation() {
        assert!(CombParams::new(0.4, 0.2, 0.7, 4).is_err());
        assert!(CombParams::new(0.2, 0.7, 0.4, 4).is_err());
        assert!(CombParams::new(0.2, 0.4, 1.0, 4).is_err());
        assert!(CombParams::new(0.0, 0.4, 0.7, 4).is_err());
        assert!(CombParams::new(0.2, 0.4, 0.7, 0).is_err());
        // Tooth 10 would be 0.2^10 ~ 1e-7 wide.
        assert!(CombParams::new(0.2, 0.4, 0.7, 10).is_err());
        assert!(CombParams::new(0.2, 0.4, 0.7, 8).is_ok());
    }

    #[test]
    fn comb_layout_frozen_values() {
        let layout = CombLayout::new(comb_params());
        assert_relative_eq!(layout.s, 0.2 / 0.8 + 0.4 / 0.6);
        assert_relative_eq!(layout.s, 0.9166666666666666, epsilon = 1e-15);
        assert_relative_eq!(layout.x_k(2), 0.6);
        let z1 = layout.z_k(1);
        assert_relative_eq!(z1.x, 0.4);
        assert_relative_eq!(z1.y, 0.4);
        assert_relative_eq!(layout.alpha, (0.7f64).ln() / (0.4f64).ln());
        assert!(layout.alpha > 0.0 && layout.alpha < 1.0);
    }

    #[test]
    fn comb_layout_recurrence_exact() {
        let layout = CombLayout::new(comb_params());
        for k in 1..=8usize {
            let step = 0.2f64.powi(k as i32) + 0.4f64.powi(k as i32);
            assert_eq!(layout.x_k(k + 1), layout.x_k(k) + step);
        }
        // All teeth fit inside the base span.
        assert!(layout.x_k(8) + layout.tooth_width(8) < layout.s);
    }

    #[test]
    fn comb_distances() {
        let (comb, _) = build_comb(comb_params());
        // Inside tooth 1: walls at x=0 and x=0.2.
        assert_relative_eq!(comb.boundary_distance(Point::new(0.1, 0.35)).unwrap(), 0.1);
        // Center of the base.
        assert_relative_eq!(
            comb.boundary_distance(Point::new(0.45, -1.0)).unwrap(),
            0.45,
            epsilon = 1e-12
        );
    }

    #[test]
    fn comb_complement_witness_points() {
        let params = comb_params();
        let layout = CombLayout::new(params);
        let compl = build_comb_complement(params, 1.0).unwrap();
        let (comb, _) = build_comb(params);

        let z1 = layout.z_k(1);
        assert_eq!(compl.classify(z1), PointClass::Inside);
        assert_eq!(comb.classify(z1), PointClass::Outside);
        let d1 = compl.boundary_distance(z1).unwrap();
        assert_relative_eq!(d1, 0.2);
        assert!(d1 >= 0.16);

        // Inside tooth 1, so outside the complement.
        assert_eq!(compl.classify(Point::new(0.1, 0.35)), PointClass::Outside);

        for k in 1..=params.k_max {
            assert_eq!(compl.classify(layout.z_k(k)), PointClass::Inside, "z_{k} not interior");
        }
    }

    #[test]
    fn comb_and_complement_partition_plane() {
        let params = comb_params();
        let (comb, layout) = build_comb(params);
        let compl = build_comb_complement(params, 1.0).unwrap();
        let bbox = compl.bbox();
        let n = 41;
        for i in 0..n {
            for jj in 0..n {
                let p = Point::new(
                    bbox.x0 + (bbox.x1 - bbox.x0) * i as f64 / (n - 1) as f64,
                    bbox.y0 + (bbox.y1 - bbox.y0) * jj as f64 / (n - 1) as f64,
                );
                let a = comb.classify(p);
                let b = compl.classify(p);
                let ok = match (a, b) {
                    (PointClass::Boundary, PointClass::Boundary) => true,
                    (PointClass::Inside, x) => x == PointClass::Outside,
                    (x, PointClass::Inside) => x == PointClass::Outside,
                    (PointClass::Outside, PointClass::Outside) => true,
                    _ => false,
                };
                assert!(ok, "partition violated at ({}, {}): {a:?} vs {b:?}", p.x, p.y);
            }
        }
        let _ = layout;
    }

    #[test]
    fn catalog_domains_are_consistent() {
        for name in CATALOG_NAMES {
            let d = domain_by_name(name).unwrap();
            assert_eq!(d.name(), name);
            d.validate_consistency().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(domain_by_name("klein-bottle").is_none());
    }
}
