//! Standalone SVG emission: domain outlines drawn element by element,
//! geodesic overlays, and witness markers. The vertical axis is flipped
//! so the drawing matches the mathematical orientation.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use crate::geometry::{BoundaryElement, Domain, Orientation, Point, PolyPath, Rect};

const OUTLINE_COLOR: &str = "#2f2f2f";
const GEODESIC_COLORS: [&str; 6] =
    ["#1a6ee0", "#d2691e", "#2e8b57", "#8a2be2", "#c03050", "#207878"];
const MARKER_COLOR: &str = "#c22020";

pub struct SvgCanvas {
    view: Rect,
    width: f64,
    height: f64,
    margin: f64,
    body: String,
}

impl SvgCanvas {
    /// Canvas over the world-coordinate `view`, `width_px` pixels wide;
    /// the height preserves the aspect ratio.
    pub fn new(view: Rect, width_px: f64) -> SvgCanvas {
        assert!(width_px > 0.0 && width_px.is_finite());
        let height = (width_px * view.height() / view.width()).max(16.0);
        SvgCanvas { view, width: width_px, height, margin: 0.05 * width_px, body: String::new() }
    }

    fn sx(&self, x: f64) -> f64 {
        self.margin + (x - self.view.x0) / self.view.width() * self.width
    }

    fn sy(&self, y: f64) -> f64 {
        self.margin + (self.view.y1 - y) / self.view.height() * self.height
    }

    fn px_per_unit(&self) -> f64 {
        self.width / self.view.width()
    }

    pub fn polyline(&mut self, pts: &[Point], stroke: &str, width_px: f64) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2} {:.2} ", self.sx(p.x), self.sy(p.y));
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{}" fill="none" stroke="{stroke}" stroke-width="{width_px}" stroke-linejoin="round"/>"#,
            d.trim_end()
        );
    }

    pub fn marker(&mut self, p: Point, radius_px: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{radius_px}" fill="{fill}"/>"#,
            self.sx(p.x),
            self.sy(p.y)
        );
    }

    /// Draw every boundary element of the domain.
    pub fn domain_outline(&mut self, d: &Domain, stroke: &str) {
        for el in d.boundary() {
            self.boundary_element(el, stroke);
        }
    }

    fn boundary_element(&mut self, el: &BoundaryElement, stroke: &str) {
        match el {
            BoundaryElement::Segment { a, b } => {
                let _ = writeln!(
                    self.body,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="1.5"/>"#,
                    self.sx(a.x),
                    self.sy(a.y),
                    self.sx(b.x),
                    self.sy(b.y)
                );
            }
            BoundaryElement::Arc { center, radius, orientation, .. } => {
                let (_, span) = el.ccw_span().expect("arc has a span");
                if span >= TAU - 1e-12 {
                    let _ = writeln!(
                        self.body,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
                        self.sx(center.x),
                        self.sy(center.y),
                        radius * self.px_per_unit()
                    );
                    return;
                }
                let (a, b) = el.arc_endpoints();
                let large = if span > PI { 1 } else { 0 };
                // The y-flip mirrors orientation: a mathematically
                // counterclockwise arc is drawn clockwise on screen.
                let sweep = match orientation {
                    Orientation::Ccw => 1,
                    Orientation::Cw => 0,
                };
                let r = radius * self.px_per_unit();
                let _ = writeln!(
                    self.body,
                    r#"<path d="M{:.2} {:.2} A{r:.2} {r:.2} 0 {large} {sweep} {:.2} {:.2}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
                    self.sx(a.x),
                    self.sy(a.y),
                    self.sx(b.x),
                    self.sy(b.y)
                );
            }
            BoundaryElement::Point { at } => {
                let _ = writeln!(
                    self.body,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{stroke}"/>"#,
                    self.sx(at.x),
                    self.sy(at.y)
                );
            }
        }
    }

    pub fn finish(self) -> String {
        let w = self.width + 2.0 * self.margin;
        let h = self.height + 2.0 * self.margin;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
             viewBox=\"0 0 {w:.0} {h:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

/// Outline drawing of a domain.
pub fn domain_svg(d: &Domain) -> String {
    let mut canvas = SvgCanvas::new(d.bbox(), 640.0);
    canvas.domain_outline(d, OUTLINE_COLOR);
    canvas.finish()
}

/// Domain outline with geodesic overlays and point markers.
pub fn geodesic_plot_svg(d: &Domain, geodesics: &[PolyPath], markers: &[Point]) -> String {
    let mut canvas = SvgCanvas::new(d.bbox(), 640.0);
    canvas.domain_outline(d, OUTLINE_COLOR);
    for (i, path) in geodesics.iter().enumerate() {
        let color = GEODESIC_COLORS[i % GEODESIC_COLORS.len()];
        canvas.polyline(path.vertices(), color, 1.8);
    }
    for m in markers {
        canvas.marker(*m, 3.0, MARKER_COLOR);
    }
    canvas.finish()
}
