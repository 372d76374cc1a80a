//! SVG output in the Poincaré disk. Geodesics are drawn as exact circular
//! arcs orthogonal to the boundary circle.

use std::fmt::Write;

use clap::Args;
use hyptutte::hyp2::HPoint;
use hyptutte::GeodesicMapping;

#[derive(Clone, Debug, Args)]
pub struct RenderStyle {
    /// Disk radius in pixels
    #[arg(long, default_value_t = 400.0)]
    pub radius: f64,
    /// Edge stroke width in pixels
    #[arg(long, default_value_t = 1.0)]
    pub stroke: f64,
    /// Draw the fundamental polygon
    #[arg(long)]
    pub polygon: bool,
    /// Also draw the translates of the mesh by group elements moving the
    /// base point at most this far
    #[arg(long, default_value_t = 0.0)]
    pub translates: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            radius: 400.0,
            stroke: 1.0,
            polygon: false,
            translates: 0.0,
        }
    }
}

const MARGIN: f64 = 10.0;

/// Hyperboloid to Poincaré disk, `(x1, x2)/(1 + x3)`.
pub fn to_disk(p: &HPoint) -> (f64, f64) {
    let c = p.coords();
    (c.x / (1.0 + c.z), c.y / (1.0 + c.z))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    Line,
    /// Circle with the given center and radius, traversed counterclockwise
    /// from the first point to the second when `ccw` is set.
    Arc { center: (f64, f64), radius: f64, ccw: bool },
}

/// The geodesic through two disk points: a diameter or a circle orthogonal
/// to the unit circle.
pub fn geodesic_arc(a: (f64, f64), b: (f64, f64)) -> Segment {
    let det = a.0 * b.1 - a.1 * b.0;
    let span = (a.0 - b.0).hypot(a.1 - b.1);
    if det.abs() <= 1e-12 * span.max(1e-300) {
        return Segment::Line;
    }
    // c·a = (1 + |a|²)/2 and c·b = (1 + |b|²)/2
    let ra = 0.5 * (1.0 + a.0 * a.0 + a.1 * a.1);
    let rb = 0.5 * (1.0 + b.0 * b.0 + b.1 * b.1);
    let center = ((ra * b.1 - rb * a.1) / det, (a.0 * rb - b.0 * ra) / det);
    let radius = (center.0 * center.0 + center.1 * center.1 - 1.0).max(0.0).sqrt();
    if radius > 1e8 {
        return Segment::Line;
    }
    let cross = (a.0 - center.0) * (b.1 - center.1) - (a.1 - center.1) * (b.0 - center.0);
    Segment::Arc { center, radius, ccw: cross > 0.0 }
}

struct Canvas {
    scale: f64,
    offset: f64,
}

impl Canvas {
    fn point(&self, p: (f64, f64)) -> (f64, f64) {
        (self.offset + self.scale * p.0, self.offset - self.scale * p.1)
    }

    fn path(&self, a: (f64, f64), b: (f64, f64)) -> String {
        let (ax, ay) = self.point(a);
        let (bx, by) = self.point(b);
        match geodesic_arc(a, b) {
            Segment::Line => format!("M {ax:.3} {ay:.3} L {bx:.3} {by:.3}"),
            Segment::Arc { radius, ccw, .. } => {
                let r = radius * self.scale;
                // the y axis points down on screen, which turns ccw into sweep 1
                format!("M {ax:.3} {ay:.3} A {r:.3} {r:.3} 0 0 {} {bx:.3} {by:.3}", u8::from(ccw))
            }
        }
    }
}

/// SVG 1.1 document showing every edge of `m`, its translates, and
/// optionally the fundamental polygon.
pub fn svg(m: &GeodesicMapping, style: &RenderStyle) -> Result<String, String> {
    if style.radius.is_nan() || style.radius <= 0.0 {
        return Err(format!("radius must be positive, got {}", style.radius));
    }
    if style.translates.is_nan() || style.translates < 0.0 {
        return Err(format!("translate distance must be non-negative, got {}", style.translates));
    }
    let size = 2.0 * (style.radius + MARGIN);
    let canvas = Canvas {
        scale: style.radius,
        offset: style.radius + MARGIN,
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.3} {size:.3}">"#
    );
    let _ = writeln!(
        out,
        r##"<circle class="boundary" cx="{0:.3}" cy="{0:.3}" r="{1:.3}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        canvas.offset, style.radius
    );

    let elements = if style.translates > 0.0 {
        m.group().within(style.translates)
    } else {
        vec![hyptutte::GroupElement::identity()]
    };
    let c = m.complex();
    let _ = writeln!(
        out,
        r##"<g class="mesh" fill="none" stroke="#1f4e79" stroke-width="{}">"##,
        style.stroke
    );
    for g in &elements {
        for d in 0..c.dart_count() {
            if c.reverse(d) < d {
                continue;
            }
            let (i, _) = c.darts()[d];
            let a = to_disk(&g.iso.apply(&m.lifts()[i]));
            let b = to_disk(&g.iso.apply(&m.head(d)));
            let _ = writeln!(out, r#"<path class="edge" d="{}"/>"#, canvas.path(a, b));
        }
    }
    let _ = writeln!(out, "</g>");

    if style.polygon {
        let poly = m.group().polygon();
        let _ = writeln!(
            out,
            r##"<g class="polygon" fill="none" stroke="#b22222" stroke-width="{}">"##,
            2.0 * style.stroke
        );
        for k in 0..poly.len() {
            let a = to_disk(&poly[k]);
            let b = to_disk(&poly[(k + 1) % poly.len()]);
            let _ = writeln!(out, r#"<path class="polygon-side" d="{}"/>"#, canvas.path(a, b));
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
