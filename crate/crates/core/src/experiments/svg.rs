//! Static SVG scatter plots: filled marks for roots, empty marks for
//! critical points, region outline.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::convex_geom::ConvexRegion;
use crate::poly_core::ComplexPoint;
use crate::stability::SplitConfiguration;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 0.1;
const ROOT_RADIUS: f64 = 4.0;
const CRITICAL_RADIUS: f64 = 6.5;

struct Frame {
    lo: ComplexPoint,
    scale: f64,
    offset: (f64, f64),
}

impl Frame {
    fn fit(points: &[ComplexPoint]) -> Self {
        let (mut lo, mut hi) = (points[0], points[0]);
        for z in points {
            lo = ComplexPoint::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = ComplexPoint::new(hi.re.max(z.re), hi.im.max(z.im));
        }
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
        let inner = SIZE * (1.0 - 2.0 * MARGIN);
        let scale = inner / span;
        // center the shorter axis
        let offset = (
            SIZE * MARGIN + 0.5 * (inner - (hi.re - lo.re) * scale),
            SIZE * MARGIN + 0.5 * (inner - (hi.im - lo.im) * scale),
        );
        Self { lo, scale, offset }
    }

    fn map(&self, z: ComplexPoint) -> (f64, f64) {
        let x = self.offset.0 + (z.re - self.lo.re) * self.scale;
        let y = SIZE - (self.offset.1 + (z.im - self.lo.im) * self.scale);
        (x, y)
    }
}

/// Groups exactly coincident points, keeping first-seen order.
fn group(points: &[ComplexPoint]) -> Vec<(ComplexPoint, usize)> {
    let mut index: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut out: Vec<(ComplexPoint, usize)> = Vec::new();
    for &z in points {
        let key = (z.re.to_bits(), z.im.to_bits());
        match index.get(&key) {
            Some(&i) => out[i].1 += 1,
            None => {
                index.insert(key, out.len());
                out.push((z, 1));
            }
        }
    }
    out
}

fn region_extent(region: &ConvexRegion) -> Vec<ComplexPoint> {
    let (lo, hi) = region.bounding_box();
    vec![lo, hi]
}

/// SVG document for a configuration and its critical points.
pub fn svg_document(config: &SplitConfiguration, criticals: &[ComplexPoint]) -> String {
    let roots = config.all_roots();
    let mut extent = region_extent(config.region());
    extent.extend(roots.entries().iter().map(|e| e.location));
    extent.extend_from_slice(criticals);
    let frame = Frame::fit(&extent);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    match config.region() {
        ConvexRegion::Disk { center, radius } => {
            let (x, y) = frame.map(*center);
            let _ = writeln!(
                s,
                r#"<circle class="region" cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="gray" stroke-width="1.5"/>"#,
                radius * frame.scale
            );
        }
        ConvexRegion::Polygon { vertices } => {
            let pts: Vec<String> = vertices
                .iter()
                .map(|&v| {
                    let (x, y) = frame.map(v);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polygon class="region" points="{}" fill="none" stroke="gray" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
        }
    }
    for e in roots.entries() {
        let (x, y) = frame.map(e.location);
        let _ = writeln!(s, r#"<circle class="root" cx="{x:.3}" cy="{y:.3}" r="{ROOT_RADIUS}" fill="black"/>"#);
        if e.multiplicity > 1 {
            let _ = writeln!(
                s,
                r#"<text class="multiplicity" x="{:.3}" y="{:.3}" font-size="11" font-family="sans-serif">{}</text>"#,
                x + ROOT_RADIUS + 2.0,
                y - ROOT_RADIUS - 2.0,
                e.multiplicity
            );
        }
    }
    for (z, count) in group(criticals) {
        let (x, y) = frame.map(z);
        let _ = writeln!(
            s,
            r#"<circle class="critical" cx="{x:.3}" cy="{y:.3}" r="{CRITICAL_RADIUS}" fill="none" stroke="crimson" stroke-width="1.2"/>"#
        );
        if count > 1 {
            let _ = writeln!(
                s,
                r#"<text class="multiplicity" x="{:.3}" y="{:.3}" font-size="11" font-family="sans-serif" fill="crimson">{count}</text>"#,
                x + CRITICAL_RADIUS + 2.0,
                y + CRITICAL_RADIUS + 10.0,
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_svg(config: &SplitConfiguration, criticals: &[ComplexPoint], path: &Path) -> io::Result<()> {
    std::fs::write(path, svg_document(config, criticals))
}
