//! Convex regions: disks and strictly convex polygons.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::poly_core::{is_finite, ComplexPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("disk radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not strictly convex and counterclockwise at vertex {0}")]
    NotStrictlyConvex(usize),
    #[error("non-finite coordinate")]
    NonFinite,
}

/// A closed convex region `K`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexRegion {
    Disk { center: ComplexPoint, radius: f64 },
    Polygon { vertices: Vec<ComplexPoint> },
}

fn cross(a: ComplexPoint, b: ComplexPoint) -> f64 {
    a.re * b.im - a.im * b.re
}

fn dot(a: ComplexPoint, b: ComplexPoint) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Distance from `z` to the segment `[a, b]`.
pub fn segment_distance(z: ComplexPoint, a: ComplexPoint, b: ComplexPoint) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (dot(z - a, ab) / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

impl ConvexRegion {
    pub fn disk(center: ComplexPoint, radius: f64) -> Result<Self, GeomError> {
        if !is_finite(center) {
            return Err(GeomError::NonFinite);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeomError::BadRadius(radius));
        }
        Ok(Self::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        Self::Disk { center: ComplexPoint::new(0.0, 0.0), radius: 1.0 }
    }

    /// Validates strict convexity and counterclockwise orientation.
    pub fn polygon(vertices: Vec<ComplexPoint>) -> Result<Self, GeomError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeomError::TooFewVertices(n));
        }
        if vertices.iter().any(|&v| !is_finite(v)) {
            return Err(GeomError::NonFinite);
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(b - a, c - b) <= 0.0 {
                return Err(GeomError::NotStrictlyConvex((i + 1) % n));
            }
        }
        // Consecutive left turns can still wind around more than once.
        let turning: f64 = (0..n)
            .map(|i| {
                let e0 = vertices[(i + 1) % n] - vertices[i];
                let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
                (e1 / e0).arg()
            })
            .sum();
        if (turning - TAU).abs() > 1e-6 {
            return Err(GeomError::NotStrictlyConvex(0));
        }
        Ok(Self::Polygon { vertices })
    }

    /// Axis-aligned square `[x0, x0 + side] x [y0, y0 + side]`.
    pub fn square(x0: f64, y0: f64, side: f64) -> Result<Self, GeomError> {
        Self::polygon(vec![
            ComplexPoint::new(x0, y0),
            ComplexPoint::new(x0 + side, y0),
            ComplexPoint::new(x0 + side, y0 + side),
            ComplexPoint::new(x0, y0 + side),
        ])
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, Self::Disk { .. })
    }

    /// Membership in the closed region inflated by `tol`.
    pub fn contains(&self, z: ComplexPoint, tol: f64) -> bool {
        match self {
            Self::Disk { center, radius } => (z - center).norm() <= radius + tol,
            Self::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let a = vertices[i];
                    let e = vertices[(i + 1) % n] - a;
                    cross(e, z - a) / e.norm() >= -tol
                })
            }
        }
    }

    /// Euclidean distance `d(z, K)`; zero inside.
    pub fn distance(&self, z: ComplexPoint) -> f64 {
        match self {
            Self::Disk { center, radius } => ((z - center).norm() - radius).max(0.0),
            Self::Polygon { vertices } => {
                if self.contains(z, 0.0) {
                    return 0.0;
                }
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance(z, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// `diam(K)`. Polygons use rotating calipers over antipodal vertex pairs.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::Disk { radius, .. } => 2.0 * radius,
            Self::Polygon { vertices } => calipers_diameter(vertices),
        }
    }

    /// Signed distance to the boundary of `K`: positive outside, negative inside.
    pub fn signed_distance(&self, z: ComplexPoint) -> f64 {
        match self {
            Self::Disk { center, radius } => (z - center).norm() - radius,
            Self::Polygon { vertices } => {
                if !self.contains(z, 0.0) {
                    return self.distance(z);
                }
                let n = vertices.len();
                -(0..n)
                    .map(|i| segment_distance(z, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Farthest point of `K` in direction `u` (unit vector).
    pub fn support_point(&self, u: ComplexPoint) -> ComplexPoint {
        match self {
            Self::Disk { center, radius } => center + u * *radius,
            Self::Polygon { vertices } => *vertices
                .iter()
                .max_by(|a, b| dot(**a, u).total_cmp(&dot(**b, u)))
                .expect("polygon has vertices"),
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (ComplexPoint, ComplexPoint) {
        match self {
            Self::Disk { center, radius } => (
                ComplexPoint::new(center.re - radius, center.im - radius),
                ComplexPoint::new(center.re + radius, center.im + radius),
            ),
            Self::Polygon { vertices } => bounding_box(vertices),
        }
    }

    pub fn centroid_hint(&self) -> ComplexPoint {
        match self {
            Self::Disk { center, .. } => *center,
            Self::Polygon { vertices } => vertices.iter().sum::<ComplexPoint>() / vertices.len() as f64,
        }
    }

    /// Point on the boundary of `K + B(rho)` at parameter `t` in `[0, 1)`,
    /// traversed counterclockwise at uniform arc length. With `rho = 0` this
    /// is the boundary of `K` itself.
    pub fn offset_boundary_point(&self, rho: f64, t: f64) -> ComplexPoint {
        let t = t.rem_euclid(1.0);
        match self {
            Self::Disk { center, radius } => center + ComplexPoint::from_polar(radius + rho, TAU * t),
            Self::Polygon { vertices } => {
                let n = vertices.len();
                let edges: Vec<ComplexPoint> = (0..n).map(|i| vertices[(i + 1) % n] - vertices[i]).collect();
                let normal = |e: ComplexPoint| ComplexPoint::new(e.im, -e.re) / e.norm();
                // Piece i: offset edge i, then the arc at vertex i+1.
                let arcs: Vec<f64> = (0..n)
                    .map(|i| (edges[(i + 1) % n] / edges[i]).arg())
                    .collect();
                let perimeter: f64 =
                    edges.iter().map(|e| e.norm()).sum::<f64>() + rho * arcs.iter().sum::<f64>();
                let mut s = t * perimeter;
                for i in 0..n {
                    let len = edges[i].norm();
                    let nrm = normal(edges[i]);
                    if s <= len {
                        return vertices[i] + edges[i] * (s / len) + nrm * rho;
                    }
                    s -= len;
                    let arc_len = rho * arcs[i];
                    if s <= arc_len || i == n - 1 {
                        let theta = if rho > 0.0 { (s / rho).min(arcs[i]) } else { 0.0 };
                        return vertices[(i + 1) % n] + nrm * ComplexPoint::from_polar(rho, theta);
                    }
                    s -= arc_len;
                }
                unreachable!("parameter runs past the perimeter")
            }
        }
    }
}

pub fn bounding_box(points: &[ComplexPoint]) -> (ComplexPoint, ComplexPoint) {
    let mut lo = ComplexPoint::new(f64::INFINITY, f64::INFINITY);
    let mut hi = ComplexPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    (lo, hi)
}

fn calipers_diameter(v: &[ComplexPoint]) -> f64 {
    let n = v.len();
    let mut best: f64 = 0.0;
    let mut j = 1;
    for i in 0..n {
        let e = v[(i + 1) % n] - v[i];
        // advance j while the triangle area against edge i keeps growing
        while cross(e, v[(j + 1) % n] - v[i]) > cross(e, v[j] - v[i]) {
            j = (j + 1) % n;
        }
        best = best.max((v[i] - v[j]).norm()).max((v[(i + 1) % n] - v[j]).norm());
    }
    best
}

/// Convex hull of a point set.
#[derive(Debug, Clone, PartialEq)]
pub enum Hull {
    Region(ConvexRegion),
    /// Collinear input (or a single point, with `start == end`).
    Degenerate { start: ComplexPoint, end: ComplexPoint },
}

impl Hull {
    pub fn contains(&self, z: ComplexPoint, tol: f64) -> bool {
        match self {
            Hull::Region(r) => r.contains(z, tol),
            Hull::Degenerate { start, end } => segment_distance(z, *start, *end) <= tol,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Hull::Region(r) => r.diameter(),
            Hull::Degenerate { start, end } => (end - start).norm(),
        }
    }
}

/// Andrew's monotone chain. Collinear boundary points are dropped.
pub fn convex_hull(points: &[ComplexPoint]) -> Hull {
    assert!(!points.is_empty(), "convex hull of an empty set");
    let mut pts: Vec<ComplexPoint> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() == 1 {
        return Hull::Degenerate { start: pts[0], end: pts[0] };
    }
    let mut lower: Vec<ComplexPoint> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 2]) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<ComplexPoint> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 2]) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Hull::Degenerate { start: pts[0], end: pts[pts.len() - 1] };
    }
    match ConvexRegion::polygon(lower) {
        Ok(r) => Hull::Region(r),
        // nearly collinear input can pass the monotone chain but fail the
        // strict turn test after rounding
        Err(_) => Hull::Degenerate { start: pts[0], end: pts[pts.len() - 1] },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    fn unit_square() -> ConvexRegion {
        ConvexRegion::square(0.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ConvexRegion::disk(c(0.0, 0.0), 0.0).is_err());
        assert!(ConvexRegion::polygon(vec![c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        // clockwise
        assert!(ConvexRegion::polygon(vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(1.0, 0.0)]).is_err());
        // collinear vertex
        assert!(ConvexRegion::polygon(vec![c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).is_err());
        // pentagram: every turn is a left turn but it winds twice
        let star: Vec<_> = (0..5).map(|k| ComplexPoint::from_polar(1.0, TAU * 2.0 * k as f64 / 5.0)).collect();
        assert!(ConvexRegion::polygon(star).is_err());
    }

    #[test]
    fn contains_examples() {
        let d = ConvexRegion::unit_disk();
        assert!(d.contains(c(0.5, 0.0), 0.0));
        assert!(!unit_square().contains(c(2.0, 0.5), 0.0));
        assert!(d.contains(c(1.0 + 1e-12, 0.0), 1e-9));
        assert!(!d.contains(c(1.0 + 1e-6, 0.0), 1e-9));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(ConvexRegion::unit_disk().distance(c(2.0, 0.0)), 1.0);
        assert_eq!(unit_square().distance(c(2.0, 0.5)), 1.0);
        assert!((unit_square().distance(c(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(unit_square().distance(c(0.3, 0.3)), 0.0);
    }

    #[test]
    fn corner_distance_against_sampled_boundary() {
        let sq = unit_square();
        let z = c(2.0, 2.0);
        let samples = 1_000_000;
        let brute = (0..samples)
            .map(|k| (z - sq.offset_boundary_point(0.0, k as f64 / samples as f64)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((brute - sq.distance(z)).abs() < 1e-4);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(ConvexRegion::unit_disk().diameter(), 2.0);
        assert!((unit_square().diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    fn all_pairs_max(points: &[ComplexPoint]) -> f64 {
        let mut best: f64 = 0.0;
        for a in points {
            for b in points {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    #[test]
    fn calipers_match_all_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let pts: Vec<_> = (0..rng.gen_range(3..40))
                .map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let hull = convex_hull(&pts);
            assert!((hull.diameter() - all_pairs_max(&pts)).abs() < 1e-12);
        }
    }

    #[test]
    fn random_octagon_diameter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut angles: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let v: Vec<_> = angles.iter().map(|&a| c(2.0 * a.cos(), a.sin())).collect();
        let poly = ConvexRegion::polygon(v.clone()).unwrap();
        assert!((poly.diameter() - all_pairs_max(&v)).abs() < 1e-14);
    }

    #[test]
    fn hull_examples() {
        let hull = convex_hull(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)]);
        let Hull::Region(ConvexRegion::Polygon { vertices }) = hull else { panic!("expected polygon") };
        assert_eq!(vertices, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)]);

        let hull = convex_hull(&[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)]);
        assert_eq!(hull, Hull::Degenerate { start: c(0.0, 0.0), end: c(1.0, 0.0) });

        assert_eq!(convex_hull(&[c(2.0, 2.0)]), Hull::Degenerate { start: c(2.0, 2.0), end: c(2.0, 2.0) });
    }

    #[test]
    fn hull_contains_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<_> = (0..100)
            .map(|_| ComplexPoint::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU)))
            .collect();
        let hull = convex_hull(&pts);
        assert!(pts.iter().all(|&p| hull.contains(p, 1e-12)));
    }

    #[test]
    fn offset_boundary_stays_at_distance() {
        let poly = ConvexRegion::polygon(vec![c(0.0, 0.0), c(2.0, 0.0), c(2.5, 1.0), c(0.5, 2.0)]).unwrap();
        for k in 0..1000 {
            let z = poly.offset_boundary_point(0.3, k as f64 / 1000.0);
            assert!((poly.distance(z) - 0.3).abs() < 1e-12, "t={k}");
        }
        let z0 = poly.offset_boundary_point(0.3, 0.0);
        let z1 = poly.offset_boundary_point(0.3, 1.0 - 1e-12);
        assert!((z0 - z1).norm() < 1e-9);
    }

    #[test]
    fn support_point_is_farthest() {
        let sq = unit_square();
        assert_eq!(sq.support_point(c(1.0, 0.0).unscale(1.0)).re, 1.0);
        let d = ConvexRegion::disk(c(1.0, 1.0), 2.0).unwrap();
        assert_eq!(d.support_point(c(0.0, 1.0)), c(1.0, 3.0));
    }
}
