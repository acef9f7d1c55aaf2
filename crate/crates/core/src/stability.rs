//! Count and location certificates for polynomials whose roots split into a
//! group inside a convex region `K` and a group bounded away from it.
//!
//! With `n` roots in the unit disk and `m` roots of modulus at least
//! `d > 1 + 2m/n`, the derivative keeps `n - 1` roots in the disk and its other
//! `m` roots have modulus at least `(dn - m)/(n + m)`. For a general convex `K`
//! the corresponding separation is `2 diam(K) sqrt(m^2/n^2 + m/n)` and the
//! split happens at distance `diam(K) sqrt(m/(n + m))` from `K`.
//!
//! Certificates never panic or error on a violated hypothesis; they report
//! `pass = false` with a note so that sub-threshold behaviour can be measured.

use serde::Serialize;
use thiserror::Error;

use crate::convex_geom::ConvexRegion;
use crate::poly_core::{log_derivative_sum, ComplexPoint, PolyError, RootEntry, RootMultiset};
use crate::root_finder::{classify_points, critical_count_inside, critical_points, RootFindConfig, RootFindError};

/// Relative tolerance for counting a point as on the region boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Relative tolerance used when checking that inner roots lie in the region.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("hypothesis violated: separation {separation} does not exceed threshold {threshold}")]
    HypothesisViolated { separation: f64, threshold: f64 },
    #[error("point outside the domain of the bound: {0}")]
    OutsideDomain(String),
    #[error("critical point solver failed: {0}")]
    SolverFailure(#[from] RootFindError),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Roots split into those inside a convex region and those strictly outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfiguration {
    region: ConvexRegion,
    inner: RootMultiset,
    outer: Option<RootMultiset>,
    separation: Option<f64>,
}

impl SplitConfiguration {
    pub fn new(region: ConvexRegion, inner: RootMultiset, outer: Option<RootMultiset>) -> Result<Self, StabilityError> {
        for e in inner.entries() {
            if !region.contains(e.location, MEMBERSHIP_TOLERANCE * (1.0 + e.location.norm())) {
                return Err(StabilityError::InvalidConfiguration(format!("inner root {} lies outside the region", e.location)));
            }
        }
        let mut separation = None;
        if let Some(outer) = &outer {
            let mut sep = f64::INFINITY;
            for e in outer.entries() {
                let d = region.distance(e.location);
                if !(d > 0.0) {
                    return Err(StabilityError::InvalidConfiguration(format!("outer root {} is not outside the region", e.location)));
                }
                sep = sep.min(d);
            }
            separation = Some(sep);
        }
        Ok(Self { region, inner, outer, separation })
    }

    pub fn region(&self) -> &ConvexRegion {
        &self.region
    }

    pub fn inner(&self) -> &RootMultiset {
        &self.inner
    }

    pub fn outer(&self) -> Option<&RootMultiset> {
        self.outer.as_ref()
    }

    pub fn outer_entries(&self) -> &[RootEntry] {
        self.outer.as_ref().map(|o| o.entries()).unwrap_or(&[])
    }

    /// Inner root count with multiplicity.
    pub fn n(&self) -> usize {
        self.inner.degree()
    }

    /// Outer root count with multiplicity.
    pub fn m(&self) -> usize {
        self.outer.as_ref().map_or(0, |o| o.degree())
    }

    /// `min d(a, K)` over outer roots; `None` when there are none.
    pub fn separation(&self) -> Option<f64> {
        self.separation
    }

    /// For a disk region: the smallest outer modulus after mapping the disk
    /// to the unit disk.
    pub fn disk_separation(&self) -> Option<f64> {
        let ConvexRegion::Disk { center, radius } = self.region else { return None };
        self.outer.as_ref().map(|o| {
            o.entries().iter().map(|e| (e.location - center).norm() / radius).fold(f64::INFINITY, f64::min)
        })
    }

    pub fn all_roots(&self) -> RootMultiset {
        match &self.outer {
            Some(o) => self.inner.union(o),
            None => self.inner.clone(),
        }
    }

    /// The same configuration with the disk region mapped to the unit disk.
    fn normalized_disk(&self) -> Result<SplitConfiguration, StabilityError> {
        let ConvexRegion::Disk { center, radius } = self.region else {
            return Err(StabilityError::InvalidConfiguration("region must be a disk".into()));
        };
        let to_unit = |z: ComplexPoint| (z - center) / radius;
        let inner = self.inner.map(to_unit)?;
        let outer = self.outer.as_ref().map(|o| o.map(to_unit)).transpose()?;
        // Rounding can push an inner root a hair outside the unit circle.
        let region = ConvexRegion::unit_disk();
        for e in inner.entries() {
            if !region.contains(e.location, MEMBERSHIP_TOLERANCE * (1.0 + e.location.norm()) * 4.0) {
                return Err(StabilityError::InvalidConfiguration("inner root outside disk".into()));
            }
        }
        let separation = outer.as_ref().map(|o| {
            o.entries().iter().map(|e| region.distance(e.location)).fold(f64::INFINITY, f64::min)
        });
        Ok(SplitConfiguration { region, inner, outer, separation })
    }
}

/// `1 + 2m/n`.
pub fn thm1_threshold(n: usize, m: usize) -> f64 {
    1.0 + 2.0 * m as f64 / n as f64
}

/// Lower bound on the modulus of the exterior critical points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarRadius {
    Strict(f64),
    /// `d` sits exactly on the threshold; the radius is exactly 1.
    BoundaryCase(f64),
}

impl FarRadius {
    pub fn value(self) -> f64 {
        match self {
            FarRadius::Strict(r) | FarRadius::BoundaryCase(r) => r,
        }
    }
}

/// `(dn - m)/(n + m)`, defined for `d >= 1 + 2m/n`.
pub fn thm1_far_radius(n: usize, m: usize, d: f64) -> Result<FarRadius, StabilityError> {
    let threshold = thm1_threshold(n, m);
    if (d - threshold).abs() <= 4.0 * f64::EPSILON * threshold {
        return Ok(FarRadius::BoundaryCase(1.0));
    }
    if d < threshold {
        return Err(StabilityError::HypothesisViolated { separation: d, threshold });
    }
    Ok(FarRadius::Strict(far_radius_formula(n, m, d)))
}

fn far_radius_formula(n: usize, m: usize, d: f64) -> f64 {
    (d * n as f64 - m as f64) / (n + m) as f64
}

/// `2 diam sqrt(m^2/n^2 + m/n)`.
pub fn thm2_threshold(n: usize, m: usize, diam: f64) -> f64 {
    let ratio = m as f64 / n as f64;
    2.0 * diam * (ratio * ratio + ratio).sqrt()
}

/// Distance from `K` within which the `n - 1` inner critical points lie.
pub fn thm2_near_bound(n: usize, m: usize, diam: f64) -> f64 {
    diam * (m as f64).sqrt() / ((m + n) as f64).sqrt()
}

/// Distance from `K` beyond which the `m` exterior critical points lie.
pub fn thm2_far_bound(n: usize, m: usize, diam: f64) -> f64 {
    diam * (m as f64 / (n + m) as f64).sqrt()
}

/// `Re 1/(x - r e^{it})` and `1/(x + 1)`; the first dominates for `x > 1`,
/// `r <= 1`, with equality at `(r, t) = (1, pi)`.
pub fn elementary_inequality(x: f64, r: f64, t: f64) -> (f64, f64) {
    let lhs = (1.0 / (ComplexPoint::new(x, 0.0) - ComplexPoint::from_polar(r, t))).re;
    (lhs, 1.0 / (x + 1.0))
}

/// `n / (|z| + 1)`: lower bound on `|sum 1/(z - a_k)|` for `n` roots in the
/// closed unit disk and `|z| > 1`.
pub fn field_lower_bound_disk(z: ComplexPoint, n: usize) -> Result<f64, StabilityError> {
    if !(z.norm() > 1.0) {
        return Err(StabilityError::OutsideDomain(format!("|z| = {} is not greater than 1", z.norm())));
    }
    Ok(n as f64 / (z.norm() + 1.0))
}

/// Lower bound on `|sum 1/(z - a_k)|` for `n` roots in `K` and `z` outside.
///
/// With `d = d(z, K)` and `D = diam(K)` this is `n d / (d^2 + D^2)` when
/// `d <= D` and `n / (d + D)` when `d > D`. The first expression alone is not
/// a valid bound for `d > D` (all roots at the far end of a segment already
/// break it).
pub fn field_lower_bound_convex(z: ComplexPoint, region: &ConvexRegion, n: usize) -> Result<f64, StabilityError> {
    let d = region.distance(z);
    if !(d > 0.0) {
        return Err(StabilityError::OutsideDomain(format!("{z} lies in the region")));
    }
    let diam = region.diameter();
    let n = n as f64;
    Ok(if d <= diam { n * d / (d * d + diam * diam) } else { n / (d + diam) })
}

/// `m / (d - measure(z))`: upper bound on the field of the outer roots.
///
/// For a disk region the measure is `|z - center|` and `d` the smallest outer
/// `|a - center|`; for a polygon they are `d(z, K)` and the separation.
pub fn field_upper_bound_outer(z: ComplexPoint, config: &SplitConfiguration) -> Result<f64, StabilityError> {
    let m = config.m();
    if m == 0 {
        return Ok(0.0);
    }
    let (measure, d) = match config.region() {
        ConvexRegion::Disk { center, .. } => (
            (z - center).norm(),
            config.outer_entries().iter().map(|e| (e.location - center).norm()).fold(f64::INFINITY, f64::min),
        ),
        region @ ConvexRegion::Polygon { .. } => (region.distance(z), config.separation().unwrap_or(f64::INFINITY)),
    };
    if !(measure < d) {
        return Err(StabilityError::OutsideDomain(format!("measure {measure} is not below the separation {d}")));
    }
    Ok(m as f64 / (d - measure))
}

/// Field of the inner roots, `sum m_k / (z - a_k)` over the inner group.
pub fn inner_field(config: &SplitConfiguration, z: ComplexPoint) -> Result<ComplexPoint, StabilityError> {
    Ok(log_derivative_sum(config.inner(), z)?)
}

/// Field of the outer roots (zero when there are none).
pub fn outer_field(config: &SplitConfiguration, z: ComplexPoint) -> Result<ComplexPoint, StabilityError> {
    match config.outer() {
        Some(o) => Ok(log_derivative_sum(o, z)?),
        None => Ok(ComplexPoint::new(0.0, 0.0)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Relative boundary band, scaled by `1 + |z|` at the region boundary.
    pub boundary_tolerance: f64,
    /// Extra inflation of the region before counting.
    pub inflation: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { boundary_tolerance: BOUNDARY_TOLERANCE, inflation: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub theorem: &'static str,
    pub n: usize,
    pub m: usize,
    pub hypothesis_satisfied: bool,
    /// Separation minus threshold; `None` without outer roots.
    pub hypothesis_margin: Option<f64>,
    pub predicted_inner_count: usize,
    pub predicted_outer_count: usize,
    /// Inner critical points lie within this measure of the region.
    pub predicted_near_bound: f64,
    /// Exterior critical points have at least this measure (`None` if `m = 0`).
    pub predicted_far_bound: Option<f64>,
    pub observed_inner_count: usize,
    pub observed_outer_count: usize,
    /// Smallest measure among exterior critical points (`None` if there are none).
    pub observed_min_outer_location_measure: Option<f64>,
    /// Critical points enclosed by the counting contour, by the argument principle.
    pub winding_inner_count: Option<i64>,
    pub boundary_band_count: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub critical_points: Vec<[f64; 2]>,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Certifies the unit-disk statement. Any disk is mapped to the unit disk
/// first.
pub fn certify_thm1(config: &SplitConfiguration, cfg: &RootFindConfig) -> Result<Certificate, StabilityError> {
    certify_thm1_with(config, cfg, &CertifyOptions::default())
}

pub fn certify_thm1_with(
    config: &SplitConfiguration,
    cfg: &RootFindConfig,
    opts: &CertifyOptions,
) -> Result<Certificate, StabilityError> {
    let (n, m) = (config.n(), config.m());
    if n < 2 {
        return Err(StabilityError::InvalidConfiguration("need at least two inner roots".into()));
    }
    let unit = config.normalized_disk()?;
    let mut notes = Vec::new();

    let d = unit.outer.as_ref().map(|o| o.entries().iter().map(|e| e.location.norm()).fold(f64::INFINITY, f64::min));
    let threshold = thm1_threshold(n, m);
    let (hypothesis_satisfied, hypothesis_margin, far_bound) = match d {
        None => (true, None, None),
        Some(d) => (d > threshold, Some(d - threshold), Some(far_radius_formula(n, m, d))),
    };
    if !hypothesis_satisfied {
        notes.push("hypothesis not met".to_string());
    }

    let roots = unit.all_roots();
    let cps = critical_points(&roots, cfg)?.all();
    let tol = opts.boundary_tolerance * 2.0;
    let radius = 1.0 + opts.inflation;
    let region = ConvexRegion::disk(ComplexPoint::new(0.0, 0.0), radius).expect("positive radius");
    let split = classify_points(&cps, &region, tol);
    let observed_inner = split.inside.len() + split.boundary.len();
    let observed_outer = split.outside.len();
    if !split.boundary.is_empty() {
        notes.push(format!("{} critical point(s) in the boundary band counted inside", split.boundary.len()));
    }
    let min_outer = split.outside.iter().map(|z| z.norm()).reduce(f64::min);

    let contour_radius = radius + tol;
    let winding = critical_count_inside(
        &roots,
        |t| ComplexPoint::from_polar(contour_radius, std::f64::consts::TAU * t),
        |a| a.norm() < contour_radius,
        cfg,
    );
    let winding_inner_count = match winding {
        Ok(k) => Some(k),
        Err(e) => {
            notes.push(format!("winding check failed: {e}"));
            None
        }
    };

    let far_ok = match (far_bound, min_outer) {
        (Some(bound), Some(obs)) => obs >= bound - tol,
        (None, None) => true,
        _ => observed_outer == m,
    };
    let counts_ok = observed_inner == n - 1 && observed_outer == m;
    let winding_ok = winding_inner_count == Some(observed_inner as i64);
    if winding_inner_count.is_some() && !winding_ok {
        notes.push("winding count disagrees with classification".to_string());
    }
    let pass = hypothesis_satisfied && counts_ok && far_ok && winding_ok;

    Ok(Certificate {
        theorem: "thm1",
        n,
        m,
        hypothesis_satisfied,
        hypothesis_margin,
        predicted_inner_count: n - 1,
        predicted_outer_count: m,
        predicted_near_bound: 1.0,
        predicted_far_bound: far_bound,
        observed_inner_count: observed_inner,
        observed_outer_count: observed_outer,
        observed_min_outer_location_measure: min_outer,
        winding_inner_count,
        boundary_band_count: split.boundary.len(),
        critical_points: cps.iter().map(|z| [z.re, z.im]).collect(),
        pass,
        notes,
    })
}

/// Certifies the convex-region statement on a disk or polygon.
pub fn certify_thm2(config: &SplitConfiguration, cfg: &RootFindConfig) -> Result<Certificate, StabilityError> {
    certify_thm2_with(config, cfg, &CertifyOptions::default())
}

pub fn certify_thm2_with(
    config: &SplitConfiguration,
    cfg: &RootFindConfig,
    opts: &CertifyOptions,
) -> Result<Certificate, StabilityError> {
    let (n, m) = (config.n(), config.m());
    if n < 2 {
        return Err(StabilityError::InvalidConfiguration("need at least two inner roots".into()));
    }
    let region = config.region();
    let diam = region.diameter();
    let mut notes = Vec::new();

    let threshold = thm2_threshold(n, m, diam);
    let (hypothesis_satisfied, hypothesis_margin) = match config.separation() {
        None => (true, None),
        Some(sep) => (sep >= threshold, Some(sep - threshold)),
    };
    if !hypothesis_satisfied {
        notes.push("hypothesis not met".to_string());
    }
    let near = thm2_near_bound(n, m, diam);
    let far = (m > 0).then(|| thm2_far_bound(n, m, diam));

    let roots = config.all_roots();
    let cps = critical_points(&roots, cfg)?.all();
    let (lo, hi) = region.bounding_box();
    let extent = lo.norm().max(hi.norm());
    let tol = opts.boundary_tolerance * (1.0 + extent + near);
    let reach = near + opts.inflation + tol;

    let mut inner_count = 0;
    let mut band = 0;
    let mut min_outer: Option<f64> = None;
    for z in &cps {
        let dz = region.distance(*z);
        if dz <= reach {
            inner_count += 1;
            if (dz - near - opts.inflation).abs() <= tol {
                band += 1;
            }
        } else {
            min_outer = Some(min_outer.map_or(dz, |v: f64| v.min(dz)));
        }
    }
    let outer_count = cps.len() - inner_count;
    if band > 0 {
        notes.push(format!("{band} critical point(s) in the boundary band counted inside"));
    }

    let winding = critical_count_inside(
        &roots,
        |t| region.offset_boundary_point(reach, t),
        |a| region.distance(a) < reach,
        cfg,
    );
    let winding_inner_count = match winding {
        Ok(k) => Some(k),
        Err(e) => {
            notes.push(format!("winding check failed: {e}"));
            None
        }
    };

    let far_ok = match (far, min_outer) {
        (Some(bound), Some(obs)) => obs >= bound - tol,
        (None, None) => true,
        _ => outer_count == m,
    };
    let counts_ok = inner_count == n - 1 && outer_count == m;
    let winding_ok = winding_inner_count == Some(inner_count as i64);
    if winding_inner_count.is_some() && !winding_ok {
        notes.push("winding count disagrees with classification".to_string());
    }
    let pass = hypothesis_satisfied && counts_ok && far_ok && winding_ok;

    Ok(Certificate {
        theorem: "thm2",
        n,
        m,
        hypothesis_satisfied,
        hypothesis_margin,
        predicted_inner_count: n - 1,
        predicted_outer_count: m,
        predicted_near_bound: near,
        predicted_far_bound: far,
        observed_inner_count: inner_count,
        observed_outer_count: outer_count,
        observed_min_outer_location_measure: min_outer,
        winding_inner_count,
        boundary_band_count: band,
        critical_points: cps.iter().map(|z| [z.re, z.im]).collect(),
        pass,
        notes,
    })
}

/// The extremal family `(z + 1)^n (z - d)^m` on the unit disk, with its
/// closed-form critical points `-1` (n - 1 times), `d` (m - 1 times) and
/// `(dn - m)/(n + m)`.
pub fn sharp_example(n: usize, m: usize, d: f64) -> Result<(SplitConfiguration, RootMultiset), StabilityError> {
    if n == 0 || m == 0 {
        return Err(StabilityError::InvalidConfiguration("n and m must be positive".into()));
    }
    if !(d > 1.0) {
        return Err(StabilityError::InvalidConfiguration(format!("d = {d} must exceed 1")));
    }
    let minus_one = ComplexPoint::new(-1.0, 0.0);
    let at_d = ComplexPoint::new(d, 0.0);
    let config = SplitConfiguration::new(
        ConvexRegion::unit_disk(),
        RootMultiset::new([(minus_one, n)])?,
        Some(RootMultiset::new([(at_d, m)])?),
    )?;
    let mut expected = Vec::new();
    if n > 1 {
        expected.push((minus_one, n - 1));
    }
    if m > 1 {
        expected.push((at_d, m - 1));
    }
    expected.push((ComplexPoint::new(far_radius_formula(n, m, d), 0.0), 1));
    Ok((config, RootMultiset::new(expected)?))
}

/// The simple critical point `(dn - m)/(n + m)` of the extremal family, as
/// computed by the critical point solver.
pub fn sharp_extremal_point(n: usize, m: usize, d: f64, cfg: &RootFindConfig) -> Result<ComplexPoint, StabilityError> {
    let (config, _) = sharp_example(n, m, d)?;
    let cps = critical_points(&config.all_roots(), cfg)?;
    cps.free
        .roots
        .first()
        .copied()
        .ok_or_else(|| StabilityError::InvalidConfiguration("no free critical point".into()))
}

/// Bisection on `d` for the point where the extremal critical point leaves
/// the unit disk. Returns the located `d`.
pub fn threshold_crossing(n: usize, m: usize, cfg: &RootFindConfig, width: f64) -> Result<f64, StabilityError> {
    let outside = |d: f64| -> Result<bool, StabilityError> { Ok(sharp_extremal_point(n, m, d, cfg)?.norm() > 1.0) };
    let mut lo = 1.0 + 1e-9;
    let mut hi = 2.0 * thm1_threshold(n, m);
    if outside(lo)? || !outside(hi)? {
        return Err(StabilityError::InvalidConfiguration("crossing not bracketed".into()));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if outside(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
