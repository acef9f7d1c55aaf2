//! Simultaneous root finding (Aberth–Ehrlich), Newton refinement of critical
//! points straight from root form, and argument-principle zero counting.

use std::f64::consts::{FRAC_PI_2, TAU};

use thiserror::Error;

use crate::convex_geom::ConvexRegion;
use crate::poly_core::{field_terms, is_finite, CoefficientPoly, ComplexPoint, PolyError, RootEntry, RootMultiset, POLE_EXCLUSION};

/// Maximum bisection depth for a single phase increment.
pub const MAX_BISECTION_DEPTH: u32 = 20;

/// Relative radius under which converged roots are grouped into a cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootFindError {
    #[error("iteration did not converge after {} iterations", .0.iterations)]
    NotConverged(Box<RootSolveResult>),
    #[error("iterate {z} entered the pole-exclusion zone of {root}")]
    PoleCollision { z: ComplexPoint, root: ComplexPoint },
    #[error("function (nearly) vanishes on the contour: min {min_modulus:e}, max {max_modulus:e}")]
    ZeroOnContour { min_modulus: f64, max_modulus: f64 },
    #[error("phase increment unresolved at the bisection depth limit near t = {t}")]
    PhaseUnresolved { t: f64 },
    #[error("invalid root-finding configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootFindConfig {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub step_tolerance: f64,
    pub contour_samples: usize,
}

impl Default for RootFindConfig {
    fn default() -> Self {
        Self { max_iterations: 500, residual_tolerance: 1e-10, step_tolerance: 1e-12, contour_samples: 1024 }
    }
}

impl RootFindConfig {
    pub fn validate(&self) -> Result<(), RootFindError> {
        let in_range = |x: f64| x > 0.0 && x <= 1e-2;
        if self.max_iterations == 0 {
            return Err(RootFindError::InvalidConfig("max_iterations must be positive".into()));
        }
        if !in_range(self.residual_tolerance) || !in_range(self.step_tolerance) {
            return Err(RootFindError::InvalidConfig("tolerances must lie in (0, 1e-2]".into()));
        }
        if self.contour_samples < 64 {
            return Err(RootFindError::InvalidConfig("contour_samples must be at least 64".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSolveResult {
    pub roots: Vec<ComplexPoint>,
    /// Backward-error residual of each root (see the solver for the scale).
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Groups (by index) of roots within `CLUSTER_TOLERANCE * (1 + |z|)` of
    /// each other. Singletons are omitted.
    pub clusters: Vec<Vec<usize>>,
}

impl RootSolveResult {
    fn empty() -> Self {
        Self { roots: Vec::new(), residuals: Vec::new(), converged: true, iterations: 0, clusters: Vec::new() }
    }
}

/// Groups points closer than `rel_tol * (1 + |z|)` (transitively).
pub fn find_clusters(points: &[ComplexPoint], rel_tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= rel_tol * (1.0 + points[i].norm()) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups.retain(|g| g.len() > 1);
    groups
}

/// Aberth–Ehrlich iteration driven by a Newton-correction oracle.
///
/// `newton(z)` returns `(f(z) / f'(z), residual(z))`. Iteration is
/// Gauss–Seidel style: updated iterates are used immediately.
fn aberth_iterate<F>(mut z: Vec<ComplexPoint>, newton: F, cfg: &RootFindConfig) -> RootSolveResult
where
    F: Fn(ComplexPoint) -> (ComplexPoint, f64),
{
    let n = z.len();
    let mut done = vec![false; n];
    let mut prev_step = vec![f64::INFINITY; n];
    let mut iterations = 0;
    while iterations < cfg.max_iterations && done.iter().any(|d| !d) {
        iterations += 1;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (ratio, residual) = newton(z[k]);
            let repulsion: ComplexPoint = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            if !is_finite(ratio) {
                // f' vanished or underflowed: take the limit of the Aberth
                // step as ratio -> infinity, or nudge if that is undefined too
                let fallback = -1.0 / repulsion;
                let step = if is_finite(fallback) {
                    fallback
                } else {
                    -ComplexPoint::from_polar(1e-8 * (1.0 + z[k].norm()), 0.35 + k as f64)
                };
                z[k] -= step;
                prev_step[k] = f64::INFINITY;
                continue;
            }
            let mut step = ratio / (1.0 - ratio * repulsion);
            if !is_finite(step) {
                step = ratio;
            }
            z[k] -= step;
            let size = step.norm();
            if size <= cfg.step_tolerance * (1.0 + z[k].norm())
                || (residual <= cfg.residual_tolerance && size >= 0.9 * prev_step[k])
            {
                done[k] = true;
            }
            prev_step[k] = size;
        }
    }
    let residuals: Vec<f64> = z.iter().map(|&w| newton(w).1).collect();
    let converged = residuals.iter().all(|&r| r <= cfg.residual_tolerance);
    let clusters = find_clusters(&z, CLUSTER_TOLERANCE);
    RootSolveResult { roots: z, residuals, converged, iterations, clusters }
}

fn circle_start(center: ComplexPoint, radius: f64, count: usize) -> Vec<ComplexPoint> {
    (0..count)
        .map(|k| center + ComplexPoint::from_polar(radius, TAU * k as f64 / count as f64 + 0.35))
        .collect()
}

/// All roots of a coefficient polynomial.
///
/// Residuals are componentwise backward errors `|p(z)| / sum |c_k| |z|^k`.
pub fn aberth_all_roots(p: &CoefficientPoly, cfg: &RootFindConfig) -> Result<RootSolveResult, RootFindError> {
    cfg.validate()?;
    let deg = p.degree();
    if deg == 0 {
        return Err(PolyError::ConstantPolynomial.into());
    }
    let c = p.coeffs();
    let lead = p.leading();
    let mut radius = (c[0] / lead).norm().powf(1.0 / deg as f64) * 1.05;
    if !(radius > 0.0 && radius.is_finite()) {
        // Fujiwara bound
        radius = (1..=deg)
            .map(|k| {
                let ratio = (c[deg - k] / lead).norm();
                if k == deg { (ratio / 2.0).powf(1.0 / k as f64) } else { ratio.powf(1.0 / k as f64) }
            })
            .fold(0.0, f64::max)
            * 2.0;
        if radius == 0.0 {
            radius = 1.0;
        }
    }
    let start = circle_start(ComplexPoint::new(0.0, 0.0), radius, deg);
    let newton = |z: ComplexPoint| {
        let (v, dv) = p.eval_with_derivative(z);
        let scale = p.abs_eval(z);
        let residual = if scale > 0.0 { v.norm() / scale } else { 0.0 };
        let ratio = if v == ComplexPoint::new(0.0, 0.0) { v } else { v / dv };
        (ratio, residual)
    };
    let result = aberth_iterate(start, newton, cfg);
    if result.converged {
        Ok(result)
    } else {
        Err(RootFindError::NotConverged(Box::new(result)))
    }
}

/// Critical points of `prod (z - a_k)^{m_k}`, computed without expanding
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPointSet {
    /// Multiple roots; each is a critical point of multiplicity `m - 1`.
    pub on_roots: Vec<RootEntry>,
    /// Zeros of the logarithmic derivative `S`.
    pub free: RootSolveResult,
}

impl CriticalPointSet {
    /// Every critical point, repeated according to multiplicity.
    pub fn all(&self) -> Vec<ComplexPoint> {
        let mut out: Vec<ComplexPoint> = self
            .on_roots
            .iter()
            .flat_map(|e| std::iter::repeat(e.location).take(e.multiplicity))
            .collect();
        out.extend_from_slice(&self.free.roots);
        out
    }

    pub fn count(&self) -> usize {
        self.on_roots.iter().map(|e| e.multiplicity).sum::<usize>() + self.free.roots.len()
    }
}

/// Evaluates `g'/g` and the residual of `S` for the reduced derivative
/// `g = S * prod (z - a_j)` over distinct locations `a_j`.
///
/// The term of the nearest root is folded in analytically so the result
/// stays accurate (and finite) when `z` sits on a root.
fn reduced_derivative_ratio(roots: &RootMultiset, z: ComplexPoint) -> (ComplexPoint, f64) {
    let entries = roots.entries();
    let (j, _) = roots.nearest(z);
    let near = entries[j];
    let w = z - near.location;
    let zero = ComplexPoint::new(0.0, 0.0);
    let (mut s, mut ds, mut t, mut scale) = (zero, zero, zero, 0.0);
    for (k, e) in entries.iter().enumerate() {
        if k == j {
            continue;
        }
        let inv = 1.0 / (z - e.location);
        let m = e.multiplicity as f64;
        s += inv * m;
        ds -= inv * inv * m;
        t += inv;
        scale += m * inv.norm();
    }
    let mu = near.multiplicity as f64;
    let denom = mu + w * s;
    if denom == zero {
        // exactly on a zero of the reduced derivative
        return (zero, 0.0);
    }
    let log_deriv = t + (s + w * ds) / denom;
    let residual = (mu + w * s).norm() / (mu + w.norm() * scale).max(w.norm());
    (1.0 / log_deriv, residual)
}

/// Start points: one first-order estimate `a_j - m_j / S_j(a_j)` per distinct
/// root, dropping the least confident one.
fn pairing_start(roots: &RootMultiset) -> Vec<ComplexPoint> {
    let entries = roots.entries();
    let mut cands: Vec<(f64, ComplexPoint)> = entries
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let rest: ComplexPoint = entries
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, e)| e.multiplicity as f64 / (a.location - e.location))
                .sum();
            let shift = a.multiplicity as f64 / rest;
            (if is_finite(shift) { shift.norm() } else { f64::INFINITY }, a.location - shift)
        })
        .collect();
    cands.sort_by(|x, y| x.0.total_cmp(&y.0));
    cands.pop();
    let mut out: Vec<ComplexPoint> = Vec::with_capacity(cands.len());
    for (k, (_, z)) in cands.into_iter().enumerate() {
        let mut z = z;
        while out.iter().any(|&o| (o - z).norm() <= 1e-10 * (1.0 + z.norm())) {
            z += ComplexPoint::from_polar(1e-7 * (1.0 + z.norm()), 0.35 + k as f64);
        }
        out.push(z);
    }
    out
}

/// All `deg - 1` critical points of the polynomial with the given roots.
///
/// Multiple roots contribute themselves with multiplicity `m - 1`; the rest
/// are the zeros of `S`, found by Aberth iteration on the reduced derivative.
/// Free-root residuals are `|S(z)| / max(sum m_k / |z - a_k|, 1)`.
pub fn critical_points(roots: &RootMultiset, cfg: &RootFindConfig) -> Result<CriticalPointSet, RootFindError> {
    cfg.validate()?;
    let on_roots: Vec<RootEntry> = roots
        .entries()
        .iter()
        .filter(|e| e.multiplicity > 1)
        .map(|e| RootEntry { location: e.location, multiplicity: e.multiplicity - 1 })
        .collect();
    if roots.distinct_count() == 1 {
        return Ok(CriticalPointSet { on_roots, free: RootSolveResult::empty() });
    }
    let newton = |z: ComplexPoint| reduced_derivative_ratio(roots, z);
    let mut free = aberth_iterate(pairing_start(roots), newton, cfg);
    if !free.converged {
        let entries = roots.entries();
        let center = entries.iter().map(|e| e.location).sum::<ComplexPoint>() / entries.len() as f64;
        let radius = entries.iter().map(|e| (e.location - center).norm()).fold(0.0, f64::max);
        let retry = aberth_iterate(circle_start(center, radius, entries.len() - 1), newton, cfg);
        if retry.converged {
            free = retry;
        } else {
            return Err(RootFindError::NotConverged(Box::new(retry)));
        }
    }
    Ok(CriticalPointSet { on_roots, free })
}

/// Newton iteration on `S(z)` started at `start`. Steps are clamped to half the
/// distance to the nearest root.
pub fn newton_refine_critical(
    roots: &RootMultiset,
    start: ComplexPoint,
    cfg: &RootFindConfig,
) -> Result<ComplexPoint, RootFindError> {
    cfg.validate()?;
    let (i, dist) = roots.nearest(start);
    if dist < cfg.step_tolerance || dist < POLE_EXCLUSION * (1.0 + start.norm()) {
        return Err(RootFindError::PoleCollision { z: start, root: roots.entries()[i].location });
    }
    let mut z = start;
    let mut residual = f64::INFINITY;
    for iteration in 0..cfg.max_iterations {
        let (s, ds, scale) = field_terms(roots, z);
        residual = s.norm() / scale.max(1.0);
        let mut step = s / ds;
        if !is_finite(step) {
            break;
        }
        let (_, pole_dist) = roots.nearest(z);
        let limit = 0.5 * pole_dist;
        if step.norm() > limit {
            step = step * (limit / step.norm());
        }
        z -= step;
        let (k, d) = roots.nearest(z);
        if d < POLE_EXCLUSION * (1.0 + z.norm()) {
            return Err(RootFindError::PoleCollision { z, root: roots.entries()[k].location });
        }
        if residual <= cfg.residual_tolerance && step.norm() <= cfg.step_tolerance * (1.0 + z.norm()) {
            return Ok(z);
        }
        if iteration + 1 == cfg.max_iterations {
            let (s, _, scale) = field_terms(roots, z);
            residual = s.norm() / scale.max(1.0);
        }
    }
    Err(RootFindError::NotConverged(Box::new(RootSolveResult {
        roots: vec![z],
        residuals: vec![residual],
        converged: false,
        iterations: cfg.max_iterations,
        clusters: Vec::new(),
    })))
}

/// Winding number of `evaluator` around 0 along the closed contour
/// `t -> contour(t)`, `t` in `[0, 1]`.
pub fn winding_count_along<E, C>(evaluator: E, contour: C, cfg: &RootFindConfig) -> Result<i64, RootFindError>
where
    E: Fn(ComplexPoint) -> ComplexPoint,
    C: Fn(f64) -> ComplexPoint,
{
    cfg.validate()?;
    let n = cfg.contour_samples;
    let values: Vec<ComplexPoint> = (0..n).map(|i| evaluator(contour(i as f64 / n as f64))).collect();
    let mut min_mod = f64::INFINITY;
    let mut max_mod: f64 = 0.0;
    for v in &values {
        let m = v.norm();
        if !m.is_finite() {
            return Err(RootFindError::ZeroOnContour { min_modulus: m, max_modulus: m });
        }
        min_mod = min_mod.min(m);
        max_mod = max_mod.max(m);
    }
    if !(min_mod > 1e-10 * max_mod) {
        return Err(RootFindError::ZeroOnContour { min_modulus: min_mod, max_modulus: max_mod });
    }
    let floor = 1e-10 * max_mod;
    let mut total = 0.0;
    for i in 0..n {
        let t0 = i as f64 / n as f64;
        let t1 = (i + 1) as f64 / n as f64;
        total += phase_increment(&evaluator, &contour, t0, t1, values[i], values[(i + 1) % n], 0, floor)?;
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return Err(RootFindError::PhaseUnresolved { t: 0.0 });
    }
    Ok(rounded as i64)
}

#[allow(clippy::too_many_arguments)]
fn phase_increment<E, C>(
    evaluator: &E,
    contour: &C,
    t0: f64,
    t1: f64,
    f0: ComplexPoint,
    f1: ComplexPoint,
    depth: u32,
    floor: f64,
) -> Result<f64, RootFindError>
where
    E: Fn(ComplexPoint) -> ComplexPoint,
    C: Fn(f64) -> ComplexPoint,
{
    let delta = (f1 / f0).arg();
    if delta.abs() <= FRAC_PI_2 {
        return Ok(delta);
    }
    if depth >= MAX_BISECTION_DEPTH {
        return Err(RootFindError::PhaseUnresolved { t: t0 });
    }
    let tm = 0.5 * (t0 + t1);
    let fm = evaluator(contour(tm));
    let m = fm.norm();
    if !(m.is_finite() && m > floor) {
        return Err(RootFindError::ZeroOnContour { min_modulus: m, max_modulus: floor * 1e10 });
    }
    Ok(phase_increment(evaluator, contour, t0, tm, f0, fm, depth + 1, floor)?
        + phase_increment(evaluator, contour, tm, t1, fm, f1, depth + 1, floor)?)
}

/// Argument-principle count (zeros minus poles) inside the circle
/// `|z - center| = radius`.
pub fn winding_count<E>(evaluator: E, center: ComplexPoint, radius: f64, cfg: &RootFindConfig) -> Result<i64, RootFindError>
where
    E: Fn(ComplexPoint) -> ComplexPoint,
{
    if !(radius > 0.0) {
        return Err(RootFindError::InvalidConfig(format!("radius must be positive, got {radius}")));
    }
    winding_count_along(evaluator, |t| center + ComplexPoint::from_polar(radius, TAU * t), cfg)
}

/// `S(z)` divided by `sum m_k / |z - a_k|`. Same argument as `p'(z)/p(z)`,
/// modulus in `[0, 1]` measuring how much the field cancels. Finite up to
/// the roots themselves, where it returns NaN.
pub fn normalized_log_derivative(roots: &RootMultiset, z: ComplexPoint) -> ComplexPoint {
    let entries = roots.entries();
    let (j, dist) = roots.nearest(z);
    if dist == 0.0 {
        return ComplexPoint::new(f64::NAN, f64::NAN);
    }
    let near = entries[j];
    let w = z - near.location;
    let mut s = ComplexPoint::new(0.0, 0.0);
    let mut scale = 0.0;
    for (k, e) in entries.iter().enumerate() {
        if k != j {
            let inv = 1.0 / (z - e.location);
            s += inv * e.multiplicity as f64;
            scale += e.multiplicity as f64 * inv.norm();
        }
    }
    let mu = near.multiplicity as f64;
    (w.conj() / dist * mu + s * dist) / (mu + scale * dist)
}

/// Number of critical points (zeros of `p'`) enclosed by a contour: winding
/// of `p'/p` plus the roots of `p` enclosed. `encloses` decides which roots
/// lie inside the contour.
///
/// Every phase step is certified from the root distances, so features
/// smaller than the sample spacing cannot alias. The contour must be
/// traversed once, counterclockwise, by a map on `[0, 1)`.
pub fn critical_count_inside<C, I>(
    roots: &RootMultiset,
    contour: C,
    encloses: I,
    cfg: &RootFindConfig,
) -> Result<i64, RootFindError>
where
    C: Fn(f64) -> ComplexPoint,
    I: Fn(ComplexPoint) -> bool,
{
    cfg.validate()?;
    let n = cfg.contour_samples;
    let start = contour(0.0);
    let s_start = field_at(roots, start)?.0;
    let (mut z0, mut s0) = (start, s_start);
    let mut total = 0.0;
    for i in 0..n {
        let t0 = i as f64 / n as f64;
        let t1 = (i + 1) as f64 / n as f64;
        let (z1, s1) = if i + 1 == n { (start, s_start) } else {
            let z = contour(t1);
            (z, field_at(roots, z)?.0)
        };
        total += certified_increment(roots, &contour, (t0, z0, s0), (t1, z1, s1), 0)?;
        (z0, s0) = (z1, s1);
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return Err(RootFindError::PhaseUnresolved { t: 0.0 });
    }
    let poles: usize = roots.entries().iter().filter(|e| encloses(e.location)).map(|e| e.multiplicity).sum();
    Ok(rounded as i64 + poles as i64)
}

/// Depth limit for [`critical_count_inside`]; each level halves the step.
pub const CERTIFIED_BISECTION_DEPTH: u32 = 48;

/// `S(z)` and `sum m_k / |z - a_k|`, rejecting points where the normalized
/// field drops below `1e-10`.
fn field_at(roots: &RootMultiset, z: ComplexPoint) -> Result<(ComplexPoint, f64), RootFindError> {
    let mut s = ComplexPoint::new(0.0, 0.0);
    let mut scale = 0.0;
    for e in roots.entries() {
        let inv = 1.0 / (z - e.location);
        s += inv * e.multiplicity as f64;
        scale += e.multiplicity as f64 * inv.norm();
    }
    let m = s.norm();
    if !(scale.is_finite() && m > 1e-10 * scale) {
        return Err(RootFindError::ZeroOnContour { min_modulus: m / scale, max_modulus: 1.0 });
    }
    Ok((s, scale))
}

// Phase of S from t0 to t1. The piece of contour is assumed to lie within
// 4x the larger half-chord of its parameter midpoint (convex pieces turning
// by less than ~150 degrees). On that disk |S - S(zm)| is bounded through
// the root distances; below |S(zm)|/2 the phase change is exact.
fn certified_increment<C>(
    roots: &RootMultiset,
    contour: &C,
    (t0, z0, s0): (f64, ComplexPoint, ComplexPoint),
    (t1, z1, s1): (f64, ComplexPoint, ComplexPoint),
    depth: u32,
) -> Result<f64, RootFindError>
where
    C: Fn(f64) -> ComplexPoint,
{
    let tm = 0.5 * (t0 + t1);
    let zm = contour(tm);
    let (sm, _) = field_at(roots, zm)?;
    let h = 4.0 * (z0 - zm).norm().max((z1 - zm).norm());
    let mut variation = 0.0;
    let mut separated = true;
    for e in roots.entries() {
        let d = (zm - e.location).norm();
        if d <= h {
            separated = false;
            break;
        }
        variation += e.multiplicity as f64 * h / (d * (d - h));
    }
    if separated && variation <= 0.5 * sm.norm() {
        return Ok((s1 / sm).arg() + (sm / s0).arg());
    }
    if depth >= CERTIFIED_BISECTION_DEPTH {
        return Err(RootFindError::PhaseUnresolved { t: tm });
    }
    Ok(certified_increment(roots, contour, (t0, z0, s0), (tm, zm, sm), depth + 1)?
        + certified_increment(roots, contour, (tm, zm, sm), (t1, z1, s1), depth + 1)?)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Classification {
    pub inside: Vec<ComplexPoint>,
    pub outside: Vec<ComplexPoint>,
    pub boundary: Vec<ComplexPoint>,
}

/// Splits points by signed distance to the region boundary; anything within
/// `tol` of the boundary is `boundary`.
pub fn classify_points(points: &[ComplexPoint], region: &ConvexRegion, tol: f64) -> Classification {
    let mut out = Classification::default();
    for &z in points {
        let sd = region.signed_distance(z);
        if sd.abs() <= tol {
            out.boundary.push(z);
        } else if sd < 0.0 {
            out.inside.push(z);
        } else {
            out.outside.push(z);
        }
    }
    out
}

/// Greedy cluster-aware match of `found` against `expected` (both with
/// repetition). Returns the worst matched distance, or `None` on a count
/// mismatch.
pub fn match_points(expected: &[ComplexPoint], found: &[ComplexPoint]) -> Option<f64> {
    if expected.len() != found.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(expected.len() * found.len());
    for (i, &e) in expected.iter().enumerate() {
        for (j, &f) in found.iter().enumerate() {
            pairs.push(((e - f).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_e = vec![false; expected.len()];
    let mut used_f = vec![false; found.len()];
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if !used_e[i] && !used_f[j] {
            used_e[i] = true;
            used_f[j] = true;
            worst = worst.max(d);
            matched += 1;
            if matched == expected.len() {
                break;
            }
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_core::{derivative, from_roots};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(x: f64) -> ComplexPoint {
        ComplexPoint::new(x, 0.0)
    }

    fn sorted(mut v: Vec<ComplexPoint>) -> Vec<ComplexPoint> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn config_validation() {
        assert!(RootFindConfig::default().validate().is_ok());
        let bad = RootFindConfig { contour_samples: 10, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = RootFindConfig { residual_tolerance: 0.1, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn aberth_quadratic() {
        let p = CoefficientPoly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let r = aberth_all_roots(&p, &RootFindConfig::default()).unwrap();
        let roots = sorted(r.roots);
        assert!((roots[0] - real(-1.0)).norm() < 1e-12);
        assert!((roots[1] - real(1.0)).norm() < 1e-12);
    }

    #[test]
    fn aberth_sharp_derivative() {
        let r = RootMultiset::new([(real(-1.0), 2), (real(3.0), 1)]).unwrap();
        let dp = derivative(&from_roots(&r).unwrap()).unwrap();
        let sol = aberth_all_roots(&dp, &RootFindConfig::default()).unwrap();
        let roots = sorted(sol.roots);
        assert!((roots[0] - real(-1.0)).norm() < 1e-10);
        assert!((roots[1] - real(5.0 / 3.0)).norm() < 1e-10);
    }

    #[test]
    fn aberth_handles_zero_constant_term() {
        let p = CoefficientPoly::from_real(&[0.0, -1.0, 0.0, 1.0]).unwrap();
        let sol = aberth_all_roots(&p, &RootFindConfig::default()).unwrap();
        let roots = sorted(sol.roots);
        assert!((roots[0] - real(-1.0)).norm() < 1e-12);
        assert!(roots[1].norm() < 1e-12);
        assert!((roots[2] - real(1.0)).norm() < 1e-12);
    }

    #[test]
    fn aberth_reports_clusters() {
        let r = RootMultiset::new([(real(0.5), 2), (real(-2.0), 1), (ComplexPoint::new(0.0, 1.0), 1)]).unwrap();
        let sol = aberth_all_roots(&from_roots(&r).unwrap(), &RootFindConfig::default()).unwrap();
        assert_eq!(sol.clusters.len(), 1);
        assert_eq!(sol.clusters[0].len(), 2);
        for &i in &sol.clusters[0] {
            assert!((sol.roots[i] - real(0.5)).norm() < 1e-6);
        }
    }

    #[test]
    fn critical_points_of_sharp_example() {
        let r = RootMultiset::new([(real(-1.0), 2), (real(3.0), 1)]).unwrap();
        let cps = critical_points(&r, &RootFindConfig::default()).unwrap();
        assert_eq!(cps.on_roots, vec![RootEntry { location: real(-1.0), multiplicity: 1 }]);
        assert_eq!(cps.free.roots.len(), 1);
        assert!((cps.free.roots[0] - real(5.0 / 3.0)).norm() < 1e-14);
        assert_eq!(cps.count(), 2);
    }

    #[test]
    fn critical_points_single_location() {
        let r = RootMultiset::new([(real(2.0), 4)]).unwrap();
        let cps = critical_points(&r, &RootFindConfig::default()).unwrap();
        assert_eq!(cps.all(), vec![real(2.0); 3]);
    }

    #[test]
    fn critical_points_match_coefficient_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cfg = RootFindConfig::default();
        for _ in 0..20 {
            let pts: Vec<_> = (0..10)
                .map(|_| ComplexPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let r = RootMultiset::from_points(&pts).unwrap();
            let root_form = critical_points(&r, &cfg).unwrap().all();
            let coeff = aberth_all_roots(&derivative(&from_roots(&r).unwrap()).unwrap(), &cfg).unwrap().roots;
            assert!(match_points(&root_form, &coeff).unwrap() < 1e-8);
        }
    }

    #[test]
    fn newton_refine_examples() {
        let cfg = RootFindConfig::default();
        let r = RootMultiset::new([(real(-1.0), 2), (real(3.0), 1)]).unwrap();
        let z = newton_refine_critical(&r, real(1.5), &cfg).unwrap();
        assert!((z - real(5.0 / 3.0)).norm() < 1e-12);

        let r = RootMultiset::new([(real(0.0), 100), (real(3.0), 1)]).unwrap();
        let z = newton_refine_critical(&r, real(2.9), &cfg).unwrap();
        assert!((z - real(300.0 / 101.0)).norm() < 1e-12);

        let r = RootMultiset::new([(real(0.0), 1)]).unwrap();
        assert!(matches!(newton_refine_critical(&r, real(0.7), &cfg), Err(RootFindError::NotConverged(_))));
    }

    #[test]
    fn newton_refine_rejects_start_on_pole() {
        let r = RootMultiset::new([(real(0.0), 2), (real(3.0), 1)]).unwrap();
        let err = newton_refine_critical(&r, real(3.0), &RootFindConfig::default()).unwrap_err();
        assert!(matches!(err, RootFindError::PoleCollision { .. }));
    }

    #[test]
    fn newton_refine_is_idempotent() {
        let cfg = RootFindConfig::default();
        let r = RootMultiset::new([(ComplexPoint::new(0.1, 0.2), 3), (real(-0.4), 1), (ComplexPoint::new(2.5, 1.0), 1)]).unwrap();
        let z = newton_refine_critical(&r, ComplexPoint::new(2.3, 0.9), &cfg).unwrap();
        let again = newton_refine_critical(&r, z, &cfg).unwrap();
        assert!((again - z).norm() <= cfg.step_tolerance * (1.0 + z.norm()));
    }

    #[test]
    fn winding_examples() {
        let cfg = RootFindConfig::default();
        let origin = real(0.0);
        assert_eq!(winding_count(|z| z * z * z, origin, 2.0, &cfg).unwrap(), 3);

        let r = RootMultiset::new([(real(-1.0), 2), (real(3.0), 1)]).unwrap();
        let p = from_roots(&r).unwrap();
        let dp = derivative(&p).unwrap();
        assert_eq!(winding_count(|z| dp.eval(z), origin, 1.2, &cfg).unwrap(), 1);
        assert_eq!(winding_count(|z| p.eval(z), origin, 4.0, &cfg).unwrap(), 3);
        // 1/z: one pole
        assert_eq!(winding_count(|z| 1.0 / z, origin, 1.0, &cfg).unwrap(), -1);
    }

    #[test]
    fn winding_detects_zero_on_contour() {
        let cfg = RootFindConfig::default();
        let err = winding_count(|z| z - real(1.0), real(0.0), 1.0, &cfg).unwrap_err();
        assert!(matches!(err, RootFindError::ZeroOnContour { .. }));
    }

    #[test]
    fn winding_resolves_near_contour_zero() {
        // zero 1e-7 inside a unit circle needs several bisection levels
        let cfg = RootFindConfig { contour_samples: 64, ..Default::default() };
        let a = ComplexPoint::new(0.0, 1.0 - 1e-7);
        assert_eq!(winding_count(|z| z - a, real(0.0), 1.0, &cfg).unwrap(), 1);
    }

    #[test]
    fn critical_count_matches_closed_form() {
        let cfg = RootFindConfig::default();
        let r = RootMultiset::new([(real(-1.0), 2), (real(3.0), 1)]).unwrap();
        let center = real(0.0);
        let circle = |rad: f64| move |t: f64| center + ComplexPoint::from_polar(rad, TAU * t);
        // -1 (critical, multiplicity 1) inside radius 1.2; 5/3 outside
        assert_eq!(critical_count_inside(&r, circle(1.2), |a| a.norm() < 1.2, &cfg).unwrap(), 1);
        assert_eq!(critical_count_inside(&r, circle(2.0), |a| a.norm() < 2.0, &cfg).unwrap(), 2);
        assert_eq!(critical_count_inside(&r, circle(0.5), |a| a.norm() < 0.5, &cfg).unwrap(), 0);
    }

    #[test]
    fn classify_examples() {
        let disk = ConvexRegion::unit_disk();
        let c = classify_points(&[real(0.5), real(2.0), real(1.0)], &disk, 1e-9);
        assert_eq!(c.inside, vec![real(0.5)]);
        assert_eq!(c.outside, vec![real(2.0)]);
        assert_eq!(c.boundary, vec![real(1.0)]);

        let c = classify_points(&[real(-1.0), real(5.0 / 3.0)], &disk, 1e-9);
        assert_eq!(c.boundary, vec![real(-1.0)]);
        assert_eq!(c.outside, vec![real(5.0 / 3.0)]);
        assert!(c.inside.is_empty());

        assert_eq!(classify_points(&[], &disk, 1e-9), Classification::default());
    }

    #[test]
    fn cluster_grouping() {
        let pts = [real(0.0), real(1e-8), real(1.0), real(1.0 + 1e-9), real(5.0)];
        let groups = find_clusters(&pts, 1e-6);
        assert_eq!(groups, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn match_points_counts_clusters() {
        let exp = [real(-1.0), real(-1.0), real(2.0)];
        let got = [real(2.0 + 1e-12), real(-1.0 + 1e-13), real(-1.0 - 1e-13)];
        assert!(match_points(&exp, &got).unwrap() < 1e-11);
        assert!(match_points(&exp, &got[..2]).is_none());
    }

    #[test]
    fn critical_count_resolves_subsample_dipole() {
        // two roots 3e-3 apart just outside the unit circle pull a critical
        // point to within ~1e-4 of it; the gap is below the sample spacing
        let cfg = RootFindConfig::default();
        let r = RootMultiset::new([
            (real(0.0), 40),
            (ComplexPoint::from_polar(1.000001, 0.0015), 1),
            (ComplexPoint::from_polar(1.000001, -0.0015), 1),
        ])
        .unwrap();
        let cps = critical_points(&r, &cfg).unwrap().all();
        for rad in [0.9999, 0.99999, 1.0] {
            let inside = cps.iter().filter(|z| z.norm() < rad).count() as i64;
            let circle = |t: f64| ComplexPoint::from_polar(rad, TAU * t);
            assert_eq!(critical_count_inside(&r, circle, |a| a.norm() < rad, &cfg).unwrap(), inside, "radius {rad}");
        }
        assert!(cps.iter().any(|z| z.norm() > 0.9999 && z.norm() < 1.0));
    }
}
