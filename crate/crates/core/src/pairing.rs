//! Pairing of exterior roots with nearby critical points.
//!
//! For roots `z_1..z_n` in a convex region `K` and fixed exterior roots
//! `xi_1..xi_m`, once `n` is large each `xi_i` has exactly one simple critical
//! point at distance of order `1/n` (plus `mult(xi_i) - 1` critical points on
//! `xi_i` itself). Exterior critical points are located by Newton iteration
//! on the logarithmic derivative started next to each `xi_i`, and the count
//! is confirmed by the argument principle: around each `xi_i`, and around
//! the `diam(K) sqrt(m/(n+m))`-neighbourhood of `K` that holds the rest.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::convex_geom::ConvexRegion;
use crate::poly_core::{derivative, field_terms, CoefficientPoly, ComplexPoint, RootMultiset};
use crate::rng::{stream_rng, uniform_in_region};
use crate::root_finder::{aberth_all_roots, critical_count_inside, newton_refine_critical, RootFindConfig, RootFindError};
use crate::stability::{thm2_near_bound, SplitConfiguration, StabilityError};

/// Default lower limit on `n` for scaling scans.
pub const DEFAULT_N_FLOOR: usize = 50;

/// Distinct exterior roots must be this many expected pairing radii apart.
pub const SEPARATION_FACTOR: f64 = 10.0;

/// Largest `m` for which the assignment is solved exhaustively.
const EXHAUSTIVE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PairingError {
    #[error("n = {n}: expected {expected} critical point(s) {place}, found {found}")]
    CountMismatch { n: usize, expected: usize, found: i64, place: String },
    #[error("ambiguous pairing: {0}")]
    AmbiguousPairing(String),
    #[error("a scaling fit needs at least two schedule entries")]
    SingleSample,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("closed-form cross-check failed: max error {max_error:e}")]
    ClosedFormMismatch { max_error: f64 },
    #[error("solver failure: {0}")]
    SolverFailure(#[from] RootFindError),
    #[error(transparent)]
    Configuration(#[from] StabilityError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pair {
    pub xi: [f64; 2],
    pub critical: [f64; 2],
    pub distance: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    pub pairs: Vec<Pair>,
    /// Largest distance between an exterior root and its simple critical point.
    pub max_distance: f64,
    /// `max_distance * n`.
    pub estimated_c: f64,
    pub n: usize,
}

fn pt(z: ComplexPoint) -> [f64; 2] {
    [z.re, z.im]
}

/// Minimum-total-distance assignment of `xis[i]` to `cands[assign[i]]`.
/// Exhaustive for small inputs, greedy with pairwise-swap repair otherwise.
pub fn optimal_assignment(xis: &[ComplexPoint], cands: &[ComplexPoint]) -> Vec<usize> {
    assert_eq!(xis.len(), cands.len());
    let k = xis.len();
    let cost = |assign: &[usize]| -> f64 { assign.iter().enumerate().map(|(i, &j)| (xis[i] - cands[j]).norm()).sum() };
    if k <= EXHAUSTIVE_LIMIT {
        let mut best: (f64, Vec<usize>) = (f64::INFINITY, (0..k).collect());
        let mut perm: Vec<usize> = (0..k).collect();
        permute(&mut perm, 0, &mut |p| {
            let c = cost(p);
            if c < best.0 {
                best = (c, p.to_vec());
            }
        });
        return best.1;
    }
    let mut taken = vec![false; k];
    let mut assign = vec![usize::MAX; k];
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            edges.push(((xis[i] - cands[j]).norm(), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, i, j) in edges {
        if assign[i] == usize::MAX && !taken[j] {
            assign[i] = j;
            taken[j] = true;
        }
    }
    loop {
        let mut improved = false;
        for a in 0..k {
            for b in a + 1..k {
                let before = (xis[a] - cands[assign[a]]).norm() + (xis[b] - cands[assign[b]]).norm();
                let after = (xis[a] - cands[assign[b]]).norm() + (xis[b] - cands[assign[a]]).norm();
                if after < before - 1e-15 {
                    assign.swap(a, b);
                    improved = true;
                }
            }
        }
        if !improved {
            return assign;
        }
    }
}

fn permute<F: FnMut(&[usize])>(perm: &mut Vec<usize>, start: usize, visit: &mut F) {
    if start == perm.len() {
        visit(perm);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, visit);
        perm.swap(start, i);
    }
}

/// Finds, for every distinct exterior root, its paired simple critical point.
pub fn pair_critical_points(config: &SplitConfiguration, cfg: &RootFindConfig) -> Result<PairingReport, PairingError> {
    let n = config.n();
    let m = config.m();
    if m == 0 {
        return Ok(PairingReport { pairs: Vec::new(), max_distance: 0.0, estimated_c: 0.0, n });
    }
    let region = config.region();
    let roots = config.all_roots();
    let xis = config.outer_entries().to_vec();

    // first-order offsets mult(xi) / |rest of S at xi|
    let mut first_order = Vec::with_capacity(xis.len());
    for xi in &xis {
        let rest: ComplexPoint = roots
            .entries()
            .iter()
            .filter(|e| e.location != xi.location)
            .map(|e| e.multiplicity as f64 / (xi.location - e.location))
            .sum();
        first_order.push(xi.location - xi.multiplicity as f64 / rest);
    }
    let expected_radius = xis
        .iter()
        .zip(&first_order)
        .map(|(xi, z)| (xi.location - z).norm())
        .fold(0.0, f64::max);

    let mut radii = Vec::with_capacity(xis.len());
    for (i, xi) in xis.iter().enumerate() {
        let spacing = xis
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, o)| (o.location - xi.location).norm())
            .fold(f64::INFINITY, f64::min);
        if spacing < SEPARATION_FACTOR * expected_radius {
            return Err(PairingError::AmbiguousPairing(format!(
                "exterior roots {} apart, below {SEPARATION_FACTOR} x expected pairing radius {expected_radius:e}",
                spacing
            )));
        }
        radii.push(0.5 * region.distance(xi.location).min(spacing));
    }

    let mut criticals = Vec::with_capacity(xis.len());
    for (i, xi) in xis.iter().enumerate() {
        let a = xi.location;
        let delta = 0.5 * region.distance(a) / n as f64;
        let starts = [
            first_order[i],
            a + delta,
            a - delta,
            a + ComplexPoint::new(0.0, delta),
            a - ComplexPoint::new(0.0, delta),
        ];
        let mut best: Option<(f64, ComplexPoint)> = None;
        for s in starts {
            if (s - a).norm() >= radii[i] {
                continue;
            }
            let Ok(z) = newton_refine_critical(&roots, s, cfg) else { continue };
            if (z - a).norm() >= radii[i] {
                continue;
            }
            let (sv, _, scale) = field_terms(&roots, z);
            let residual = sv.norm() / scale.max(1.0);
            if best.map_or(true, |(r, _)| residual < r) {
                best = Some((residual, z));
            }
        }
        let Some((_, z)) = best else {
            return Err(PairingError::CountMismatch { n, expected: 1, found: 0, place: format!("near {a}") });
        };

        let radius = radii[i];
        let enclosed = critical_count_inside(
            &roots,
            |t| a + ComplexPoint::from_polar(radius, TAU * t),
            |w| (w - a).norm() < radius,
            cfg,
        )?;
        if enclosed != xi.multiplicity as i64 {
            return Err(PairingError::CountMismatch {
                n,
                expected: xi.multiplicity,
                found: enclosed,
                place: format!("within {radius:e} of {a}"),
            });
        }
        criticals.push(z);
    }

    let near = thm2_near_bound(n, m, region.diameter());
    let near_count = critical_count_inside(
        &roots,
        |t| region.offset_boundary_point(near, t),
        |w| region.distance(w) < near,
        cfg,
    )?;
    let exterior = (roots.degree() - 1) as i64 - near_count;
    if exterior != m as i64 {
        return Err(PairingError::CountMismatch { n, expected: m, found: exterior, place: "outside the region".into() });
    }

    let locations: Vec<ComplexPoint> = xis.iter().map(|e| e.location).collect();
    let assign = optimal_assignment(&locations, &criticals);
    if assign.iter().enumerate().any(|(i, &j)| i != j) {
        return Err(PairingError::AmbiguousPairing("nearest assignment disagrees with local search".into()));
    }

    let mut pairs = Vec::new();
    let mut max_distance: f64 = 0.0;
    for (xi, z) in xis.iter().zip(&criticals) {
        if xi.multiplicity > 1 {
            pairs.push(Pair { xi: pt(xi.location), critical: pt(xi.location), distance: 0.0, multiplicity: xi.multiplicity - 1 });
        }
        let distance = (xi.location - z).norm();
        max_distance = max_distance.max(distance);
        pairs.push(Pair { xi: pt(xi.location), critical: pt(*z), distance, multiplicity: 1 });
    }
    Ok(PairingReport { pairs, max_distance, estimated_c: max_distance * n as f64, n })
}

/// Source of inner roots for a given `n`.
pub trait InnerSampler: Sync {
    fn sample(&self, n: usize) -> Vec<ComplexPoint>;
}

/// Uniform points in a region; the stream for each `n` is derived from
/// `(seed, n)`.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    pub region: ConvexRegion,
    pub seed: u64,
}

impl InnerSampler for UniformSampler {
    fn sample(&self, n: usize) -> Vec<ComplexPoint> {
        let mut rng = stream_rng(self.seed, n as u64);
        (0..n).map(|_| uniform_in_region(&mut rng, &self.region)).collect()
    }
}

/// All `n` inner roots at one point.
#[derive(Debug, Clone, Copy)]
pub struct PointMassSampler(pub ComplexPoint);

impl InnerSampler for PointMassSampler {
    fn sample(&self, n: usize) -> Vec<ComplexPoint> {
        vec![self.0; n]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingResult {
    /// `(n, max_distance)`, sorted by `n`.
    pub samples: Vec<(usize, f64)>,
    pub loglog_slope: f64,
    pub loglog_intercept: f64,
}

impl ScalingResult {
    /// Ratio of the largest to smallest `max_distance * n` over the schedule.
    pub fn constant_spread(&self) -> f64 {
        let cs: Vec<f64> = self.samples.iter().map(|&(n, d)| d * n as f64).collect();
        let hi = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Runs [`pair_critical_points`] for each `n` of the schedule and fits
/// `log max_distance` against `log n`.
pub fn scaling_scan(
    region: &ConvexRegion,
    xis: &[ComplexPoint],
    sampler: &dyn InnerSampler,
    n_schedule: &[usize],
    cfg: &RootFindConfig,
    n_floor: usize,
) -> Result<ScalingResult, PairingError> {
    if n_schedule.len() < 2 {
        return Err(PairingError::SingleSample);
    }
    if n_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PairingError::InvalidSchedule("schedule must be strictly increasing".into()));
    }
    if n_schedule[0] < n_floor {
        return Err(PairingError::InvalidSchedule(format!("n = {} is below the floor {n_floor}", n_schedule[0])));
    }
    let outer = RootMultiset::from_points(xis).map_err(StabilityError::from)?;
    let samples: Vec<(usize, f64)> = n_schedule
        .par_iter()
        .map(|&n| {
            let inner = RootMultiset::from_points(&sampler.sample(n)).map_err(StabilityError::from)?;
            let config = SplitConfiguration::new(region.clone(), inner, Some(outer.clone()))?;
            let report = pair_critical_points(&config, cfg)?;
            Ok((n, report.max_distance))
        })
        .collect::<Result<_, PairingError>>()?;
    let logs: Vec<(f64, f64)> = samples.iter().map(|&(n, d)| ((n as f64).ln(), d.ln())).collect();
    let (loglog_slope, loglog_intercept) = fit_line(&logs);
    Ok(ScalingResult { samples, loglog_slope, loglog_intercept })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusResult {
    pub n: usize,
    pub min_distance_to_origin: f64,
    pub critical_moduli: Vec<f64>,
    /// Largest deviation from the closed-form modulus `(n + 1)^(-1/n)`.
    pub closed_form_error: f64,
}

/// Critical points of `z (z^n - 1)`: zeros of `(n + 1) z^n - 1`, all of
/// modulus `(n + 1)^(-1/n)`, none of them near the root at the origin.
pub fn annulus_counterexample(n: usize, cfg: &RootFindConfig) -> Result<AnnulusResult, PairingError> {
    if n < 2 {
        return Err(PairingError::InvalidSchedule("annulus example needs n >= 2".into()));
    }
    let mut coeffs = vec![ComplexPoint::new(0.0, 0.0); n + 2];
    coeffs[1] = ComplexPoint::new(-1.0, 0.0);
    coeffs[n + 1] = ComplexPoint::new(1.0, 0.0);
    let p = CoefficientPoly::new(coeffs).expect("monic");
    let dp = derivative(&p).expect("positive degree");
    let solved = aberth_all_roots(&dp, cfg)?;
    let critical_moduli: Vec<f64> = solved.roots.iter().map(|z| z.norm()).collect();
    let exact = ((n + 1) as f64).powf(-1.0 / n as f64);
    let closed_form_error = critical_moduli.iter().map(|r| (r - exact).abs()).fold(0.0, f64::max);
    if closed_form_error > 1e-10 {
        return Err(PairingError::ClosedFormMismatch { max_error: closed_form_error });
    }
    let min_distance_to_origin = critical_moduli.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AnnulusResult { n, min_distance_to_origin, critical_moduli, closed_form_error })
}
