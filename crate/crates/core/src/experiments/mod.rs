//! Seeded experiment suites and their reports.
//!
//! A suite is described by an [`ExperimentSpec`]; [`run_suite`] executes its
//! trials (in parallel, merged by trial index) and returns a [`SuiteReport`]
//! whose JSON form depends only on the spec. Trial `i` draws everything it
//! needs from the stream `stream_seed(spec.seed, i)`, so a failure can be
//! replayed from the recorded trial seed with [`run_trial`].

mod svg;

pub use svg::{render_svg, svg_document};

use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::convex_geom::{ConvexRegion, GeomError};
use crate::pairing::{annulus_counterexample, scaling_scan, PairingError, PointMassSampler, UniformSampler, DEFAULT_N_FLOOR};
use crate::poly_core::{ComplexPoint, RootMultiset};
use crate::rng::{random_convex_polygon, random_direction, rng_from_seed, stream_seed, uniform_in_region, RNG_DESCRIPTION};
use crate::root_finder::{critical_points, match_points, RootFindConfig, RootFindError};
use crate::stability::{
    certify_thm1, certify_thm2, sharp_example, thm1_threshold, thm2_threshold, threshold_crossing, Certificate,
    SplitConfiguration, StabilityError,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Separations tried by the sharpness scan (kept only above the threshold).
pub const SHARPNESS_SEPARATIONS: [f64; 5] = [1.5, 2.0, 3.0, 5.0, 10.0];
pub const SHARPNESS_TOLERANCE: f64 = 1e-9;
pub const CROSSING_TOLERANCE: f64 = 1e-9;
/// Accepted log-log slope window and constant spread for pairing scans.
pub const SLOPE_WINDOW: (f64, f64) = (-1.15, -0.85);
pub const MAX_CONSTANT_SPREAD: f64 = 20.0;
pub const ANNULUS_MIN_N: usize = 30;
pub const ANNULUS_MIN_DISTANCE: f64 = 0.9;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Region(#[from] GeomError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Solver(#[from] RootFindError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    Thm1Suite,
    Thm2Suite,
    SharpnessScan,
    PairingScan,
    Annulus,
    Plot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Disk statement, separation measured by modulus.
    Thm1,
    /// Convex statement, separation measured by distance to the region.
    Thm2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RegionSpec {
    UnitDisk,
    Polygon { vertices: Vec<[f64; 2]> },
    /// A fresh polygon with 4 to 10 vertices per trial.
    RandomPolygon,
}

impl RegionSpec {
    /// `disk`, `random-polygon`, or a path to a vertex file.
    pub fn parse(arg: &str) -> Result<Self, ExperimentError> {
        match arg {
            "disk" => Ok(Self::UnitDisk),
            "random-polygon" => Ok(Self::RandomPolygon),
            path => {
                let text = std::fs::read_to_string(path)?;
                let region = parse_polygon(&text)?;
                match region {
                    ConvexRegion::Polygon { vertices } => {
                        Ok(Self::Polygon { vertices: vertices.iter().map(|z| [z.re, z.im]).collect() })
                    }
                    ConvexRegion::Disk { .. } => unreachable!(),
                }
            }
        }
    }

    fn realize<R: Rng>(&self, rng: &mut R) -> Result<ConvexRegion, ExperimentError> {
        Ok(match self {
            Self::UnitDisk => ConvexRegion::unit_disk(),
            Self::Polygon { vertices } => {
                ConvexRegion::polygon(vertices.iter().map(|v| ComplexPoint::new(v[0], v[1])).collect())?
            }
            Self::RandomPolygon => {
                let k = rng.gen_range(4..=10);
                random_convex_polygon(rng, k)
            }
        })
    }
}

/// Polygon file: one `re im` pair per line, counterclockwise. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_polygon(text: &str) -> Result<ConvexRegion, ExperimentError> {
    let mut vertices = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| ExperimentError::InvalidSpec(format!("polygon line {}: {e}", lineno + 1)))?;
        if nums.len() != 2 {
            return Err(ExperimentError::InvalidSpec(format!("polygon line {}: expected two numbers", lineno + 1)));
        }
        vertices.push(ComplexPoint::new(nums[0], nums[1]));
    }
    Ok(ConvexRegion::polygon(vertices)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerKind {
    /// Uniform in the region.
    Uniform,
    /// All inner roots at the region's center.
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// A random configuration as in the certificate suites.
    Random,
    /// `(z + 1)^n (z - d)^m`.
    Sharp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: SuiteKind,
    pub seed: u64,
    pub trials: usize,
    /// Inclusive ranges, sampled uniformly per trial.
    pub n_range: [usize; 2],
    pub m_range: [usize; 2],
    pub region: RegionSpec,
    pub d_multiplier: [f64; 2],
    pub output_path: String,
    /// Degrees for pairing and annulus runs.
    pub n_schedule: Vec<usize>,
    /// Distance of the exterior roots from the region in pairing scans.
    pub xi_distance: f64,
    pub inner: InnerKind,
    pub figure: Figure,
}

impl ExperimentSpec {
    pub fn new(kind: SuiteKind) -> Self {
        let region = if kind == SuiteKind::Thm2Suite { RegionSpec::RandomPolygon } else { RegionSpec::UnitDisk };
        let (trials, n_range, m_range, d_multiplier) = match kind {
            SuiteKind::Thm1Suite => (1000, [5, 200], [1, 5], [1.01, 3.0]),
            SuiteKind::Thm2Suite => (500, [5, 200], [1, 5], [1.01, 3.0]),
            SuiteKind::SharpnessScan => (1, [1, 10], [1, 10], [1.0, 1.0]),
            SuiteKind::PairingScan => (20, [50, 1600], [1, 1], [1.0, 1.0]),
            SuiteKind::Annulus => (1, [30, 300], [0, 0], [1.0, 1.0]),
            SuiteKind::Plot => (1, [12, 12], [2, 2], [1.5, 1.5]),
        };
        let n_schedule = match kind {
            SuiteKind::PairingScan => vec![50, 100, 200, 400, 800, 1600],
            SuiteKind::Annulus => vec![30, 100, 300],
            _ => Vec::new(),
        };
        Self {
            kind,
            seed: 1,
            trials,
            n_range,
            m_range,
            region,
            d_multiplier,
            output_path: "gl-lab-out".into(),
            n_schedule,
            xi_distance: 3.0,
            inner: InnerKind::Uniform,
            figure: Figure::Random,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: &str| Err(ExperimentError::InvalidSpec(msg.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.n_range[0] > self.n_range[1] || self.m_range[0] > self.m_range[1] {
            return bad("empty n or m range");
        }
        let [dlo, dhi] = self.d_multiplier;
        if !(dlo > 0.0 && dlo <= dhi && dhi.is_finite()) {
            return bad("d multiplier must be a positive range");
        }
        match self.kind {
            SuiteKind::Thm1Suite | SuiteKind::Thm2Suite | SuiteKind::Plot if self.n_range[0] < 2 => {
                bad("certificates need n >= 2")
            }
            SuiteKind::Thm1Suite if self.region != RegionSpec::UnitDisk => bad("thm1 runs on the unit disk"),
            SuiteKind::SharpnessScan if self.n_range[0] == 0 || self.m_range[0] == 0 => bad("sharpness needs n, m >= 1"),
            SuiteKind::PairingScan if self.m_range[0] == 0 => bad("pairing needs m >= 1"),
            SuiteKind::PairingScan if !(self.xi_distance > 0.0) => bad("xi distance must be positive"),
            SuiteKind::PairingScan if self.n_schedule.len() < 2 => bad("pairing needs at least two schedule entries"),
            SuiteKind::Annulus if self.n_schedule.iter().any(|&n| n < 2) => bad("annulus needs n >= 2"),
            SuiteKind::Annulus if self.n_schedule.is_empty() => bad("empty annulus schedule"),
            _ => Ok(()),
        }
    }

    /// Thm suites below the threshold explore the failure frontier and are
    /// not expected to pass.
    pub fn exploratory(&self) -> bool {
        matches!(self.kind, SuiteKind::Thm1Suite | SuiteKind::Thm2Suite) && self.d_multiplier[0] < 1.0
    }

    pub fn pass_expected(&self) -> bool {
        self.kind != SuiteKind::Plot && !self.exploratory()
    }

    fn theorem(&self) -> Theorem {
        if self.kind == SuiteKind::Thm1Suite {
            Theorem::Thm1
        } else {
            Theorem::Thm2
        }
    }
}

/// Random split configuration: `n` inner roots uniform in `region`, `m`
/// exterior roots in uniformly random directions at separation
/// `d_multiplier` times the threshold of `theorem`.
///
/// For [`Theorem::Thm1`] the region must be a disk and the separation is the
/// normalized modulus `|a - c| / R`, clamped to at least `1 + 1e-6` so the
/// exterior roots stay outside. For [`Theorem::Thm2`] it is `d(a, K)`.
pub fn gen_random_config(
    seed: u64,
    n: usize,
    m: usize,
    region: &ConvexRegion,
    d_multiplier: f64,
    theorem: Theorem,
) -> Result<SplitConfiguration, ExperimentError> {
    let mut rng = rng_from_seed(seed);
    let inner: Vec<ComplexPoint> = (0..n).map(|_| uniform_in_region(&mut rng, region)).collect();
    let mut outer = Vec::with_capacity(m);
    for _ in 0..m {
        let u = random_direction(&mut rng);
        let a = match (theorem, region) {
            (Theorem::Thm1, ConvexRegion::Disk { center, radius }) => {
                let modulus = (d_multiplier * thm1_threshold(n, m)).max(1.0 + 1e-6);
                center + u * (radius * modulus)
            }
            (Theorem::Thm1, _) => return Err(ExperimentError::InvalidSpec("thm1 needs a disk region".into())),
            (Theorem::Thm2, _) => region.support_point(u) + u * (d_multiplier * thm2_threshold(n, m, region.diameter())),
        };
        outer.push(a);
    }
    let inner = RootMultiset::from_points(&inner).map_err(StabilityError::from)?;
    let outer = if m == 0 { None } else { Some(RootMultiset::from_points(&outer).map_err(StabilityError::from)?) };
    Ok(SplitConfiguration::new(region.clone(), inner, outer)?)
}

/// One certificate trial, summarized. Critical point lists are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateTrial {
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub d_multiplier: f64,
    pub region_vertices: Option<Vec<[f64; 2]>>,
    pub certificate: Option<Certificate>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessCase {
    pub d: f64,
    /// Worst per-point distance to the closed form (`None` on a count mismatch).
    pub max_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessTrial {
    pub index: usize,
    pub n: usize,
    pub m: usize,
    pub threshold: f64,
    pub cases: Vec<SharpnessCase>,
    pub crossing: Option<f64>,
    pub crossing_error: Option<f64>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingTrial {
    pub index: usize,
    pub seed: u64,
    pub m: usize,
    pub xis: Vec<[f64; 2]>,
    /// `(n, max_distance)` pairs.
    pub samples: Vec<(usize, f64)>,
    pub loglog_slope: Option<f64>,
    pub loglog_intercept: Option<f64>,
    /// Largest over smallest `max_distance * n` across the schedule.
    pub constant_spread: Option<f64>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusTrial {
    pub index: usize,
    pub n: usize,
    pub min_distance_to_origin: Option<f64>,
    pub closed_form: f64,
    pub closed_form_error: Option<f64>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRecord {
    pub index: usize,
    pub seed: u64,
    pub figure: Figure,
    pub n: usize,
    pub m: usize,
    pub roots: Vec<([f64; 2], usize)>,
    pub critical_points: Vec<[f64; 2]>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TrialRecord {
    Certificate(CertificateTrial),
    Sharpness(SharpnessTrial),
    Pairing(PairingTrial),
    Annulus(AnnulusTrial),
    Plot(PlotRecord),
}

impl TrialRecord {
    pub fn pass(&self) -> bool {
        match self {
            Self::Certificate(t) => t.pass,
            Self::Sharpness(t) => t.pass,
            Self::Pairing(t) => t.pass,
            Self::Annulus(t) => t.pass,
            Self::Plot(t) => t.pass,
        }
    }

    fn index(&self) -> usize {
        match self {
            Self::Certificate(t) => t.index,
            Self::Sharpness(t) => t.index,
            Self::Pairing(t) => t.index,
            Self::Annulus(t) => t.index,
            Self::Plot(t) => t.index,
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Self::Certificate(t) => Some(t.seed),
            Self::Pairing(t) => Some(t.seed),
            Self::Plot(t) => Some(t.seed),
            _ => None,
        }
    }

    fn failure_reason(&self) -> String {
        let error = match self {
            Self::Certificate(t) => t.error.clone().or_else(|| t.certificate.as_ref().map(|c| c.notes.join("; "))),
            Self::Sharpness(t) => t.error.clone(),
            Self::Pairing(t) => t.error.clone(),
            Self::Annulus(t) => t.error.clone(),
            Self::Plot(_) => None,
        };
        match error {
            Some(e) if !e.is_empty() => e,
            _ => "outside acceptance bounds".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub index: usize,
    pub seed: Option<u64>,
    pub reason: String,
    /// Extra CLI arguments that rerun only this trial.
    pub replay: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub trials: usize,
    pub passes: usize,
    pub pass_rate: f64,
    pub pass_expected: bool,
    pub exploratory: bool,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub rng: &'static str,
    pub results: Vec<TrialRecord>,
    pub aggregate: Aggregate,
    /// Seconds; written to the sidecar file only.
    #[serde(skip)]
    pub wall_time: f64,
    #[serde(skip)]
    pub svg: Option<String>,
}

impl SuiteReport {
    /// Report JSON without the wall time; byte-identical for identical specs.
    pub fn canonical_json(&self) -> Result<String, serde_json::Error> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn passed(&self) -> bool {
        self.aggregate.passes == self.aggregate.trials
    }
}

fn sample_range<R: Rng>(rng: &mut R, range: [usize; 2]) -> usize {
    rng.gen_range(range[0]..=range[1])
}

struct TrialSetup {
    n: usize,
    m: usize,
    d_multiplier: f64,
    config: SplitConfiguration,
}

fn trial_setup(spec: &ExperimentSpec, seed: u64) -> Result<TrialSetup, ExperimentError> {
    let mut rng = rng_from_seed(seed);
    let n = sample_range(&mut rng, spec.n_range);
    let m = sample_range(&mut rng, spec.m_range);
    let [lo, hi] = spec.d_multiplier;
    let d_multiplier = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    let region = spec.region.realize(&mut rng)?;
    let config = gen_random_config(rng.gen(), n, m, &region, d_multiplier, spec.theorem())?;
    Ok(TrialSetup { n, m, d_multiplier, config })
}

fn certificate_trial(spec: &ExperimentSpec, index: usize, seed: u64, cfg: &RootFindConfig) -> CertificateTrial {
    let mut trial = CertificateTrial {
        index,
        seed,
        n: 0,
        m: 0,
        d_multiplier: 0.0,
        region_vertices: None,
        certificate: None,
        error: None,
        pass: false,
    };
    let setup = match trial_setup(spec, seed) {
        Ok(s) => s,
        Err(e) => {
            trial.error = Some(e.to_string());
            return trial;
        }
    };
    trial.n = setup.n;
    trial.m = setup.m;
    trial.d_multiplier = setup.d_multiplier;
    if let ConvexRegion::Polygon { vertices } = setup.config.region() {
        trial.region_vertices = Some(vertices.iter().map(|z| [z.re, z.im]).collect());
    }
    let result = match spec.theorem() {
        Theorem::Thm1 => certify_thm1(&setup.config, cfg),
        Theorem::Thm2 => certify_thm2(&setup.config, cfg),
    };
    match result {
        Ok(mut cert) => {
            cert.critical_points.clear();
            trial.pass = cert.pass;
            trial.certificate = Some(cert);
        }
        Err(e) => trial.error = Some(e.to_string()),
    }
    trial
}

fn sharpness_trial(index: usize, n: usize, m: usize, cfg: &RootFindConfig) -> SharpnessTrial {
    let threshold = thm1_threshold(n, m);
    let mut trial = SharpnessTrial {
        index,
        n,
        m,
        threshold,
        cases: Vec::new(),
        crossing: None,
        crossing_error: None,
        error: None,
        pass: false,
    };
    let mut ok = true;
    for d in SHARPNESS_SEPARATIONS.into_iter().filter(|&d| d > threshold) {
        let max_error = sharp_example(n, m, d)
            .map_err(ExperimentError::from)
            .and_then(|(config, expected)| {
                let found = critical_points(&config.all_roots(), cfg)?.all();
                Ok(match_points(&expected.expanded(), &found))
            });
        match max_error {
            Ok(err) => {
                ok &= err.is_some_and(|e| e <= SHARPNESS_TOLERANCE);
                trial.cases.push(SharpnessCase { d, max_error: err });
            }
            Err(e) => {
                ok = false;
                trial.error = Some(e.to_string());
            }
        }
    }
    match threshold_crossing(n, m, cfg, 1e-11) {
        Ok(d) => {
            let err = (d - threshold).abs();
            ok &= err <= CROSSING_TOLERANCE;
            trial.crossing = Some(d);
            trial.crossing_error = Some(err);
        }
        Err(e) => {
            ok = false;
            trial.error = Some(e.to_string());
        }
    }
    trial.pass = ok;
    trial
}

/// Exterior roots for pairing scans: `m` equally spaced outward directions,
/// each at `xi_distance` from the region.
pub fn pairing_xis(region: &ConvexRegion, m: usize, xi_distance: f64) -> Vec<ComplexPoint> {
    (0..m)
        .map(|k| {
            let u = ComplexPoint::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64);
            region.support_point(u) + u * xi_distance
        })
        .collect()
}

fn pairing_trial(spec: &ExperimentSpec, index: usize, seed: u64, cfg: &RootFindConfig) -> PairingTrial {
    let mut rng = rng_from_seed(seed);
    let m = sample_range(&mut rng, spec.m_range);
    let mut trial = PairingTrial {
        index,
        seed,
        m,
        xis: Vec::new(),
        samples: Vec::new(),
        loglog_slope: None,
        loglog_intercept: None,
        constant_spread: None,
        error: None,
        pass: false,
    };
    let region = match spec.region.realize(&mut rng) {
        Ok(r) => r,
        Err(e) => {
            trial.error = Some(e.to_string());
            return trial;
        }
    };
    let xis = pairing_xis(&region, m, spec.xi_distance);
    trial.xis = xis.iter().map(|z| [z.re, z.im]).collect();
    let sampler_seed: u64 = rng.gen();
    let result = match spec.inner {
        InnerKind::Uniform => {
            let sampler = UniformSampler { region: region.clone(), seed: sampler_seed };
            scaling_scan(&region, &xis, &sampler, &spec.n_schedule, cfg, DEFAULT_N_FLOOR)
        }
        InnerKind::Center => {
            let center = region.centroid_hint();
            scaling_scan(&region, &xis, &PointMassSampler(center), &spec.n_schedule, cfg, DEFAULT_N_FLOOR)
        }
    };
    match result {
        Ok(res) => {
            let spread = res.constant_spread();
            trial.pass = (SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&res.loglog_slope) && spread <= MAX_CONSTANT_SPREAD;
            trial.loglog_slope = Some(res.loglog_slope);
            trial.loglog_intercept = Some(res.loglog_intercept);
            trial.constant_spread = Some(spread);
            trial.samples = res.samples;
        }
        Err(e) => trial.error = Some(e.to_string()),
    }
    trial
}

fn annulus_trial(index: usize, n: usize, cfg: &RootFindConfig) -> AnnulusTrial {
    let closed_form = ((n + 1) as f64).powf(-1.0 / n as f64);
    let mut trial = AnnulusTrial {
        index,
        n,
        min_distance_to_origin: None,
        closed_form,
        closed_form_error: None,
        error: None,
        pass: false,
    };
    match annulus_counterexample(n, cfg) {
        Ok(res) => {
            trial.pass = n < ANNULUS_MIN_N || res.min_distance_to_origin >= ANNULUS_MIN_DISTANCE;
            trial.min_distance_to_origin = Some(res.min_distance_to_origin);
            trial.closed_form_error = Some(res.closed_form_error);
        }
        Err(e) => trial.error = Some(e.to_string()),
    }
    trial
}

fn plot_configuration(spec: &ExperimentSpec, seed: u64) -> Result<(SplitConfiguration, usize, usize), ExperimentError> {
    match spec.figure {
        Figure::Sharp => {
            let (n, m) = (spec.n_range[0], spec.m_range[0].max(1));
            let d = spec.d_multiplier[0] * thm1_threshold(n, m);
            Ok((sharp_example(n, m, d)?.0, n, m))
        }
        Figure::Random => {
            let setup = trial_setup(spec, seed)?;
            Ok((setup.config, setup.n, setup.m))
        }
    }
}

fn plot_record(spec: &ExperimentSpec, seed: u64, cfg: &RootFindConfig) -> Result<(PlotRecord, String), ExperimentError> {
    let (config, n, m) = plot_configuration(spec, seed)?;
    let roots = config.all_roots();
    let cps = critical_points(&roots, cfg)?.all();
    let svg = svg_document(&config, &cps);
    let record = PlotRecord {
        index: 0,
        seed,
        figure: spec.figure,
        n,
        m,
        roots: roots.entries().iter().map(|e| ([e.location.re, e.location.im], e.multiplicity)).collect(),
        critical_points: cps.iter().map(|z| [z.re, z.im]).collect(),
        pass: true,
    };
    Ok((record, svg))
}

/// Runs trial `index` of a seeded suite from its derived `seed`. Only
/// certificate and pairing suites have per-trial seeds.
pub fn run_trial(spec: &ExperimentSpec, index: usize, seed: u64, cfg: &RootFindConfig) -> Result<TrialRecord, ExperimentError> {
    match spec.kind {
        SuiteKind::Thm1Suite | SuiteKind::Thm2Suite => Ok(TrialRecord::Certificate(certificate_trial(spec, index, seed, cfg))),
        SuiteKind::PairingScan => Ok(TrialRecord::Pairing(pairing_trial(spec, index, seed, cfg))),
        _ => Err(ExperimentError::InvalidSpec("only certificate and pairing suites replay by seed".into())),
    }
}

/// SVG of a certificate trial: its configuration and critical points.
pub fn trial_svg(spec: &ExperimentSpec, seed: u64, cfg: &RootFindConfig) -> Result<String, ExperimentError> {
    let setup = trial_setup(spec, seed)?;
    let cps = critical_points(&setup.config.all_roots(), cfg)?.all();
    Ok(svg_document(&setup.config, &cps))
}

fn with_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ExperimentError::InvalidSpec(format!("thread pool: {e}")))?;
    Ok(pool.install(work))
}

fn replay_args(spec: &ExperimentSpec, seed: u64) -> Option<String> {
    matches!(spec.kind, SuiteKind::Thm1Suite | SuiteKind::Thm2Suite | SuiteKind::PairingScan).then(|| format!("--replay {seed}"))
}

/// Assembles a report from records already ordered by index.
fn assemble(spec: &ExperimentSpec, results: Vec<TrialRecord>, svg: Option<String>, started: Instant) -> SuiteReport {
    let passes = results.iter().filter(|r| r.pass()).count();
    let failures = results
        .iter()
        .filter(|r| !r.pass())
        .map(|r| Failure {
            index: r.index(),
            seed: r.seed(),
            reason: r.failure_reason(),
            replay: r.seed().and_then(|s| replay_args(spec, s)),
        })
        .collect();
    let trials = results.len();
    SuiteReport {
        schema_version: SCHEMA_VERSION,
        spec: spec.clone(),
        rng: RNG_DESCRIPTION,
        aggregate: Aggregate {
            trials,
            passes,
            pass_rate: passes as f64 / trials as f64,
            pass_expected: spec.pass_expected(),
            exploratory: spec.exploratory(),
            failures,
        },
        results,
        wall_time: started.elapsed().as_secs_f64(),
        svg,
    }
}

/// Runs every trial of a suite on up to `jobs` threads (0 = all cores).
pub fn run_suite(spec: &ExperimentSpec, jobs: usize, cfg: &RootFindConfig) -> Result<SuiteReport, ExperimentError> {
    spec.validate()?;
    cfg.validate()?;
    let started = Instant::now();
    let (results, svg) = match spec.kind {
        SuiteKind::Thm1Suite | SuiteKind::Thm2Suite | SuiteKind::PairingScan => {
            let results: Vec<TrialRecord> = with_pool(jobs, || {
                (0..spec.trials)
                    .into_par_iter()
                    .map(|i| run_trial(spec, i, stream_seed(spec.seed, i as u64), cfg))
                    .collect::<Result<_, _>>()
            })??;
            let svg = if spec.kind == SuiteKind::PairingScan {
                None
            } else {
                let shown = results.iter().find(|r| !r.pass()).unwrap_or(&results[0]);
                shown.seed().map(|s| trial_svg(spec, s, cfg)).transpose().ok().flatten()
            };
            (results, svg)
        }
        SuiteKind::SharpnessScan => {
            let grid: Vec<(usize, usize)> = (spec.n_range[0]..=spec.n_range[1])
                .flat_map(|n| (spec.m_range[0]..=spec.m_range[1]).map(move |m| (n, m)))
                .collect();
            let results = with_pool(jobs, || {
                grid.par_iter()
                    .enumerate()
                    .map(|(i, &(n, m))| TrialRecord::Sharpness(sharpness_trial(i, n, m, cfg)))
                    .collect()
            })?;
            (results, None)
        }
        SuiteKind::Annulus => {
            let results = with_pool(jobs, || {
                spec.n_schedule
                    .par_iter()
                    .enumerate()
                    .map(|(i, &n)| TrialRecord::Annulus(annulus_trial(i, n, cfg)))
                    .collect()
            })?;
            (results, None)
        }
        SuiteKind::Plot => {
            let seed = stream_seed(spec.seed, 0);
            let (record, svg) = plot_record(spec, seed, cfg)?;
            (vec![TrialRecord::Plot(record)], Some(svg))
        }
    };
    Ok(assemble(spec, results, svg, started))
}

/// Report for a single replayed trial.
pub fn replay(spec: &ExperimentSpec, seed: u64, cfg: &RootFindConfig) -> Result<SuiteReport, ExperimentError> {
    spec.validate()?;
    let started = Instant::now();
    let record = run_trial(spec, 0, seed, cfg)?;
    let svg = match spec.kind {
        SuiteKind::PairingScan => None,
        _ => trial_svg(spec, seed, cfg).ok(),
    };
    Ok(assemble(spec, vec![record], svg, started))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn opt_i(x: Option<i64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Flat CSV projection: one row per result.
pub fn write_csv<W: io::Write>(report: &SuiteReport, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    let header: &[&str] = match report.spec.kind {
        SuiteKind::Thm1Suite | SuiteKind::Thm2Suite => &[
            "index", "seed", "n", "m", "d_multiplier", "hypothesis_margin", "predicted_inner", "observed_inner",
            "predicted_outer", "observed_outer", "winding_inner", "predicted_far_bound", "observed_min_outer",
            "boundary_band", "pass",
        ],
        SuiteKind::SharpnessScan => &["index", "n", "m", "threshold", "cases", "worst_error", "crossing", "crossing_error", "pass"],
        SuiteKind::PairingScan => &["index", "seed", "n", "max_distance", "estimated_c", "loglog_slope", "constant_spread", "pass"],
        SuiteKind::Annulus => &["index", "n", "min_distance_to_origin", "closed_form", "closed_form_error", "pass"],
        SuiteKind::Plot => &["kind", "re", "im", "multiplicity"],
    };
    w.write_record(header)?;
    for r in &report.results {
        match r {
            TrialRecord::Certificate(t) => {
                let c = t.certificate.as_ref();
                w.write_record([
                    t.index.to_string(),
                    t.seed.to_string(),
                    t.n.to_string(),
                    t.m.to_string(),
                    format!("{:e}", t.d_multiplier),
                    opt(c.and_then(|c| c.hypothesis_margin)),
                    c.map(|c| c.predicted_inner_count.to_string()).unwrap_or_default(),
                    c.map(|c| c.observed_inner_count.to_string()).unwrap_or_default(),
                    c.map(|c| c.predicted_outer_count.to_string()).unwrap_or_default(),
                    c.map(|c| c.observed_outer_count.to_string()).unwrap_or_default(),
                    opt_i(c.and_then(|c| c.winding_inner_count)),
                    opt(c.and_then(|c| c.predicted_far_bound)),
                    opt(c.and_then(|c| c.observed_min_outer_location_measure)),
                    c.map(|c| c.boundary_band_count.to_string()).unwrap_or_default(),
                    t.pass.to_string(),
                ])?;
            }
            TrialRecord::Sharpness(t) => {
                let worst = t
                    .cases
                    .iter()
                    .map(|c| c.max_error.unwrap_or(f64::INFINITY))
                    .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
                w.write_record([
                    t.index.to_string(),
                    t.n.to_string(),
                    t.m.to_string(),
                    format!("{:e}", t.threshold),
                    t.cases.len().to_string(),
                    opt(worst),
                    opt(t.crossing),
                    opt(t.crossing_error),
                    t.pass.to_string(),
                ])?;
            }
            TrialRecord::Pairing(t) => {
                for &(n, d) in &t.samples {
                    w.write_record([
                        t.index.to_string(),
                        t.seed.to_string(),
                        n.to_string(),
                        format!("{d:e}"),
                        format!("{:e}", d * n as f64),
                        opt(t.loglog_slope),
                        opt(t.constant_spread),
                        t.pass.to_string(),
                    ])?;
                }
                if t.samples.is_empty() {
                    w.write_record([t.index.to_string(), t.seed.to_string(), String::new(), String::new(), String::new(), String::new(), String::new(), t.pass.to_string()])?;
                }
            }
            TrialRecord::Annulus(t) => {
                w.write_record([
                    t.index.to_string(),
                    t.n.to_string(),
                    opt(t.min_distance_to_origin),
                    format!("{:e}", t.closed_form),
                    opt(t.closed_form_error),
                    t.pass.to_string(),
                ])?;
            }
            TrialRecord::Plot(t) => {
                for (z, mult) in &t.roots {
                    w.write_record(["root".to_string(), format!("{:e}", z[0]), format!("{:e}", z[1]), mult.to_string()])?;
                }
                for z in &t.critical_points {
                    w.write_record(["critical".to_string(), format!("{:e}", z[0]), format!("{:e}", z[1]), "1".to_string()])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn with_extension(base: &str, ext: &str) -> PathBuf {
    PathBuf::from(format!("{base}.{ext}"))
}

/// Writes `<out>.json`, `<out>.csv`, `<out>.svg` (when the suite has a
/// figure) and the `<out>.timing.json` sidecar. Returns the paths written.
pub fn write_outputs(report: &SuiteReport, out: &str) -> Result<Vec<PathBuf>, ExperimentError> {
    if let Some(parent) = Path::new(out).parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut written = Vec::new();
    let json = with_extension(out, "json");
    std::fs::write(&json, report.canonical_json()?)?;
    written.push(json);
    let csv_path = with_extension(out, "csv");
    write_csv(report, std::fs::File::create(&csv_path)?)?;
    written.push(csv_path);
    if let Some(svg) = &report.svg {
        let path = with_extension(out, "svg");
        std::fs::write(&path, svg)?;
        written.push(path);
    }
    let timing = with_extension(out, "timing.json");
    std::fs::write(&timing, serde_json::to_string(&serde_json::json!({ "wall_time_seconds": report.wall_time }))? + "\n")?;
    written.push(timing);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_config_is_deterministic() {
        let disk = ConvexRegion::unit_disk();
        let a = gen_random_config(9, 30, 3, &disk, 1.5, Theorem::Thm1).unwrap();
        let b = gen_random_config(9, 30, 3, &disk, 1.5, Theorem::Thm1).unwrap();
        assert_eq!(a.all_roots(), b.all_roots());
        let c = gen_random_config(10, 30, 3, &disk, 1.5, Theorem::Thm1).unwrap();
        assert_ne!(a.all_roots(), c.all_roots());
    }

    #[test]
    fn random_config_separation() {
        let disk = ConvexRegion::unit_disk();
        let config = gen_random_config(3, 40, 4, &disk, 1.5, Theorem::Thm1).unwrap();
        let expected = 1.5 * thm1_threshold(40, 4);
        for e in config.outer_entries() {
            assert!((e.location.norm() - expected).abs() < 1e-12);
        }
        for e in config.inner().entries() {
            assert!(e.location.norm() <= 1.0);
        }

        let mut rng = rng_from_seed(5);
        let poly = random_convex_polygon(&mut rng, 7);
        let config = gen_random_config(4, 40, 3, &poly, 1.2, Theorem::Thm2).unwrap();
        let expected = 1.2 * thm2_threshold(40, 3, poly.diameter());
        for e in config.outer_entries() {
            assert!((poly.distance(e.location) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn random_config_without_outer_roots() {
        let config = gen_random_config(1, 10, 0, &ConvexRegion::unit_disk(), 1.5, Theorem::Thm1).unwrap();
        assert!(config.outer().is_none());
        assert_eq!(config.separation(), None);
    }

    #[test]
    fn thm1_on_polygon_is_rejected() {
        let square = ConvexRegion::square(0.0, 0.0, 1.0).unwrap();
        assert!(gen_random_config(1, 10, 1, &square, 1.5, Theorem::Thm1).is_err());
    }

    #[test]
    fn polygon_file_format() {
        let poly = parse_polygon("# square\n0 0\n1 0\n\n1 1\n0 1\n").unwrap();
        assert!((poly.diameter() - 2f64.sqrt()).abs() < 1e-15);
        assert!(parse_polygon("0 0\n1 0 2\n").is_err());
        assert!(parse_polygon("0 0\n0 1\n1 1\n1 0\n").is_err());
    }

    #[test]
    fn small_suite_report() {
        let mut spec = ExperimentSpec::new(SuiteKind::Thm1Suite);
        spec.trials = 6;
        spec.n_range = [5, 30];
        let cfg = RootFindConfig::default();
        let a = run_suite(&spec, 2, &cfg).unwrap();
        let b = run_suite(&spec, 1, &cfg).unwrap();
        assert_eq!(a.canonical_json().unwrap(), b.canonical_json().unwrap());
        assert_eq!(a.svg, b.svg);
        assert_eq!(a.aggregate.pass_rate, 1.0);
        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }

    #[test]
    fn replay_matches_suite_trial() {
        let mut spec = ExperimentSpec::new(SuiteKind::Thm2Suite);
        spec.trials = 3;
        spec.n_range = [5, 20];
        let cfg = RootFindConfig::default();
        let report = run_suite(&spec, 0, &cfg).unwrap();
        let TrialRecord::Certificate(second) = &report.results[2] else { panic!() };
        let TrialRecord::Certificate(again) = run_trial(&spec, 2, second.seed, &cfg).unwrap() else { panic!() };
        assert_eq!(second, &again);
    }

    #[test]
    fn exploratory_flag() {
        let mut spec = ExperimentSpec::new(SuiteKind::Thm1Suite);
        spec.d_multiplier = [0.5, 0.9];
        assert!(spec.exploratory() && !spec.pass_expected());
        spec.d_multiplier = [0.0, 0.9];
        assert!(spec.validate().is_err());
    }
}
