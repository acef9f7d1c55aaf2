//! Seeded random streams and samplers for experiments.
//!
//! Every stream is a ChaCha8 generator seeded with
//! `splitmix64(master ^ splitmix64(index + GOLDEN))`, so trial `i` of a suite
//! can be replayed from its derived seed alone, independently of how many
//! trials ran before it or on how many threads.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex_geom::ConvexRegion;
use crate::poly_core::ComplexPoint;

/// Recorded in reports so runs can be reproduced elsewhere.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8 (rand_chacha 0.3), stream seed = splitmix64(master ^ splitmix64(index + 0x9E3779B97F4A7C15))";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(GOLDEN)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(master: u64, index: u64) -> ChaCha8Rng {
    rng_from_seed(stream_seed(master, index))
}

pub fn random_direction<R: Rng>(rng: &mut R) -> ComplexPoint {
    ComplexPoint::from_polar(1.0, rng.gen_range(0.0..TAU))
}

pub fn uniform_in_disk<R: Rng>(rng: &mut R, center: ComplexPoint, radius: f64) -> ComplexPoint {
    center + ComplexPoint::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))
}

/// Uniform point in the region (rejection sampling for polygons).
pub fn uniform_in_region<R: Rng>(rng: &mut R, region: &ConvexRegion) -> ComplexPoint {
    match region {
        ConvexRegion::Disk { center, radius } => uniform_in_disk(rng, *center, *radius),
        ConvexRegion::Polygon { .. } => {
            let (lo, hi) = region.bounding_box();
            loop {
                let z = ComplexPoint::new(rng.gen_range(lo.re..=hi.re), rng.gen_range(lo.im..=hi.im));
                if region.contains(z, 0.0) {
                    return z;
                }
            }
        }
    }
}

/// Random strictly convex polygon with `vertices` corners: points on an
/// ellipse at sorted random angles (kept at least a tenth of the mean gap
/// apart), then rotated.
pub fn random_convex_polygon<R: Rng>(rng: &mut R, vertices: usize) -> ConvexRegion {
    assert!(vertices >= 3);
    let min_gap = 0.1 * TAU / vertices as f64;
    loop {
        let mut angles: Vec<f64> = (0..vertices).map(|_| rng.gen_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let wrap_gap = angles[0] + TAU - angles[vertices - 1];
        if angles.windows(2).any(|w| w[1] - w[0] < min_gap) || wrap_gap < min_gap {
            continue;
        }
        let stretch = rng.gen_range(0.4..1.0);
        let turn = random_direction(rng);
        let pts: Vec<ComplexPoint> = angles
            .iter()
            .map(|&a| ComplexPoint::new(a.cos(), stretch * a.sin()) * turn)
            .collect();
        if let Ok(poly) = ConvexRegion::polygon(pts) {
            return poly;
        }
    }
}
