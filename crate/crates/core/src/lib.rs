//! Critical points of complex polynomials and numeric certificates for the
//! stability form of the Gauss–Lucas theorem.
//!
//! Polynomials are carried in root form ([`poly_core::RootMultiset`]) and
//! critical points are computed as zeros of the logarithmic derivative
//! `S(z) = sum m_k / (z - a_k)`, which keeps degrees in the thousands
//! tractable. On top of that sit
//!
//! * [`stability`]: count and location certificates for roots split between a
//!   convex region and its exterior, the field bounds behind them, and the
//!   extremal family `(z + 1)^n (z - d)^m`;
//! * [`pairing`]: matching exterior roots with nearby critical points and
//!   measuring the `1/n` distance scaling;
//! * [`experiments`]: seeded suites, JSON/CSV reports and SVG plots used by
//!   the `gl-lab` binary.

pub mod convex_geom;
pub mod experiments;
pub mod pairing;
pub mod poly_core;
pub mod rng;
pub mod root_finder;
pub mod stability;

pub use convex_geom::{ConvexRegion, Hull};
pub use poly_core::{CoefficientPoly, ComplexPoint, RootEntry, RootMultiset};
pub use root_finder::RootFindConfig;
