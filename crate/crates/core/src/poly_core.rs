//! Complex polynomials in root form and coefficient form.
//!
//! Root form ([`RootMultiset`]) is the primary representation: every theorem
//! check works from the roots directly through the logarithmic derivative
//! `S(z) = sum m_k / (z - a_k)`. Coefficient form ([`CoefficientPoly`]) is
//! kept for small degrees, where expanding the product is still accurate.

use num_complex::Complex64;
use thiserror::Error;

/// A location in the complex plane.
pub type ComplexPoint = Complex64;

/// Largest degree [`from_roots`] will expand into coefficients.
pub const COEFFICIENT_EXPANSION_CAP: usize = 512;

/// Relative pole-exclusion radius used by the logarithmic-derivative routines.
pub const POLE_EXCLUSION: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("degree {degree} exceeds the coefficient expansion cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },
    #[error("constant polynomial has no derivative of lower degree")]
    ConstantPolynomial,
    #[error("evaluation point {z} lies on the root at {root}")]
    PoleHit { z: ComplexPoint, root: ComplexPoint },
    #[error("invalid root multiset: {0}")]
    InvalidRoots(String),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
}

pub fn is_finite(z: ComplexPoint) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// One distinct root location together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootEntry {
    pub location: ComplexPoint,
    pub multiplicity: usize,
}

/// Roots of a polynomial, with multiplicities. Determines the monic
/// polynomial `prod (z - a_k)^{m_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootMultiset {
    entries: Vec<RootEntry>,
    degree: usize,
}

impl RootMultiset {
    /// Builds a multiset from `(location, multiplicity)` pairs. Exactly equal
    /// locations are merged (first occurrence keeps its position).
    pub fn new<I>(entries: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (ComplexPoint, usize)>,
    {
        let mut merged: Vec<RootEntry> = Vec::new();
        for (location, multiplicity) in entries {
            if !is_finite(location) {
                return Err(PolyError::InvalidRoots(format!("non-finite location {location}")));
            }
            if multiplicity == 0 {
                return Err(PolyError::InvalidRoots(format!("zero multiplicity at {location}")));
            }
            match merged.iter_mut().find(|e| e.location == location) {
                Some(e) => e.multiplicity += multiplicity,
                None => merged.push(RootEntry { location, multiplicity }),
            }
        }
        let degree = merged.iter().map(|e| e.multiplicity).sum();
        if degree == 0 {
            return Err(PolyError::InvalidRoots("empty root multiset".into()));
        }
        Ok(Self { entries: merged, degree })
    }

    /// Each point is a simple root; repeated points merge.
    pub fn from_points(points: &[ComplexPoint]) -> Result<Self, PolyError> {
        Self::new(points.iter().map(|&z| (z, 1)))
    }

    pub fn entries(&self) -> &[RootEntry] {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn distinct_count(&self) -> usize {
        self.entries.len()
    }

    /// Locations repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<ComplexPoint> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat(e.location).take(e.multiplicity))
            .collect()
    }

    /// Union of two multisets.
    pub fn union(&self, other: &RootMultiset) -> RootMultiset {
        let pairs = self
            .entries
            .iter()
            .chain(other.entries.iter())
            .map(|e| (e.location, e.multiplicity));
        // Both inputs are valid, so the union is.
        RootMultiset::new(pairs).expect("union of valid multisets")
    }

    /// Applies `z -> f(z)` to every location, re-merging coincident images.
    pub fn map<F: Fn(ComplexPoint) -> ComplexPoint>(&self, f: F) -> Result<Self, PolyError> {
        Self::new(self.entries.iter().map(|e| (f(e.location), e.multiplicity)))
    }

    pub fn conj(&self) -> RootMultiset {
        self.map(|z| z.conj()).expect("conjugation keeps roots valid")
    }

    /// Index and distance of the entry nearest to `z`.
    pub fn nearest(&self, z: ComplexPoint) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, e) in self.entries.iter().enumerate() {
            let d = (z - e.location).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    fn check_pole(&self, z: ComplexPoint) -> Result<(), PolyError> {
        let (i, dist) = self.nearest(z);
        if dist < POLE_EXCLUSION * (1.0 + z.norm()) {
            return Err(PolyError::PoleHit { z, root: self.entries[i].location });
        }
        Ok(())
    }
}

/// Dense polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPoly {
    coeffs: Vec<ComplexPoint>,
}

impl CoefficientPoly {
    pub fn new(coeffs: Vec<ComplexPoint>) -> Result<Self, PolyError> {
        match coeffs.last() {
            None => Err(PolyError::InvalidCoefficients("empty coefficient list".into())),
            Some(lead) if lead.norm() == 0.0 => {
                Err(PolyError::InvalidCoefficients("leading coefficient is zero".into()))
            }
            Some(_) if coeffs.iter().any(|&c| !is_finite(c)) => {
                Err(PolyError::InvalidCoefficients("non-finite coefficient".into()))
            }
            Some(_) => Ok(Self { coeffs }),
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, PolyError> {
        Self::new(coeffs.iter().map(|&c| ComplexPoint::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[ComplexPoint] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> ComplexPoint {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation of `p(z)`.
    pub fn eval(&self, z: ComplexPoint) -> ComplexPoint {
        self.coeffs.iter().rev().fold(ComplexPoint::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `p(z)` and `p'(z)` in one Horner pass.
    pub fn eval_with_derivative(&self, z: ComplexPoint) -> (ComplexPoint, ComplexPoint) {
        let zero = ComplexPoint::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |c_k| |z|^k`, the scale of rounding error in [`Self::eval`].
    pub fn abs_eval(&self, z: ComplexPoint) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }
}

/// Expands `prod (z - a_k)^{m_k}` into a monic coefficient polynomial.
pub fn from_roots(roots: &RootMultiset) -> Result<CoefficientPoly, PolyError> {
    let degree = roots.degree();
    if degree > COEFFICIENT_EXPANSION_CAP {
        return Err(PolyError::DegreeCapExceeded { degree, cap: COEFFICIENT_EXPANSION_CAP });
    }
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(ComplexPoint::new(1.0, 0.0));
    for a in roots.expanded() {
        // multiply by (z - a)
        coeffs.push(ComplexPoint::new(0.0, 0.0));
        for k in (1..coeffs.len()).rev() {
            coeffs[k] = coeffs[k - 1] - a * coeffs[k];
        }
        coeffs[0] = -a * coeffs[0];
    }
    CoefficientPoly::new(coeffs)
}

pub fn derivative(p: &CoefficientPoly) -> Result<CoefficientPoly, PolyError> {
    if p.degree() == 0 {
        return Err(PolyError::ConstantPolynomial);
    }
    let coeffs = p.coeffs[1..]
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (k as f64 + 1.0))
        .collect();
    CoefficientPoly::new(coeffs)
}

pub fn evaluate(p: &CoefficientPoly, z: ComplexPoint) -> ComplexPoint {
    p.eval(z)
}

/// `S(z) = sum m_k / (z - a_k)`, which equals `p'(z) / p(z)`.
pub fn log_derivative_sum(roots: &RootMultiset, z: ComplexPoint) -> Result<ComplexPoint, PolyError> {
    roots.check_pole(z)?;
    Ok(roots
        .entries()
        .iter()
        .map(|e| e.multiplicity as f64 / (z - e.location))
        .sum())
}

/// `S'(z) = -sum m_k / (z - a_k)^2`.
pub fn log_derivative_prime(roots: &RootMultiset, z: ComplexPoint) -> Result<ComplexPoint, PolyError> {
    roots.check_pole(z)?;
    Ok(-roots
        .entries()
        .iter()
        .map(|e| {
            let w = z - e.location;
            e.multiplicity as f64 / (w * w)
        })
        .sum::<ComplexPoint>())
}

/// `S(z)`, `S'(z)` and the cancellation scale `sum m_k / |z - a_k|` in one
/// pass. The caller is responsible for staying off the poles.
pub(crate) fn field_terms(roots: &RootMultiset, z: ComplexPoint) -> (ComplexPoint, ComplexPoint, f64) {
    let mut s = ComplexPoint::new(0.0, 0.0);
    let mut ds = ComplexPoint::new(0.0, 0.0);
    let mut scale = 0.0;
    for e in roots.entries() {
        let inv = 1.0 / (z - e.location);
        let m = e.multiplicity as f64;
        s += inv * m;
        ds -= inv * inv * m;
        scale += m * inv.norm();
    }
    (s, ds, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    fn real(x: f64) -> ComplexPoint {
        c(x, 0.0)
    }

    #[test]
    fn merge_duplicates_on_construction() {
        let r = RootMultiset::new([(real(1.0), 1), (real(2.0), 2), (real(1.0), 3)]).unwrap();
        assert_eq!(r.distinct_count(), 2);
        assert_eq!(r.degree(), 6);
        assert_eq!(r.entries()[0], RootEntry { location: real(1.0), multiplicity: 4 });
    }

    #[test]
    fn rejects_bad_roots() {
        assert!(RootMultiset::new([(real(1.0), 0)]).is_err());
        assert!(RootMultiset::new(Vec::<(ComplexPoint, usize)>::new()).is_err());
        assert!(RootMultiset::new([(c(f64::NAN, 0.0), 1)]).is_err());
    }

    #[test]
    fn expand_two_roots() {
        let p = from_roots(&RootMultiset::from_points(&[real(1.0), real(-1.0)]).unwrap()).unwrap();
        assert_eq!(p.coeffs(), &[real(-1.0), real(0.0), real(1.0)]);
    }

    #[test]
    fn expand_double_root() {
        let r = RootMultiset::new([(real(-1.0), 2), (real(3.0), 1)]).unwrap();
        let p = from_roots(&r).unwrap();
        assert_eq!(p.coeffs(), &[real(-3.0), real(-5.0), real(-1.0), real(1.0)]);
        for a in r.expanded() {
            assert!(p.eval(a).norm() <= 1e-8 * p.max_coeff_modulus());
        }
    }

    #[test]
    fn expand_single_root() {
        let a = c(0.3, -1.7);
        let p = from_roots(&RootMultiset::from_points(&[a]).unwrap()).unwrap();
        assert_eq!(p.coeffs(), &[-a, real(1.0)]);
    }

    #[test]
    fn expansion_cap() {
        let r = RootMultiset::new([(real(0.5), COEFFICIENT_EXPANSION_CAP + 1)]).unwrap();
        assert!(matches!(from_roots(&r), Err(PolyError::DegreeCapExceeded { .. })));
        let r = RootMultiset::new([(real(0.5), COEFFICIENT_EXPANSION_CAP)]).unwrap();
        assert_eq!(from_roots(&r).unwrap().degree(), COEFFICIENT_EXPANSION_CAP);
    }

    #[test]
    fn derivative_examples() {
        let p = CoefficientPoly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(derivative(&p).unwrap().coeffs(), &[real(0.0), real(2.0)]);

        let p = CoefficientPoly::from_real(&[-3.0, -5.0, -1.0, 1.0]).unwrap();
        let dp = derivative(&p).unwrap();
        assert_eq!(dp.coeffs(), &[real(-5.0), real(-2.0), real(3.0)]);
        // (z + 1)(3z - 5)
        assert!(dp.eval(real(-1.0)).norm() < 1e-14);
        assert!(dp.eval(real(5.0 / 3.0)).norm() < 1e-14);

        let k = CoefficientPoly::from_real(&[4.0]).unwrap();
        assert_eq!(derivative(&k), Err(PolyError::ConstantPolynomial));
    }

    #[test]
    fn horner_examples() {
        let p = CoefficientPoly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(evaluate(&p, real(2.0)), real(3.0));
        let q = CoefficientPoly::from_real(&[-3.0, -5.0, -1.0, 1.0]).unwrap();
        let v = evaluate(&q, real(5.0 / 3.0));
        assert!((v - real(-256.0 / 27.0)).norm() < 1e-13);
        let (val, der) = q.eval_with_derivative(real(2.0));
        assert_eq!(val, q.eval(real(2.0)));
        assert_eq!(der, derivative(&q).unwrap().eval(real(2.0)));
    }

    #[test]
    fn log_derivative_examples() {
        let r = RootMultiset::from_points(&[real(0.0)]).unwrap();
        assert_eq!(log_derivative_sum(&r, real(2.0)).unwrap(), real(0.5));
        assert_eq!(log_derivative_prime(&r, real(2.0)).unwrap(), real(-0.25));

        let r = RootMultiset::from_points(&[real(0.0), real(1.0)]).unwrap();
        assert_eq!(log_derivative_prime(&r, real(2.0)).unwrap(), real(-1.25));

        let r = RootMultiset::new([(real(-1.0), 2), (real(3.0), 1)]).unwrap();
        assert!(log_derivative_sum(&r, real(5.0 / 3.0)).unwrap().norm() < 1e-15);

        for n in [1usize, 7, 40] {
            let r = RootMultiset::new([(real(-1.0), n)]).unwrap();
            for x in [1.5, 2.0, 9.0] {
                let s = log_derivative_sum(&r, real(x)).unwrap();
                assert_eq!(s, real(n as f64 / (x + 1.0)));
            }
        }
    }

    #[test]
    fn pole_hit() {
        let r = RootMultiset::from_points(&[c(1.0, 1.0)]).unwrap();
        assert!(matches!(log_derivative_sum(&r, c(1.0, 1.0)), Err(PolyError::PoleHit { .. })));
        assert!(matches!(log_derivative_prime(&r, c(1.0, 1.0 + 1e-16)), Err(PolyError::PoleHit { .. })));
    }

    #[test]
    fn prime_matches_central_difference() {
        let r = RootMultiset::new([(c(0.2, 0.1), 2), (c(-0.5, 0.4), 1), (c(1.5, -1.0), 3)]).unwrap();
        let h = 1e-6;
        for z in [c(2.0, 1.0), c(-1.0, -1.5), c(0.3, 2.2)] {
            let fd = (log_derivative_sum(&r, z + h).unwrap() - log_derivative_sum(&r, z - h).unwrap()) / (2.0 * h);
            let exact = log_derivative_prime(&r, z).unwrap();
            assert!((fd - exact).norm() <= 1e-7 * (1.0 + exact.norm()), "{fd} vs {exact}");
        }
    }
}
