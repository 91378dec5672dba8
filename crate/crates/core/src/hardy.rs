//! Points of the polydisc, Hardy exponents, Szegő kernels and the Gleason
//! distance.
//!
//! Everything here is closed form. The reproducing kernel of `H²(𝔻ⁿ)` at `a`
//! is the product `k_a(z) = Π_j 1/(1 − ā_j z_j)`, and the conventional `H^p`
//! norm of `k_a` is `χ_a^{-1/p'}` with `χ_a = Π_j (1 − |a_j|²)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Coordinates closer than this to the unit circle are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// A point of the open polydisc `𝔻ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        for (index, c) in coords.iter().enumerate() {
            let modulus = c.norm();
            if !modulus.is_finite() || modulus >= 1.0 - BOUNDARY_MARGIN {
                return Err(Error::NotInDisc { index, modulus });
            }
        }
        Ok(Self { coords })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn origin(n: usize) -> Result<Self> {
        Self::new(alloc::vec![Complex64::new(0.0, 0.0); n])
    }

    /// `n` copies of the same coordinate.
    pub fn diagonal(n: usize, c: Complex64) -> Result<Self> {
        Self::new(alloc::vec![c; n])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// `χ_a = Π_j (1 − |a_j|²) = ‖k_a‖₂⁻²`.
    pub fn chi(&self) -> f64 {
        self.coords.iter().map(|c| 1.0 - c.norm_sqr()).product()
    }

    /// Applies `a_j ↦ e^{iφ_j} a_j`.
    pub fn rotated(&self, angles: &[f64]) -> Result<Self> {
        if angles.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: angles.len(),
            });
        }
        Self::new(
            self.coords
                .iter()
                .zip(angles)
                .map(|(c, &phi)| c * Complex64::from_polar(1.0, phi))
                .collect(),
        )
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        f.write_str(")")
    }
}

/// An exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self(p))
    }

    /// Builds the exponent whose reciprocal is `r ∈ [0, 1]`.
    pub fn from_reciprocal(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidExponent(1.0 / r));
        }
        if r == 0.0 {
            Ok(Self::INFINITY)
        } else {
            Ok(Self(1.0 / r))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        if self.0.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// `p'` with `1/p + 1/p' = 1`, `1' = ∞`, `∞' = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.0.is_infinite() {
            Self::ONE
        } else if self.0 == 1.0 {
            Self::INFINITY
        } else if self.0 == 2.0 {
            Self::TWO
        } else {
            Self(self.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

pub fn conjugate_exponent(p: Exponent) -> Exponent {
    p.conjugate()
}

/// Exponents with `1/s = 1/p + 1/q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderTriple {
    p: Exponent,
    q: Exponent,
    s: Exponent,
}

impl HolderTriple {
    pub fn new(p: Exponent, q: Exponent, s: Exponent) -> Result<Self> {
        let err = Error::InvalidTriple {
            p: p.value(),
            q: q.value(),
            s: s.value(),
        };
        if (s.recip() - p.recip() - q.recip()).abs() > 1e-12 || !(s < p) || !(s < q) {
            return Err(err);
        }
        Ok(Self { p, q, s })
    }

    /// Completes `(p, q)` with `s = (1/p + 1/q)⁻¹`; requires `s ≥ 1`.
    pub fn from_pq(p: Exponent, q: Exponent) -> Result<Self> {
        let r = p.recip() + q.recip();
        if r > 1.0 + 1e-15 || r == 0.0 {
            return Err(Error::InvalidTriple {
                p: p.value(),
                q: q.value(),
                s: 1.0 / r,
            });
        }
        let s = Exponent::from_reciprocal(r.min(1.0))?;
        Self::new(p, q, s)
    }

    pub fn p(&self) -> Exponent {
        self.p
    }
    pub fn q(&self) -> Exponent {
        self.q
    }
    pub fn s(&self) -> Exponent {
        self.s
    }
}

impl fmt::Display for HolderTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}, q={}, s={}", self.p, self.q, self.s)
    }
}

/// Raw `k_a` or the `H^p`-normalized `k_{a,p}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    Raw,
    Hp(Exponent),
}

/// Reproducing kernel at a base point, optionally normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    base: Point,
    normalization: Normalization,
}

impl KernelSpec {
    pub fn raw(base: Point) -> Self {
        Self {
            base,
            normalization: Normalization::Raw,
        }
    }

    pub fn normalized(base: Point, p: Exponent) -> Self {
        Self {
            base,
            normalization: Normalization::Hp(p),
        }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Multiplicative constant in front of `k_a`.
    pub fn scale(&self) -> f64 {
        match self.normalization {
            Normalization::Raw => 1.0,
            Normalization::Hp(p) => self.base.chi().powf(p.conjugate().recip()),
        }
    }

    /// Evaluates at `z` in the closed polydisc.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        check_closed(z, self.base.dim())?;
        Ok(self.eval_unchecked(z))
    }

    /// Evaluation without dimension or modulus checks.
    #[inline]
    pub fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        raw_kernel(&self.base, z) * self.scale()
    }
}

/// Checks that `z` has `n` coordinates in the closed unit disc.
pub fn check_closed(z: &[Complex64], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    for (index, c) in z.iter().enumerate() {
        let modulus = c.norm();
        if !(modulus <= 1.0 + 1e-12) {
            return Err(Error::OutsideClosedDisc { index, modulus });
        }
    }
    Ok(())
}

/// `k_a(z) = Π_j 1/(1 − ā_j z_j)`.
#[inline]
pub fn raw_kernel(a: &Point, z: &[Complex64]) -> Complex64 {
    let mut denom = Complex64::new(1.0, 0.0);
    for (aj, zj) in a.coords.iter().zip(z) {
        denom *= Complex64::new(1.0, 0.0) - aj.conj() * zj;
    }
    denom.inv()
}

pub fn eval_kernel(spec: &KernelSpec, z: &[Complex64]) -> Result<Complex64> {
    spec.eval(z)
}

/// `‖k_a‖_p = χ_a^{-1/p'}`; equals 1 at `p = 1`.
pub fn convention_norm(a: &Point, p: Exponent) -> f64 {
    a.chi().powf(-p.conjugate().recip())
}

pub fn chi_weight(a: &Point) -> f64 {
    a.chi()
}

/// One-variable Gleason distance `|(a − b)/(1 − āb)|`.
pub fn gleason_1d(a: Complex64, b: Complex64) -> f64 {
    ((a - b) / (Complex64::new(1.0, 0.0) - a.conj() * b)).norm()
}

/// Polydisc Gleason distance: maximum of the coordinate distances.
pub fn gleason_distance(a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.coords
        .iter()
        .zip(&b.coords)
        .map(|(&x, &y)| gleason_1d(x, y))
        .fold(0.0, f64::max))
}

/// A finite ordered sequence of distinct points of common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSequence {
    points: Vec<Point>,
    labels: Vec<String>,
}

impl PointSequence {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let labels = (0..points.len()).map(|i| format!("a{i}")).collect();
        Self::with_labels(points, labels)
    }

    pub fn with_labels(points: Vec<Point>, labels: Vec<String>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySequence)?;
        let n = first.dim();
        if labels.len() != points.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                found: labels.len(),
            });
        }
        for (i, p) in points.iter().enumerate() {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.dim(),
                });
            }
            for (j, q) in points[..i].iter().enumerate() {
                if gleason_distance(p, q)? == 0.0 {
                    return Err(Error::DuplicatePoint {
                        first: j,
                        second: i,
                    });
                }
            }
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, b: &Point) -> Option<usize> {
        self.points.iter().position(|p| p == b)
    }

    /// The first `count` points.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        let count = count.min(self.len());
        Self::with_labels(
            self.points[..count].to_vec(),
            self.labels[..count].to_vec(),
        )
    }

    /// The same sequence with one point appended.
    pub fn pushed(&self, point: Point) -> Result<Self> {
        let mut points = self.points.clone();
        let mut labels = self.labels.clone();
        labels.push(format!("a{}", points.len()));
        points.push(point);
        Self::with_labels(points, labels)
    }

    /// Smallest pairwise Gleason distance, or 1 for a singleton.
    pub fn min_separation(&self) -> f64 {
        let mut best = 1.0f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[..i] {
                best = best.min(gleason_distance(p, q).unwrap_or(0.0));
            }
        }
        best
    }
}

/// `Π_{a ∈ S, a ≠ b} d_G(a, b)`.
pub fn gleason_product(seq: &PointSequence, b: &Point) -> Result<f64> {
    let index = seq.position(b).ok_or(Error::NotInSequence)?;
    let mut product = 1.0;
    for (i, a) in seq.points().iter().enumerate() {
        if i != index {
            product *= gleason_distance(a, b)?;
        }
    }
    Ok(product)
}

/// `min_b Π_{a ≠ b} d_G(a, b)` over the whole sequence.
pub fn min_gleason_product(seq: &PointSequence) -> f64 {
    seq.points()
        .iter()
        .map(|b| gleason_product(seq, b).unwrap_or(0.0))
        .fold(1.0, f64::min)
}
