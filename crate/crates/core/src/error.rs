use thiserror::Error;

/// Failures raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point has no coordinates")]
    EmptyPoint,
    #[error("coordinate {index} has modulus {modulus}, outside the admissible open disc")]
    NotInDisc { index: usize, modulus: f64 },
    #[error("boundary coordinate {index} has modulus {modulus} > 1")]
    OutsideClosedDisc { index: usize, modulus: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("exponent {0} is not in [1, inf]")]
    InvalidExponent(f64),
    #[error("exponents (p={p}, q={q}, s={s}) do not satisfy 1/s = 1/p + 1/q with s < p, s < q")]
    InvalidTriple { p: f64, q: f64, s: f64 },
    #[error("transport requires q <= p (got p={p}, q={q})")]
    ExponentOrder { p: f64, q: f64 },
    #[error("point sequence is empty")]
    EmptySequence,
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("point is not a member of the sequence")]
    NotInSequence,
    #[error("invalid grid: n={n}, m={m}")]
    InvalidGrid { n: usize, m: usize },
    #[error("grid or search with {size} elements exceeds the cap {cap}")]
    ResourceCap { size: u128, cap: u128 },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("refinement did not converge: last m={m}, relative change {change}")]
    NotConverged { m: usize, change: f64 },
    #[error("Gram matrix is numerically singular (smallest eigenvalue {eigenvalue})")]
    NearSingularGram { eigenvalue: f64 },
    #[error("grid resolution {m} is insufficient for dyadic depth {depth}")]
    ResolutionTooLow { m: usize, depth: u32 },
    #[error("dual element {index} vanishes at its own point")]
    DegenerateDual { index: usize },
    #[error("no sign vector reached the target after {tried} samples")]
    SignSearchFailed { tried: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
