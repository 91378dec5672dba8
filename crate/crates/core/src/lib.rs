//! Numerical laboratory for Hardy-space interpolation on the polydisc `𝔻ⁿ`.
//!
//! The crate is `no_std` (with `alloc`). It provides closed-form Szegő
//! kernels and Gleason distances ([`hardy`]), boundary quadrature on the
//! torus ([`torus`]), Gram matrices and dual sequences of normalized kernels
//! ([`gram`]), Carleson constants, balayage and a dyadic BMO proxy
//! ([`carleson`]), and the Hölder-split linear extension operator together
//! with the Bernoulli sign experiments ([`extension`]).
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod carleson;
pub mod error;
pub mod extension;
pub mod gram;
pub mod hardy;
mod sum;
pub mod torus;

pub use error::{Error, Result};
pub use hardy::{Exponent, HolderTriple, KernelSpec, Normalization, Point, PointSequence};
pub use num_complex::Complex64;
pub use sum::{sum as compensated_sum, Neumaier};
