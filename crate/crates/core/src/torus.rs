//! Uniform trapezoid grids on the torus `𝕋ⁿ` and numerical boundary norms.
//!
//! The Lebesgue measure is normalized to total mass 1, so every node of an
//! `mⁿ` grid carries weight `m⁻ⁿ`. For functions that are rational with all
//! poles outside the closed polydisc the boundary integral equals the `H^p`
//! norm, and the trapezoid rule converges geometrically in `m`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hardy::{Exponent, Point};
use crate::sum::{ComplexNeumaier, Neumaier};

/// Default upper bound on `mⁿ`.
pub const DEFAULT_NODE_CAP: usize = 1 << 22;

/// Tensor grid `θ_j = 2πk/m` on `𝕋ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid {
    n: usize,
    m: usize,
    roots: Vec<Complex64>,
}

impl TorusGrid {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(n: usize, m: usize, cap: usize) -> Result<Self> {
        if !(1..=3).contains(&n) || m < 4 || !m.is_multiple_of(2) {
            return Err(Error::InvalidGrid { n, m });
        }
        let size = (m as u128).pow(n as u32);
        if size > cap as u128 {
            return Err(Error::ResourceCap {
                size,
                cap: cap as u128,
            });
        }
        let roots = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            .collect();
        Ok(Self { n, m, roots })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Samples per circle.
    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn node_count(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.node_count() as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.m as f64
    }

    /// `e^{2πik/m}` for `k = 0..m`.
    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// Per-coordinate indices of a node; coordinate 0 varies slowest.
    pub fn multi_index(&self, mut node: usize, out: &mut [usize]) {
        for j in (0..self.n).rev() {
            out[j] = node % self.m;
            node /= self.m;
        }
    }

    pub fn node(&self, node: usize) -> Vec<Complex64> {
        let mut idx = vec![0; self.n];
        self.multi_index(node, &mut idx);
        idx.iter().map(|&k| self.roots[k]).collect()
    }

    /// Calls `visit(node_index, z)` for every node in index order.
    pub fn for_each_node(&self, mut visit: impl FnMut(usize, &[Complex64])) {
        let mut idx = vec![0usize; self.n];
        let mut z = vec![self.roots[0]; self.n];
        for node in 0..self.node_count() {
            visit(node, &z);
            // odometer increment, last coordinate fastest
            for j in (0..self.n).rev() {
                idx[j] += 1;
                if idx[j] < self.m {
                    z[j] = self.roots[idx[j]];
                    break;
                }
                idx[j] = 0;
                z[j] = self.roots[0];
            }
        }
    }
}

pub fn make_grid(n: usize, m: usize) -> Result<TorusGrid> {
    TorusGrid::new(n, m)
}

/// Function values at every node of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySamples {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl BoundarySamples {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::LengthMismatch {
                expected: grid.node_count(),
                found: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `∫ f dθ` under the normalized measure.
    pub fn mean(&self) -> Complex64 {
        let mut acc = ComplexNeumaier::new();
        for &v in &self.values {
            acc.add(v);
        }
        acc.total() * self.grid.weight()
    }

    /// `(∫ |f|^p)^{1/p}`, or `max |f|` for `p = ∞`.
    pub fn lp_norm(&self, p: Exponent) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let pv = p.value();
        let mut acc = Neumaier::new();
        if pv == 2.0 {
            for v in &self.values {
                acc.add(v.norm_sqr());
            }
        } else {
            for v in &self.values {
                acc.add(v.norm().powf(pv));
            }
        }
        (acc.total() * self.grid.weight()).powf(1.0 / pv)
    }

    /// `∫ f ḡ dθ`, the `H²` pairing.
    pub fn pairing(&self, other: &BoundarySamples) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                found: other.values.len(),
            });
        }
        let mut acc = ComplexNeumaier::new();
        for (f, g) in self.values.iter().zip(&other.values) {
            acc.add(f * g.conj());
        }
        Ok(acc.total() * self.grid.weight())
    }
}

/// Evaluates `f` at every node.
pub fn sample<F>(grid: &TorusGrid, f: F) -> Result<BoundarySamples>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let mut values = Vec::with_capacity(grid.node_count());
    grid.for_each_node(|_, z| values.push(f(z)));
    BoundarySamples::new(grid.clone(), values)
}

pub fn lp_norm<F>(f: F, p: Exponent, grid: &TorusGrid) -> Result<f64>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    Ok(sample(grid, f)?.lp_norm(p))
}

/// Grid-doubling schedule for [`refine_until`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refinement {
    pub n: usize,
    pub m_start: usize,
    pub node_cap: usize,
}

impl Refinement {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            m_start: 4,
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn starting_at(mut self, m: usize) -> Self {
        self.m_start = m;
        self
    }
}

/// A refined estimate and the resolution it was certified at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub m: usize,
}

/// Doubles `m` until two successive estimates agree within `tol` according
/// to `change`, returning the coarser estimate of the agreeing pair.
pub fn refine_with<T, E, C>(tol: f64, plan: Refinement, mut estimate: E, change: C) -> Result<Converged<T>>
where
    E: FnMut(&TorusGrid) -> Result<T>,
    C: Fn(&T, &T) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    let mut m = plan.m_start;
    let mut prev = estimate(&TorusGrid::with_cap(plan.n, m, plan.node_cap)?)?;
    loop {
        let finer = match TorusGrid::with_cap(plan.n, 2 * m, plan.node_cap) {
            Ok(g) => g,
            Err(Error::ResourceCap { .. }) => {
                return Err(Error::NotConverged {
                    m,
                    change: f64::INFINITY,
                })
            }
            Err(e) => return Err(e),
        };
        let next = estimate(&finer)?;
        let delta = change(&prev, &next);
        if delta < tol {
            return Ok(Converged { value: prev, m });
        }
        if TorusGrid::with_cap(plan.n, 4 * m, plan.node_cap).is_err() {
            return Err(Error::NotConverged { m: 2 * m, change: delta });
        }
        prev = next;
        m *= 2;
    }
}

/// Relative change `|a − b| / |b|`, absolute when `b = 0`.
pub fn relative_change(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b == 0.0 {
        d
    } else {
        d / b.abs()
    }
}

/// `L^p(𝕋ⁿ)` norm of `f` refined by grid doubling.
pub fn refine_until<F>(f: F, p: Exponent, tol: f64, plan: Refinement) -> Result<Converged<f64>>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    refine_with(tol, plan, |g| lp_norm(&f, p, g), |a, b| relative_change(*a, *b))
}

/// `‖z ↦ 1/(1 − r z)‖_{L^t(𝕋)}` for `0 ≤ r < 1`; exact at `t ∈ {2, ∞}`.
pub fn kernel_norm_1d(r: f64, t: Exponent, tol: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(1.0);
    }
    if t.is_infinite() {
        return Ok(1.0 / (1.0 - r));
    }
    if t == Exponent::TWO {
        return Ok((1.0 - r * r).powf(-0.5));
    }
    let rc = Complex64::new(r, 0.0);
    let one = Complex64::new(1.0, 0.0);
    Ok(refine_until(|z| (one - rc * z[0]).inv(), t, tol, Refinement::new(1).with_cap(1 << 24))?.value)
}

/// True boundary norm `‖k_a‖_{L^t(𝕋ⁿ)}`.
///
/// `k_a` is a tensor product, so the norm is the product of one-variable
/// norms; `t = ∞` uses the exact supremum `Π_j 1/(1 − |a_j|)`.
pub fn true_kernel_norm(a: &Point, t: Exponent, tol: f64) -> Result<f64> {
    let mut product = 1.0;
    for c in a.coords() {
        product *= kernel_norm_1d(c.norm(), t, tol)?;
    }
    Ok(product)
}
