//! Gram matrices of normalized kernels, dual sequences and minimal-norm
//! interpolation in `H²(𝔻ⁿ)`.
//!
//! For a finite sequence `S` the Gram matrix is
//! `G[a][b] = ⟨k_{a,2}, k_{b,2}⟩ = k_a(b) (χ_a χ_b)^{1/2}`. Every quantity in
//! this module comes out of one Hermitian eigendecomposition of `G`: the
//! singularity guard uses `λ_min`, the interpolation constant is
//! `λ_min^{-1/2}`, and the dual sequence is `G⁻¹ = U Λ⁻¹ U*`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hardy::{raw_kernel, Point, PointSequence};
use crate::sum::ComplexNeumaier;
use crate::torus::{BoundarySamples, TorusGrid};

/// Eigenvalues at or below this make the Gram system unusable.
pub const SINGULARITY_TOLERANCE: f64 = 1e-10;

/// Hermitian matrix of normalized-kernel inner products.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    sequence: Arc<PointSequence>,
    entries: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn new(sequence: Arc<PointSequence>) -> Self {
        let pts = sequence.points();
        let roots: Vec<f64> = pts.iter().map(|p| p.chi().sqrt()).collect();
        let n = pts.len();
        let entries = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                raw_kernel(&pts[i], pts[j].coords()) * (roots[i] * roots[j])
            }
        });
        Self { sequence, entries }
    }

    pub fn sequence(&self) -> &Arc<PointSequence> {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.entries[(a, b)]
    }

    /// `max |G[a][b] − conj(G[b][a])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((self.entries[(a, b)] - self.entries[(b, a)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order with matching eigenvectors.
    pub fn spectrum(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.entries.clone());
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(self.len(), self.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        Spectrum {
            eigenvalues,
            eigenvectors,
        }
    }

    /// Spectral factorization with the singularity guard applied.
    pub fn factor(&self) -> Result<GramFactor> {
        let spectrum = self.spectrum();
        let lmin = spectrum.min_eigenvalue();
        if !(lmin > SINGULARITY_TOLERANCE) {
            return Err(Error::NearSingularGram { eigenvalue: lmin });
        }
        let u = &spectrum.eigenvectors;
        let inv_lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.len(),
            spectrum.eigenvalues.iter().map(|&l| Complex64::new(1.0 / l, 0.0)),
        ));
        let inverse = u * inv_lambda * u.adjoint();
        Ok(GramFactor {
            gram: self.clone(),
            spectrum,
            inverse,
        })
    }

    /// `Σ_{a,b} c_a conj(d_b) G[a][b]`.
    pub fn quadratic_pairing(&self, c: &[Complex64], d: &[Complex64]) -> Complex64 {
        let mut acc = ComplexNeumaier::new();
        for (a, ca) in c.iter().enumerate() {
            for (b, db) in d.iter().enumerate() {
                acc.add(ca * db.conj() * self.entries[(a, b)]);
            }
        }
        acc.total()
    }
}

pub fn gram_matrix(sequence: &Arc<PointSequence>) -> GramMatrix {
    GramMatrix::new(sequence.clone())
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }
}

/// A nonsingular Gram matrix together with its eigendecomposition and inverse.
#[derive(Clone, Debug)]
pub struct GramFactor {
    gram: GramMatrix,
    spectrum: Spectrum,
    inverse: DMatrix<Complex64>,
}

impl GramFactor {
    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn inverse(&self) -> &DMatrix<Complex64> {
        &self.inverse
    }

    /// `λ_min(G)^{-1/2}`: norm of the minimal-norm extension `ℓ²(S) → E_S`.
    pub fn interpolation_constant(&self) -> f64 {
        self.spectrum.min_eigenvalue().powf(-0.5)
    }

    /// `‖ρ_a‖₂ = ((G⁻¹)_{aa})^{1/2}` for each `a`.
    pub fn dual_norms(&self) -> Vec<f64> {
        (0..self.gram.len()).map(|a| self.inverse[(a, a)].re.sqrt()).collect()
    }

    pub fn dual_bound(&self) -> f64 {
        self.dual_norms().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The biorthogonal family `ρ_a = Σ_c (G⁻¹)[a][c] k_{c,2}`.
    pub fn dual_sequence(&self) -> DualSequence {
        let n = self.gram.len();
        let seq = self.gram.sequence.clone();
        let elements: Vec<KernelCombination> = (0..n)
            .map(|a| {
                let coeffs = (0..n).map(|c| self.inverse[(a, c)]).collect();
                KernelCombination::new(seq.clone(), coeffs).expect("length matches")
            })
            .collect();
        let residual = self.duality_residual(&elements);
        DualSequence {
            norms: self.dual_norms(),
            elements,
            residual,
        }
    }

    /// `max_{a,b} |⟨ρ_a, k_{b,2}⟩ − δ_{ab}|` computed by Gram algebra.
    pub fn duality_residual(&self, duals: &[KernelCombination]) -> f64 {
        let n = self.gram.len();
        let mut worst = 0.0f64;
        for (a, rho) in duals.iter().enumerate() {
            for b in 0..n {
                let mut acc = ComplexNeumaier::new();
                for (c, coeff) in rho.coefficients().iter().enumerate() {
                    acc.add(coeff * self.gram.entries[(c, b)]);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((acc.total() - target).norm());
            }
        }
        worst
    }

    /// The `f ∈ E_S` of least `H²` norm with `χ_a^{1/2} f(a) = λ_a`.
    pub fn min_norm_interpolant(&self, targets: &[Complex64]) -> Result<KernelCombination> {
        let n = self.gram.len();
        if targets.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: targets.len(),
            });
        }
        let coeffs = (0..n)
            .map(|c| {
                let mut acc = ComplexNeumaier::new();
                for (a, t) in targets.iter().enumerate() {
                    acc.add(t * self.inverse[(a, c)]);
                }
                acc.total()
            })
            .collect();
        KernelCombination::new(self.gram.sequence.clone(), coeffs)
    }
}

/// Dual elements `ρ_a ∈ E_S` with `⟨ρ_a, k_{b,2}⟩ = δ_{ab}`.
#[derive(Clone, Debug)]
pub struct DualSequence {
    pub elements: Vec<KernelCombination>,
    pub norms: Vec<f64>,
    /// Duality defect measured by Gram algebra.
    pub residual: f64,
}

pub fn dual_sequence(sequence: &Arc<PointSequence>) -> Result<DualSequence> {
    Ok(gram_matrix(sequence).factor()?.dual_sequence())
}

pub fn dual_bound_h2(sequence: &Arc<PointSequence>) -> Result<f64> {
    Ok(gram_matrix(sequence).factor()?.dual_bound())
}

pub fn interpolation_constant_h2(sequence: &Arc<PointSequence>) -> Result<f64> {
    Ok(gram_matrix(sequence).factor()?.interpolation_constant())
}

pub fn min_norm_interpolant(sequence: &Arc<PointSequence>, targets: &[Complex64]) -> Result<KernelCombination> {
    gram_matrix(sequence).factor()?.min_norm_interpolant(targets)
}

/// `f = Σ_a c_a k_{a,2}` over a fixed sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelCombination {
    sequence: Arc<PointSequence>,
    coefficients: Vec<Complex64>,
    scales: Vec<f64>,
}

impl KernelCombination {
    pub fn new(sequence: Arc<PointSequence>, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != sequence.len() {
            return Err(Error::LengthMismatch {
                expected: sequence.len(),
                found: coefficients.len(),
            });
        }
        let scales = sequence.points().iter().map(|p| p.chi().sqrt()).collect();
        Ok(Self {
            sequence,
            coefficients,
            scales,
        })
    }

    /// `k_{a,2}` for the point at `index`.
    pub fn unit(sequence: Arc<PointSequence>, index: usize) -> Result<Self> {
        let mut c = vec![Complex64::new(0.0, 0.0); sequence.len()];
        *c.get_mut(index).ok_or(Error::NotInSequence)? = Complex64::new(1.0, 0.0);
        Self::new(sequence, c)
    }

    pub fn zero(sequence: Arc<PointSequence>) -> Self {
        let c = vec![Complex64::new(0.0, 0.0); sequence.len()];
        Self::new(sequence, c).expect("length matches")
    }

    pub fn sequence(&self) -> &Arc<PointSequence> {
        &self.sequence
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.sequence.dim()
    }

    /// Value at `z`; `z` must have the sequence's dimension.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = ComplexNeumaier::new();
        for ((p, c), s) in self.sequence.points().iter().zip(&self.coefficients).zip(&self.scales) {
            acc.add(c * s * raw_kernel(p, z));
        }
        acc.total()
    }

    pub fn eval_at(&self, p: &Point) -> Result<Complex64> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        Ok(self.eval(p.coords()))
    }

    /// Coefficients `c_a · factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            sequence: self.sequence.clone(),
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
            scales: self.scales.clone(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_sequence(other)?;
        Ok(Self {
            sequence: self.sequence.clone(),
            coefficients: self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a + b).collect(),
            scales: self.scales.clone(),
        })
    }

    fn same_sequence(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.sequence, &other.sequence) && *self.sequence != *other.sequence {
            return Err(Error::InvalidParameter("combinations live on different sequences"));
        }
        Ok(())
    }

    /// `⟨self, other⟩_{H²}` through the Gram matrix.
    pub fn inner(&self, other: &Self, gram: &GramMatrix) -> Result<Complex64> {
        self.same_sequence(other)?;
        if gram.sequence() != &self.sequence && **gram.sequence() != *self.sequence {
            return Err(Error::InvalidParameter("Gram matrix belongs to another sequence"));
        }
        Ok(gram.quadratic_pairing(&self.coefficients, &other.coefficients))
    }

    /// `⟨f, k_{b,2}⟩ = χ_b^{1/2} f(b)` for each point `b` of the sequence.
    pub fn restriction(&self) -> Vec<Complex64> {
        self.sequence
            .points()
            .iter()
            .zip(&self.scales)
            .map(|(p, s)| self.eval(p.coords()) * s)
            .collect()
    }

    /// Samples on a torus grid using per-coordinate kernel tables.
    pub fn sample_on(&self, grid: &TorusGrid) -> Result<BoundarySamples> {
        let n = self.dim();
        if grid.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: grid.dim(),
            });
        }
        let m = grid.resolution();
        let one = Complex64::new(1.0, 0.0);
        // tables[a][j*m + k] = 1/(1 − conj(a_j) ζ_k)
        let tables: Vec<Vec<Complex64>> = self
            .sequence
            .points()
            .iter()
            .map(|p| {
                let mut t = Vec::with_capacity(n * m);
                for aj in p.coords() {
                    for zk in grid.roots() {
                        t.push((one - aj.conj() * zk).inv());
                    }
                }
                t
            })
            .collect();
        let weights: Vec<Complex64> = self.coefficients.iter().zip(&self.scales).map(|(c, s)| c * s).collect();
        let mut idx = vec![0usize; n];
        let mut values = Vec::with_capacity(grid.node_count());
        for node in 0..grid.node_count() {
            grid.multi_index(node, &mut idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, w) in tables.iter().zip(&weights) {
                let mut v = *w;
                for (j, &k) in idx.iter().enumerate() {
                    v *= t[j * m + k];
                }
                acc += v;
            }
            values.push(acc);
        }
        BoundarySamples::new(grid.clone(), values)
    }
}

/// `‖f‖₂ = (c* G c)^{1/2}`.
pub fn h2_norm_closed_form(f: &KernelCombination) -> f64 {
    let gram = GramMatrix::new(f.sequence.clone());
    gram.quadratic_pairing(&f.coefficients, &f.coefficients).re.max(0.0).sqrt()
}
