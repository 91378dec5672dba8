//! The explicit extension operator and the random-sign experiments.
//!
//! Targets `ν ∈ ℓ^s(S)` are split as `ν = λμ` with `λ ∈ ℓ^p`, `μ ∈ ℓ^q`, and
//! extended by `h = Σ_a γ_a ν_a ρ_a k_{a,q}`, where `{ρ_a}` is a family dual to
//! the normalized kernels at some exponent `p` (`⟨ρ_a, k_{b,p′}⟩ = δ_{ab}`).

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gram::{DualSequence, GramMatrix, KernelCombination};
use crate::hardy::{convention_norm, Exponent, HolderTriple, KernelSpec, Point, PointSequence};
use crate::sum::{ComplexNeumaier, Neumaier};
use crate::torus::{true_kernel_norm, BoundarySamples, TorusGrid};

/// Largest `N` for which all `2^N` sign vectors are enumerated.
pub const EXHAUSTIVE_SIGN_CAP: usize = 14;

fn lp_norm_seq(values: impl Iterator<Item = f64>, p: Exponent) -> f64 {
    if p.is_infinite() {
        return values.fold(0.0, f64::max);
    }
    let pv = p.value();
    crate::sum::sum(values.map(|v| v.powf(pv))).powf(1.0 / pv)
}

/// Values `ν_a` in `ℓ^s(S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSequence {
    values: Vec<Complex64>,
    s: Exponent,
}

impl TargetSequence {
    pub fn new(values: Vec<Complex64>, s: Exponent) -> Result<Self> {
        if let Some(node) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { values, s })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn exponent(&self) -> Exponent {
        self.s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        lp_norm_seq(self.values.iter().map(|v| v.norm()), self.s)
    }
}

/// `ν = λ·μ` with `‖ν‖_s = ‖λ‖_p ‖μ‖_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderSplit {
    pub lambda: Vec<Complex64>,
    pub mu: Vec<f64>,
    pub p: Exponent,
    pub q: Exponent,
}

impl HolderSplit {
    pub fn lambda_norm(&self) -> f64 {
        lp_norm_seq(self.lambda.iter().map(|v| v.norm()), self.p)
    }

    pub fn mu_norm(&self) -> f64 {
        lp_norm_seq(self.mu.iter().copied(), self.q)
    }
}

/// `λ_a = (ν_a/|ν_a|)|ν_a|^{s/p}`, `μ_a = |ν_a|^{s/q}`, zero where `ν_a = 0`.
pub fn holder_split(nu: &TargetSequence, triple: &HolderTriple) -> Result<HolderSplit> {
    let s = triple.s().value();
    if (nu.exponent().recip() - triple.s().recip()).abs() > 1e-12 {
        return Err(Error::InvalidTriple {
            p: triple.p().value(),
            q: triple.q().value(),
            s: nu.exponent().value(),
        });
    }
    let (ep, eq) = (s * triple.p().recip(), s * triple.q().recip());
    let mut lambda = Vec::with_capacity(nu.len());
    let mut mu = Vec::with_capacity(nu.len());
    for v in nu.values() {
        let r = v.norm();
        if r == 0.0 {
            lambda.push(Complex64::new(0.0, 0.0));
            mu.push(0.0);
        } else {
            lambda.push(v / r * r.powf(ep));
            mu.push(r.powf(eq));
        }
    }
    Ok(HolderSplit {
        lambda,
        mu,
        p: triple.p(),
        q: triple.q(),
    })
}

/// `scale · f · Π factors` with `f ∈ E_S`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualElement {
    pub combination: KernelCombination,
    pub factors: Vec<KernelSpec>,
    pub scale: f64,
}

impl DualElement {
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut v = self.combination.eval(z) * self.scale;
        for f in &self.factors {
            v *= f.eval_unchecked(z);
        }
        v
    }

    pub fn sample_on(&self, grid: &TorusGrid) -> Result<BoundarySamples> {
        let base = self.combination.sample_on(grid)?;
        if self.factors.is_empty() && self.scale == 1.0 {
            return Ok(base);
        }
        let values = grid_values(grid, base.values(), |z, v| {
            let mut w = v * self.scale;
            for f in &self.factors {
                w *= f.eval_unchecked(z);
            }
            w
        });
        BoundarySamples::new(grid.clone(), values)
    }
}

fn grid_values(grid: &TorusGrid, base: &[Complex64], f: impl Fn(&[Complex64], Complex64) -> Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(base.len());
    grid.for_each_node(|i, z| out.push(f(z, base[i])));
    out
}

/// A family `{ρ_a}` with `⟨ρ_a, k_{b,p′}⟩ = δ_{ab}`, i.e. `χ_b^{1/p} ρ_a(b) = δ_{ab}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFamily {
    sequence: Arc<PointSequence>,
    exponent: Exponent,
    elements: Vec<DualElement>,
}

impl DualFamily {
    pub fn new(sequence: Arc<PointSequence>, exponent: Exponent, elements: Vec<DualElement>) -> Result<Self> {
        if elements.len() != sequence.len() {
            return Err(Error::LengthMismatch {
                expected: sequence.len(),
                found: elements.len(),
            });
        }
        Ok(Self {
            sequence,
            exponent,
            elements,
        })
    }

    /// The Gram duals, which pair against `k_{b,2}`.
    pub fn from_gram(duals: &DualSequence) -> Result<Self> {
        let first = duals.elements.first().ok_or(Error::EmptySequence)?;
        let sequence = first.sequence().clone();
        let elements = duals
            .elements
            .iter()
            .map(|c| DualElement {
                combination: c.clone(),
                factors: Vec::new(),
                scale: 1.0,
            })
            .collect();
        Self::new(sequence, Exponent::TWO, elements)
    }

    pub fn sequence(&self) -> &Arc<PointSequence> {
        &self.sequence
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn elements(&self) -> &[DualElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The same functions rescaled by `χ_a^{1/p₀ − 1/p}` to pair against `k_{b,p′}`.
    pub fn rescaled(&self, p: Exponent) -> Self {
        let shift = self.exponent.recip() - p.recip();
        let elements = self
            .elements
            .iter()
            .zip(self.sequence.points())
            .map(|(e, a)| DualElement {
                scale: e.scale * a.chi().powf(shift),
                ..e.clone()
            })
            .collect();
        Self {
            sequence: self.sequence.clone(),
            exponent: p,
            elements,
        }
    }

    /// `max_{a,b} |χ_b^{1/p} ρ_a(b) − δ_{ab}|` through the reproducing identity.
    pub fn exact_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, rho) in self.elements.iter().enumerate() {
            for (b, pt) in self.sequence.points().iter().enumerate() {
                let v = rho.eval(pt.coords()) * pt.chi().powf(self.exponent.recip());
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }

    /// `max_{a,b} |⟨ρ_a, k_{b,p′}⟩ − δ_{ab}|` with the pairing taken on `grid`.
    pub fn quadrature_residual(&self, grid: &TorusGrid) -> Result<f64> {
        let conj = self.exponent.conjugate();
        let kernels: Vec<BoundarySamples> = self
            .sequence
            .points()
            .iter()
            .map(|b| {
                let k = KernelSpec::normalized(b.clone(), conj);
                crate::torus::sample(grid, |z| k.eval_unchecked(z))
            })
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for (a, rho) in self.elements.iter().enumerate() {
            let samples = rho.sample_on(grid)?;
            for (b, k) in kernels.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((samples.pairing(k)? - target).norm());
            }
        }
        Ok(worst)
    }
}

/// Transports duals at exponent `p` down to `q ≤ p`: `ρ_a = γ_a k_{a,r}` with
/// `1/r = 1/q − 1/p`, so that `⟨ρ_a, k_{b,q′}⟩ = δ_{ab}`.
pub fn ic4_transport(duals: &DualFamily, q: Exponent) -> Result<DualFamily> {
    let p = duals.exponent();
    if q.value() > p.value() {
        return Err(Error::ExponentOrder {
            p: p.value(),
            q: q.value(),
        });
    }
    let mut recip = q.recip() - p.recip();
    if recip.abs() < 1e-15 {
        recip = 0.0;
    }
    let r = Exponent::from_reciprocal(recip)?;
    let elements = duals
        .elements
        .iter()
        .zip(duals.sequence.points())
        .map(|(e, a)| {
            let mut factors = e.factors.clone();
            factors.push(KernelSpec::normalized(a.clone(), r));
            DualElement {
                combination: e.combination.clone(),
                factors,
                scale: e.scale,
            }
        })
        .collect();
    DualFamily::new(duals.sequence.clone(), q, elements)
}

/// Kernel norms at the convention values `χ^{−1/t′}` or at true boundary norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormMode {
    Convention,
    /// Refined quadrature of each one-variable factor to relative `tol`.
    Quadrature { tol: f64 },
}

fn kernel_norm(b: &Point, t: Exponent, mode: NormMode) -> Result<f64> {
    match mode {
        NormMode::Convention => Ok(convention_norm(b, t)),
        NormMode::Quadrature { tol } => true_kernel_norm(b, t, tol),
    }
}

/// `γ_b = ‖k_b‖_{s′} ‖k_b‖_q / (‖k_b‖_{p′} ‖k_b‖₂²)`.
pub fn gamma_coefficient(b: &Point, triple: &HolderTriple, mode: NormMode) -> Result<f64> {
    let s_conj = kernel_norm(b, triple.s().conjugate(), mode)?;
    let q = kernel_norm(b, triple.q(), mode)?;
    let p_conj = kernel_norm(b, triple.p().conjugate(), mode)?;
    let two = kernel_norm(b, Exponent::TWO, mode)?;
    Ok(s_conj * q / (p_conj * two * two))
}

/// `(‖k_a‖₂²/(‖k_a‖_q‖k_a‖_{q′}), ‖k_a‖_{s′}/(‖k_a‖_{p′}‖k_a‖_{q′}))`.
///
/// `γ_a` is their quotient, second over first.
pub fn structural_hypotheses_check(a: &Point, triple: &HolderTriple, mode: NormMode) -> Result<(f64, f64)> {
    let two = kernel_norm(a, Exponent::TWO, mode)?;
    let q = kernel_norm(a, triple.q(), mode)?;
    let q_conj = kernel_norm(a, triple.q().conjugate(), mode)?;
    let s_conj = kernel_norm(a, triple.s().conjugate(), mode)?;
    let p_conj = kernel_norm(a, triple.p().conjugate(), mode)?;
    Ok((two * two / (q * q_conj), s_conj / (p_conj * q_conj)))
}

/// One summand `γ_a ν_a ρ_a k_{a,q}` of the extension.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionTerm {
    pub gamma: Complex64,
    pub nu: Complex64,
    pub dual: DualElement,
    pub kernel: KernelSpec,
}

/// Norms entering `‖h‖_s ≤ γ_max ‖g‖_p ‖f‖_q`, all on one grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormReport {
    pub h_s: f64,
    pub g_p: f64,
    pub f_q: f64,
    pub gamma_max: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionResult {
    sequence: Arc<PointSequence>,
    triple: HolderTriple,
    split: HolderSplit,
    terms: Vec<ExtensionTerm>,
    residuals: Vec<f64>,
}

impl ExtensionResult {
    pub fn terms(&self) -> &[ExtensionTerm] {
        &self.terms
    }

    pub fn split(&self) -> &HolderSplit {
        &self.split
    }

    pub fn triple(&self) -> HolderTriple {
        self.triple
    }

    /// `|χ_b^{1/s} h(b) − ν_b|` for each `b ∈ S`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `h(z)`, for `z` in the closed polydisc.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        crate::hardy::check_closed(z, self.sequence.dim())?;
        Ok(self.eval_unchecked(z))
    }

    pub fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = ComplexNeumaier::new();
        for t in &self.terms {
            if t.nu != Complex64::new(0.0, 0.0) {
                acc.add(t.gamma * t.nu * t.dual.eval(z) * t.kernel.eval_unchecked(z));
            }
        }
        acc.total()
    }

    /// `‖h‖_s`, `g = (Σ|λ_a ρ_a|^p)^{1/p}`, `f = (Σ|μ_a k_{a,q}|^{p′})^{1/p′}` on `grid`.
    ///
    /// The pointwise Hölder inequality holds node by node, so
    /// `h_s ≤ bound` is exact up to rounding at every resolution.
    pub fn norm_report(&self, grid: &TorusGrid) -> Result<NormReport> {
        let p = self.triple.p().value();
        let p_conj = self.triple.p().conjugate().value();
        let nodes = grid.node_count();
        let mut h = vec![Complex64::new(0.0, 0.0); nodes];
        let mut g = vec![0.0f64; nodes];
        let mut f = vec![0.0f64; nodes];
        for (i, t) in self.terms.iter().enumerate() {
            let rho = t.dual.sample_on(grid)?;
            let lambda = self.split.lambda[i].norm();
            let mu = self.split.mu[i];
            let coeff = t.gamma * t.nu;
            grid.for_each_node(|node, z| {
                let r = rho.values()[node];
                let k = t.kernel.eval_unchecked(z);
                h[node] += coeff * r * k;
                g[node] += (lambda * r.norm()).powf(p);
                f[node] += (mu * k.norm()).powf(p_conj);
            });
        }
        let h_s = BoundarySamples::new(grid.clone(), h)?.lp_norm(self.triple.s());
        let g_vals = g.into_iter().map(|v| Complex64::new(v.powf(1.0 / p), 0.0)).collect();
        let f_vals = f.into_iter().map(|v| Complex64::new(v.powf(1.0 / p_conj), 0.0)).collect();
        let g_p = BoundarySamples::new(grid.clone(), g_vals)?.lp_norm(self.triple.p());
        let f_q = BoundarySamples::new(grid.clone(), f_vals)?.lp_norm(self.triple.q());
        let gamma_max = self
            .terms
            .iter()
            .filter(|t| t.nu != Complex64::new(0.0, 0.0))
            .map(|t| t.gamma.norm())
            .fold(0.0, f64::max);
        Ok(NormReport {
            h_s,
            g_p,
            f_q,
            gamma_max,
            bound: gamma_max * g_p * f_q,
        })
    }
}

/// `h = Σ_a γ_a ν_a ρ_a k_{a,q}` with `γ_b = ‖k_b‖_{s′}/(ρ_b(b) k_{b,q}(b))`.
///
/// The norm `‖k_b‖_{s′}` is the convention value, which makes
/// `χ_b^{1/s} h(b) = ν_b` whenever the cross terms `ρ_a(b)` vanish. The
/// residual is measured from the full sum, not assumed.
pub fn build_extension(duals: &DualFamily, nu: &TargetSequence, triple: &HolderTriple) -> Result<ExtensionResult> {
    let seq = duals.sequence().clone();
    if nu.len() != seq.len() {
        return Err(Error::LengthMismatch {
            expected: seq.len(),
            found: nu.len(),
        });
    }
    let split = holder_split(nu, triple)?;
    let zero = Complex64::new(0.0, 0.0);
    let mut terms = Vec::with_capacity(seq.len());
    for (index, (b, rho)) in seq.points().iter().zip(duals.elements()).enumerate() {
        let kernel = KernelSpec::normalized(b.clone(), triple.q());
        let nu_b = nu.values()[index];
        let gamma = if nu_b == zero {
            Complex64::new(gamma_coefficient(b, triple, NormMode::Convention)?, 0.0)
        } else {
            let denom = rho.eval(b.coords()) * kernel.eval_unchecked(b.coords());
            if !(denom.norm() > 0.0) || !denom.norm().is_finite() {
                return Err(Error::DegenerateDual { index });
            }
            convention_norm(b, triple.s().conjugate()) / denom
        };
        terms.push(ExtensionTerm {
            gamma,
            nu: nu_b,
            dual: rho.clone(),
            kernel,
        });
    }
    let mut result = ExtensionResult {
        sequence: seq.clone(),
        triple: *triple,
        split,
        terms,
        residuals: Vec::new(),
    };
    let s_recip = triple.s().recip();
    result.residuals = seq
        .points()
        .iter()
        .zip(nu.values())
        .map(|(b, v)| (result.eval_unchecked(b.coords()) * b.chi().powf(s_recip) - v).norm())
        .collect();
    Ok(result)
}

/// Entries exactly `±1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be +1 or -1"));
        }
        Ok(Self(signs))
    }

    /// Bit `a` of `mask` set means `ε_a = −1`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        Self((0..len).map(|a| if mask >> a & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// How sign vectors are visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignMode {
    /// All `2^N` vectors, `N ≤` [`EXHAUSTIVE_SIGN_CAP`].
    Exhaustive,
    /// Uniform draws from a seeded stream.
    Sampled { samples: u64, seed: u64 },
}

/// `⟨ρ_a, ρ_b⟩` weighted by `μ_a μ̄_b`, so `‖Σ ε_a μ_a ρ_a‖² = Σ ε_a ε_b W_{ab}`.
struct SignForm {
    weights: Vec<Complex64>,
    n: usize,
}

impl SignForm {
    fn new(gram: &GramMatrix, duals: &[KernelCombination], mu: &[Complex64]) -> Result<Self> {
        let n = duals.len();
        if mu.len() != n || gram.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: mu.len(),
            });
        }
        let mut weights = vec![Complex64::new(0.0, 0.0); n * n];
        for a in 0..n {
            for b in 0..n {
                weights[a * n + b] = mu[a] * mu[b].conj() * duals[a].inner(&duals[b], gram)?;
            }
        }
        Ok(Self { weights, n })
    }

    fn diagonal_sum(&self) -> f64 {
        crate::sum::sum((0..self.n).map(|a| self.weights[a * self.n + a].re))
    }

    fn value(&self, signs: &[i8]) -> f64 {
        let mut acc = Neumaier::new();
        for a in 0..self.n {
            for b in 0..self.n {
                acc.add(f64::from(signs[a] * signs[b]) * self.weights[a * self.n + b].re);
            }
        }
        acc.total()
    }
}

/// `E‖Σ ε_a μ_a ρ_a‖₂²` against `Σ |μ_a|² ‖ρ_a‖₂²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignAverage {
    pub lhs: f64,
    pub rhs: f64,
    pub samples: u64,
}

impl SignAverage {
    pub fn relative_gap(&self) -> f64 {
        crate::torus::relative_change(self.lhs, self.rhs)
    }
}

fn random_signs(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let bits = rng.next_u64();
        for k in 0..64.min(n - out.len()) {
            out.push(if bits >> k & 1 == 1 { -1 } else { 1 });
        }
    }
    out
}

fn exhaustive_guard(n: usize) -> Result<()> {
    if n > EXHAUSTIVE_SIGN_CAP {
        return Err(Error::ResourceCap {
            size: 1u128 << n.min(127),
            cap: 1u128 << EXHAUSTIVE_SIGN_CAP,
        });
    }
    Ok(())
}

/// Both sides of the random-sign identity; the right side uses Gram algebra only.
pub fn bernoulli_expectation(gram: &GramMatrix, duals: &[KernelCombination], mu: &[Complex64], mode: SignMode) -> Result<SignAverage> {
    let form = SignForm::new(gram, duals, mu)?;
    let n = form.n;
    let rhs = form.diagonal_sum();
    match mode {
        SignMode::Exhaustive => {
            exhaustive_guard(n)?;
            let count = 1u64 << n;
            let mut acc = Neumaier::new();
            for mask in 0..count {
                acc.add(form.value(SignVector::from_mask(mask, n).signs()));
            }
            Ok(SignAverage {
                lhs: acc.total() / count as f64,
                rhs,
                samples: count,
            })
        }
        SignMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("at least one sample is required"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = Neumaier::new();
            for _ in 0..samples {
                acc.add(form.value(&random_signs(&mut rng, n)));
            }
            Ok(SignAverage {
                lhs: acc.total() / samples as f64,
                rhs,
                samples,
            })
        }
    }
}

/// A sign vector with `‖Σ ε_a μ_a ρ_a‖₂² ≥ Σ|μ_a|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignChoice {
    pub signs: SignVector,
    pub achieved: f64,
    pub threshold: f64,
}

/// Exhaustive mode returns the maximizer (first in mask order on ties);
/// sampled mode returns the best draw and fails if none reaches `Σ|μ_a|²`.
pub fn best_signs(gram: &GramMatrix, duals: &[KernelCombination], mu: &[Complex64], mode: SignMode) -> Result<SignChoice> {
    let form = SignForm::new(gram, duals, mu)?;
    let n = form.n;
    let threshold = crate::sum::sum(mu.iter().map(|m| m.norm_sqr()));
    let mut best: Option<(Vec<i8>, f64)> = None;
    let mut consider = |signs: Vec<i8>| {
        let v = form.value(&signs);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((signs, v));
        }
    };
    let tried = match mode {
        SignMode::Exhaustive => {
            exhaustive_guard(n)?;
            for mask in 0..1u64 << n {
                consider(SignVector::from_mask(mask, n).0);
            }
            1u64 << n
        }
        SignMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                consider(random_signs(&mut rng, n));
            }
            samples
        }
    };
    match best {
        Some((signs, achieved)) if achieved >= threshold || mode == SignMode::Exhaustive => Ok(SignChoice {
            signs: SignVector(signs),
            achieved,
            threshold,
        }),
        _ => Err(Error::SignSearchFailed { tried }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::gram_matrix;
    use crate::torus::make_grid;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn seq(points: &[&[f64]]) -> Arc<PointSequence> {
        Arc::new(PointSequence::new(points.iter().map(|p| Point::from_real(p).unwrap()).collect()).unwrap())
    }

    fn triple(p: f64, q: f64) -> HolderTriple {
        HolderTriple::from_pq(Exponent::new(p).unwrap(), Exponent::new(q).unwrap()).unwrap()
    }

    fn gram_duals(s: &Arc<PointSequence>) -> (GramMatrix, DualSequence) {
        let g = gram_matrix(s);
        let d = g.factor().unwrap().dual_sequence();
        (g, d)
    }

    #[test]
    fn holder_split_examples() {
        let t = triple(2.0, 2.0);
        let nu = TargetSequence::new(vec![c(1.0)], Exponent::ONE).unwrap();
        let h = holder_split(&nu, &t).unwrap();
        assert_eq!(h.lambda, vec![c(1.0)]);
        assert_eq!(h.mu, vec![1.0]);
        let nu = TargetSequence::new(vec![c(8.0), c(0.0)], Exponent::ONE).unwrap();
        let h = holder_split(&nu, &t).unwrap();
        assert_relative_eq!(h.lambda[0].re, 8f64.sqrt(), epsilon = 1e-15);
        assert_eq!(h.lambda[1], c(0.0));
        assert_eq!(h.mu[1], 0.0);
        assert_relative_eq!(nu.norm(), h.lambda_norm() * h.mu_norm(), epsilon = 1e-14);
        let wrong = TargetSequence::new(vec![c(1.0)], Exponent::TWO).unwrap();
        assert!(holder_split(&wrong, &t).is_err());
    }

    #[test]
    fn transport_guards_and_exponents() {
        let s = seq(&[&[0.0]]);
        let (_, d) = gram_duals(&s);
        let fam = DualFamily::from_gram(&d).unwrap();
        assert!(matches!(ic4_transport(&fam, Exponent::new(4.0).unwrap()), Err(Error::ExponentOrder { .. })));
        // p = q: the extra factor is k_{a,∞} = χ_a k_a
        let same = ic4_transport(&fam, Exponent::TWO).unwrap();
        assert_eq!(same.elements()[0].factors[0].normalization(), crate::hardy::Normalization::Hp(Exponent::INFINITY));
        // p = 2, q = 1 at the origin: ρ = 1; pairing against k_{0,∞} = 1
        let one = ic4_transport(&fam, Exponent::ONE).unwrap();
        assert_relative_eq!(one.elements()[0].eval(&[Complex64::new(0.3, 0.4)]).re, 1.0, epsilon = 1e-15);
        let g = make_grid(1, 8).unwrap();
        assert!(one.quadrature_residual(&g).unwrap() < 1e-14);
    }

    #[test]
    fn transported_duals_stay_dual() {
        let s = seq(&[&[0.0, 0.2], &[0.5, -0.3], &[-0.4, 0.6]]);
        let (_, d) = gram_duals(&s);
        let fam = DualFamily::from_gram(&d).unwrap();
        let g = make_grid(2, 128).unwrap();
        assert!(fam.quadrature_residual(&g).unwrap() < 1e-10);
        for q in [2.0, 1.5, 1.0] {
            let t = ic4_transport(&fam, Exponent::new(q).unwrap()).unwrap();
            assert!(t.exact_residual() < 1e-10, "q = {q}");
            assert!(t.quadrature_residual(&g).unwrap() < 1e-10, "q = {q}");
        }
        let four = fam.rescaled(Exponent::new(4.0).unwrap());
        assert!(four.exact_residual() < 1e-10);
        let down = ic4_transport(&four, Exponent::new(4.0 / 3.0).unwrap()).unwrap();
        assert!(down.quadrature_residual(&g).unwrap() < 1e-10);
    }

    #[test]
    fn gamma_examples() {
        let t = triple(2.0, 2.0);
        let a = Point::from_real(&[0.9]).unwrap();
        assert_relative_eq!(gamma_coefficient(&a, &t, NormMode::Convention).unwrap(), 1.0, epsilon = 1e-14);
        let origin = Point::origin(2).unwrap();
        assert_eq!(gamma_coefficient(&origin, &t, NormMode::Quadrature { tol: 1e-12 }).unwrap(), 1.0);
        // s = 1, p = q = 2 with true norms: ‖k‖_∞/‖k‖₂² = (1 − r²)/(1 − r) = 1 + r
        let g = gamma_coefficient(&a, &t, NormMode::Quadrature { tol: 1e-12 }).unwrap();
        assert_relative_eq!(g, 1.9, epsilon = 1e-10);
        let (r1, r2) = structural_hypotheses_check(&a, &t, NormMode::Quadrature { tol: 1e-12 }).unwrap();
        assert_relative_eq!(g, r2 / r1, epsilon = 1e-12);
    }

    #[test]
    fn structural_ratios() {
        let t = triple(2.0, 4.0);
        let origin = Point::origin(1).unwrap();
        assert_eq!(structural_hypotheses_check(&origin, &t, NormMode::Quadrature { tol: 1e-10 }).unwrap(), (1.0, 1.0));
        let a = Point::from_real(&[0.6, -0.2]).unwrap();
        let (r1, r2) = structural_hypotheses_check(&a, &t, NormMode::Convention).unwrap();
        assert_relative_eq!(r1, 1.0, epsilon = 1e-13);
        assert_relative_eq!(r2, 1.0, epsilon = 1e-13);
        let edge = Point::from_real(&[0.999]).unwrap();
        let (r1, r2) = structural_hypotheses_check(&edge, &t, NormMode::Quadrature { tol: 1e-6 }).unwrap();
        assert!(r1 > 1e-2 && r1 < 1e2 && r2 > 1e-2 && r2 < 1e2);
    }

    #[test]
    fn singleton_extension() {
        let s = seq(&[&[0.6]]);
        let (_, d) = gram_duals(&s);
        let fam = DualFamily::from_gram(&d).unwrap();
        let nu = TargetSequence::new(vec![c(1.0)], Exponent::ONE).unwrap();
        let h = build_extension(&fam, &nu, &triple(2.0, 2.0)).unwrap();
        assert!(h.max_residual() < 1e-10);
        let v = h.eval(&[c(0.6)]).unwrap();
        assert_relative_eq!(v.re * 0.64, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_target_gives_zero_extension() {
        let s = seq(&[&[0.0], &[0.5]]);
        let (_, d) = gram_duals(&s);
        let fam = DualFamily::from_gram(&d).unwrap();
        let nu = TargetSequence::new(vec![c(0.0), c(0.0)], Exponent::ONE).unwrap();
        let h = build_extension(&fam, &nu, &triple(2.0, 2.0)).unwrap();
        assert_eq!(h.eval(&[c(0.3)]).unwrap(), c(0.0));
        assert_eq!(h.max_residual(), 0.0);
    }

    #[test]
    fn two_point_extension_and_norm_bound() {
        let s = seq(&[&[0.0], &[0.5]]);
        let (_, d) = gram_duals(&s);
        let fam = DualFamily::from_gram(&d).unwrap();
        let t = triple(2.0, 2.0);
        let nu = TargetSequence::new(vec![c(1.0), c(1.0)], Exponent::ONE).unwrap();
        let h = build_extension(&fam, &nu, &t).unwrap();
        assert!(h.max_residual() < 1e-8);
        let report = h.norm_report(&make_grid(1, 256).unwrap()).unwrap();
        assert!(report.h_s <= report.bound * (1.0 + 1e-12));
        // the extension continues holomorphically; its L¹ norm is at least |h(0)| = 1
        assert!(report.h_s >= 1.0 - 1e-9);
    }

    #[test]
    fn extension_is_linear() {
        let s = seq(&[&[0.1, 0.3], &[0.7, -0.2], &[-0.5, 0.5]]);
        let (_, d) = gram_duals(&s);
        let fam = DualFamily::from_gram(&d).unwrap();
        let t = triple(2.0, 2.0);
        let a = vec![Complex64::new(1.0, -0.5), c(0.0), Complex64::new(0.2, 2.0)];
        let b = vec![c(0.3), Complex64::new(-1.0, 1.0), Complex64::new(0.0, -0.7)];
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ext = |v: Vec<Complex64>| build_extension(&fam, &TargetSequence::new(v, Exponent::ONE).unwrap(), &t).unwrap();
        let (ha, hb, hs) = (ext(a), ext(b), ext(sum));
        for z in [[c(0.0), c(0.0)], [Complex64::new(0.3, 0.2), c(-0.4)], [Complex64::new(0.0, 1.0), c(1.0)]] {
            let lhs = hs.eval(&z).unwrap();
            let rhs = ha.eval(&z).unwrap() + hb.eval(&z).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
        assert!(hs.max_residual() < 1e-8);
    }

    #[test]
    fn degenerate_dual_is_reported() {
        let s = seq(&[&[0.3]]);
        let zero = KernelCombination::zero(s.clone());
        let fam = DualFamily::new(
            s,
            Exponent::TWO,
            vec![DualElement {
                combination: zero,
                factors: vec![],
                scale: 1.0,
            }],
        )
        .unwrap();
        let nu = TargetSequence::new(vec![c(1.0)], Exponent::ONE).unwrap();
        assert!(matches!(build_extension(&fam, &nu, &triple(2.0, 2.0)), Err(Error::DegenerateDual { index: 0 })));
    }

    #[test]
    fn sign_average_examples() {
        let s = seq(&[&[0.4]]);
        let (g, d) = gram_duals(&s);
        let mu = [Complex64::new(0.6, 0.8)];
        let avg = bernoulli_expectation(&g, &d.elements, &mu, SignMode::Exhaustive).unwrap();
        assert_eq!(avg.lhs, avg.rhs);
        let s = seq(&[&[0.0], &[0.5]]);
        let (g, d) = gram_duals(&s);
        let mu = [c(1.0), c(1.0)];
        let avg = bernoulli_expectation(&g, &d.elements, &mu, SignMode::Exhaustive).unwrap();
        assert_relative_eq!(avg.rhs, 8.0, epsilon = 1e-12);
        assert_relative_eq!(avg.lhs, 8.0, epsilon = 1e-12);
        let best = best_signs(&g, &d.elements, &mu, SignMode::Exhaustive).unwrap();
        // ⟨ρ_0, ρ_1⟩ = (G⁻¹)_{01} = −2√3, so opposite signs win: 8 + 4√3
        assert_relative_eq!(best.achieved, 8.0 + 4.0 * 3f64.sqrt(), epsilon = 1e-10);
        assert_eq!(best.signs.signs()[0], -best.signs.signs()[1]);
        for mask in 0..4 {
            let v = SignForm::new(&g, &d.elements, &mu).unwrap().value(SignVector::from_mask(mask, 2).signs());
            assert!(v <= best.achieved);
        }
        assert!(best.achieved >= 2.0);
    }

    #[test]
    fn exhaustive_cap_and_sampled_failure() {
        let pts: Vec<Vec<f64>> = (1..=15).map(|k| vec![1.0 - 0.6f64.powi(k)]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let s = seq(&refs);
        let (g, d) = gram_duals(&s);
        let mu = vec![c(1.0); 15];
        assert!(matches!(
            bernoulli_expectation(&g, &d.elements, &mu, SignMode::Exhaustive),
            Err(Error::ResourceCap { .. })
        ));
        assert!(matches!(
            best_signs(&g, &d.elements, &mu, SignMode::Sampled { samples: 0, seed: 1 }),
            Err(Error::SignSearchFailed { tried: 0 })
        ));
        let found = best_signs(&g, &d.elements, &mu, SignMode::Sampled { samples: 64, seed: 1 }).unwrap();
        assert!(found.achieved >= found.threshold);
    }

    #[test]
    fn sign_vectors_are_validated() {
        assert!(SignVector::new(vec![1, -1, 1]).is_ok());
        assert!(SignVector::new(vec![1, 0]).is_err());
        assert_eq!(SignVector::from_mask(0b10, 3).signs(), &[1, -1, 1]);
    }
}
