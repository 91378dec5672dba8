//! Runs the named analyses on one generated sequence.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use polydisc::carleson::{
    balayage, chi_measure, dyadic_bmo_proxy, embedding_lower_bound, open_set_constant_lower, rectangular_constant, BalayageNormalization,
    CandidateFamily, Component, DiscreteMeasure, Rectangle,
};
use polydisc::extension::{
    bernoulli_expectation, best_signs, build_extension, gamma_coefficient, structural_hypotheses_check, DualFamily, NormMode, SignMode,
    TargetSequence, EXHAUSTIVE_SIGN_CAP,
};
use polydisc::gram::{gram_matrix, GramFactor, GramMatrix};
use polydisc::hardy::min_gleason_product;
use polydisc::torus::make_grid;
use polydisc::{Exponent, HolderTriple, PointSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::generate::{generate, GeneratorSpec};
use crate::report::*;
use crate::LabError;

pub const RECTANGLE_CONVENTION: &str = "arc: |theta_j - arg z_j| <= 1 - |z_j|, full circle when z_j = 0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Interpolation,
    Rectangular,
    OpenSet,
    Embedding,
    Gleason,
    Extension,
    Signs,
    Structural,
    Bmo,
}

impl Analysis {
    pub const ALL: [Analysis; 9] = [
        Analysis::Interpolation,
        Analysis::Rectangular,
        Analysis::OpenSet,
        Analysis::Embedding,
        Analysis::Gleason,
        Analysis::Extension,
        Analysis::Signs,
        Analysis::Structural,
        Analysis::Bmo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Interpolation => "interpolation",
            Analysis::Rectangular => "rectangular",
            Analysis::OpenSet => "open-set",
            Analysis::Embedding => "embedding",
            Analysis::Gleason => "gleason",
            Analysis::Extension => "extension",
            Analysis::Signs => "signs",
            Analysis::Structural => "structural",
            Analysis::Bmo => "bmo",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown analysis `{s}`")))
    }
}

fn points_of(seq: &PointSequence) -> Vec<Vec<[f64; 2]>> {
    seq.points().iter().map(|p| p.coords().iter().map(|c| [c.re, c.im]).collect()).collect()
}

fn arcs_of(r: &Rectangle) -> Vec<ArcReport> {
    r.arcs()
        .iter()
        .map(|a| ArcReport {
            center: a.center(),
            half_length: a.half_length(),
            full: a.is_full(),
        })
        .collect()
}

fn component_name(c: &Component) -> String {
    match c {
        Component::Atom(i) => format!("atom:{i}"),
        Component::Dyadic(d) => {
            let parts: Vec<String> = d.levels().iter().map(|(l, k)| format!("{l}/{k}")).collect();
            format!("dyadic:{}", parts.join(","))
        }
    }
}

fn max_modulus(p: &polydisc::Point) -> f64 {
    p.coords().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn nodes_per_peak(seq: &PointSequence, m: usize) -> f64 {
    let gap = seq.points().iter().map(|p| 1.0 - max_modulus(p)).fold(1.0, f64::min);
    m as f64 * gap / std::f64::consts::TAU
}

/// Seeded targets in the closed unit disc.
pub fn targets(seed: u64, len: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let r = rng.random::<f64>().sqrt();
            Complex64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
        })
        .collect()
}

/// One report for `spec`; generator and analysis failures are recorded, never raised.
pub fn analyze(config: &Config, spec: &GeneratorSpec) -> ExperimentReport {
    let mut report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        family: spec.family,
        big_n: spec.point_count(),
        n: spec.dim,
        seed: spec.seed,
        generator: spec.clone(),
        grid: GridReport {
            m: config.grid,
            depth: config.depth,
            quadrature_tol: config.quadrature_tol,
            nodes_per_peak: None,
        },
        rectangle_convention: RECTANGLE_CONVENTION.into(),
        config: config.clone(),
        points: None,
        generation_error: None,
        analyses: Analyses::default(),
    };
    match generate(spec) {
        Ok(seq) => {
            report.big_n = seq.len();
            report.points = Some(points_of(&seq));
            report.grid.nodes_per_peak = Some(nodes_per_peak(&seq, config.grid));
            report.analyses = run_analyses(config, &Arc::new(seq));
        }
        Err(e) => report.generation_error = Some(e.to_string()),
    }
    report
}

fn run_analyses(config: &Config, seq: &Arc<PointSequence>) -> Analyses {
    let mut out = Analyses::default();
    let gram = gram_matrix(seq);
    let factor = gram.factor();
    let mu = chi_measure(seq);
    let triple = config.triple.to_triple();
    for analysis in &config.analyses {
        match analysis {
            Analysis::Interpolation => {
                out.interpolation_constant_h2 = Some(Outcome::from_result(factor.as_ref().map(|f| f.interpolation_constant())));
                out.dual_bound_h2 = Some(Outcome::from_result(factor.as_ref().map(|f| f.dual_bound())));
            }
            Analysis::Rectangular => out.rectangular_constant = Some(rectangular(&mu, config.depth)),
            Analysis::OpenSet => out.open_set_lower = Some(open_set(&mu, config)),
            Analysis::Embedding => out.embedding_lower_bounds = Some(embedding(seq, config)),
            Analysis::Gleason => {
                out.gleason_product_min = Some(if seq.len() < 2 {
                    Outcome::err("needs at least two points")
                } else {
                    Outcome::ok(min_gleason_product(seq))
                })
            }
            Analysis::Extension => {
                out.extension = Some(match &triple {
                    Ok(t) => Outcome::from_result(extension(&gram, &factor, t, config)),
                    Err(e) => Outcome::err(e),
                })
            }
            Analysis::Signs => out.signs = Some(Outcome::from_result(signs(&gram, &factor, config))),
            Analysis::Structural => {
                out.structural_ratios = Some(match &triple {
                    Ok(t) => structural(seq, t, config),
                    Err(_) => Vec::new(),
                })
            }
            Analysis::Bmo => out.bmo = Some(Outcome::from_result(bmo(&mu, config))),
        }
    }
    out
}

fn rectangular(mu: &DiscreteMeasure, depth: u32) -> Outcome<RectangularReport> {
    Outcome::from_result(rectangular_constant(mu, depth).map(|b| RectangularReport {
        constant: b.constant,
        mass: b.mass,
        witness: arcs_of(&b.witness),
        source: component_name(&b.source),
    }))
}

fn open_set(mu: &DiscreteMeasure, config: &Config) -> Outcome<OpenSetReport> {
    Outcome::from_result(
        open_set_constant_lower(mu, config.depth, config.max_components, CandidateFamily::DyadicAndAtoms).map(|b| OpenSetReport {
            constant: b.constant,
            mass: b.mass,
            area: b.area,
            components: b.witness.iter().map(component_name).collect(),
        }),
    )
}

fn embedding(seq: &Arc<PointSequence>, config: &Config) -> Vec<EmbeddingReport> {
    config
        .embedding_exponents
        .iter()
        .map(|&p| {
            // the p = 2 norm is closed-form, other exponents need quadrature
            let keep: Vec<_> = seq
                .points()
                .iter()
                .filter(|w| p == 2.0 || max_modulus(w) <= config.quadrature_radius)
                .cloned()
                .collect();
            let skipped = seq.len() - keep.len();
            let bound = Exponent::new(p).map_err(LabError::from).and_then(|e| {
                let probes = PointSequence::new(keep.clone())?;
                Ok(embedding_lower_bound(seq, e, &probes, config.quadrature_tol)?)
            });
            let probe = bound.as_ref().ok().map(|b| seq.position(&keep[b.probe]).unwrap_or(b.probe));
            EmbeddingReport {
                p,
                bound: Outcome::from_result(bound.map(|b| b.value)),
                probe,
                skipped_probes: skipped,
            }
        })
        .collect()
}

type Factor = polydisc::Result<GramFactor>;

fn extension(gram: &GramMatrix, factor: &Factor, triple: &HolderTriple, config: &Config) -> Result<ExtensionReport, LabError> {
    let seq = gram.sequence();
    let duals = DualFamily::from_gram(&factor.clone()?.dual_sequence())?.rescaled(triple.p());
    let n = seq.len();
    let nu = targets(config.seed, n);
    let nu2 = targets(config.seed.wrapping_add(1), n);
    let sum: Vec<Complex64> = nu.iter().zip(&nu2).map(|(a, b)| a + b).collect();
    let build = |v: &[Complex64]| build_extension(&duals, &TargetSequence::new(v.to_vec(), triple.s())?, triple);
    let (h, h2, hs) = (build(&nu)?, build(&nu2)?, build(&sum)?);
    let mut gap = 0.0f64;
    for b in seq.points() {
        let z = b.coords();
        let v = hs.eval_unchecked(z);
        gap = gap.max((v - h.eval_unchecked(z) - h2.eval_unchecked(z)).norm() / v.norm().max(1.0));
    }
    let norms = make_grid(seq.dim(), config.grid).and_then(|g| h.norm_report(&g)).map(|r| NormBoundReport {
        h_s: r.h_s,
        g_p: r.g_p,
        f_q: r.f_q,
        gamma_max: r.gamma_max,
        bound: r.bound,
    });
    Ok(ExtensionReport {
        max_residual: h.max_residual(),
        linearity_gap: gap,
        norms: Outcome::from_result(norms),
    })
}

fn signs(gram: &GramMatrix, factor: &Factor, config: &Config) -> Result<SignReport, LabError> {
    let duals = factor.clone()?.dual_sequence();
    let n = gram.len();
    let mu = targets(config.seed, n);
    let (mode, name, seed) = if n <= EXHAUSTIVE_SIGN_CAP {
        (SignMode::Exhaustive, "exhaustive", None)
    } else {
        (
            SignMode::Sampled {
                samples: config.sign_samples,
                seed: config.seed,
            },
            "sampled",
            Some(config.seed),
        )
    };
    let avg = bernoulli_expectation(gram, &duals.elements, &mu, mode)?;
    let best = best_signs(gram, &duals.elements, &mu, mode);
    let threshold = mu.iter().map(|m| m.norm_sqr()).sum();
    Ok(SignReport {
        mode: name.into(),
        samples: avg.samples,
        seed,
        lhs: avg.lhs,
        rhs: avg.rhs,
        relative_gap: avg.relative_gap(),
        best: Outcome::from_result(best.map(|b| b.achieved)),
        threshold,
    })
}

fn structural(seq: &PointSequence, triple: &HolderTriple, config: &Config) -> Vec<StructuralPoint> {
    let mode = NormMode::Quadrature { tol: config.quadrature_tol };
    seq.points()
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let m = max_modulus(a);
            if m > config.quadrature_radius {
                let why = format!("modulus {m} exceeds the quadrature radius {}", config.quadrature_radius);
                return StructuralPoint {
                    index,
                    max_modulus: m,
                    ratios: Outcome::err(&why),
                    gamma: Outcome::err(why),
                };
            }
            StructuralPoint {
                index,
                max_modulus: m,
                ratios: Outcome::from_result(structural_hypotheses_check(a, triple, mode).map(|(r1, r2)| [r1, r2])),
                gamma: Outcome::from_result(gamma_coefficient(a, triple, mode)),
            }
        })
        .collect()
}

/// Exponent of the Poisson family used for the balayage.
pub const BALAYAGE_EXPONENT: f64 = 2.0;

fn bmo(mu: &DiscreteMeasure, config: &Config) -> Result<BmoReport, LabError> {
    let grid = make_grid(mu.dim(), config.grid)?;
    let samples = balayage(mu, BALAYAGE_EXPONENT, &grid, BalayageNormalization::Raw)?;
    let mut by_depth = Vec::new();
    let mut witness = Vec::new();
    for d in 1..=config.depth {
        let b = dyadic_bmo_proxy(&samples, d)?;
        by_depth.push((d, b.value));
        witness = b.witness.levels().to_vec();
    }
    Ok(BmoReport {
        exponent: BALAYAGE_EXPONENT,
        by_depth,
        witness,
    })
}
