//! Report schema and its JSON-lines and CSV encodings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::generate::{Family, GeneratorSpec};
use crate::LabError;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A value or the error that prevented it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome<T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<T> Outcome<T> {
    pub fn ok(value: T) -> Self {
        Self {
            value: Some(value),
            error: None,
        }
    }

    pub fn err(error: impl ToString) -> Self {
        Self {
            value: None,
            error: Some(error.to_string()),
        }
    }

    pub fn from_result<E: ToString>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Self::ok(v),
            Err(e) => Self::err(e),
        }
    }

    pub fn value(&self) -> Option<&T> {
        self.value.as_ref()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcReport {
    pub center: f64,
    pub half_length: f64,
    pub full: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangularReport {
    pub constant: f64,
    pub mass: f64,
    pub witness: Vec<ArcReport>,
    /// `atom:<index>` or `dyadic:<depth>/<index>,...`.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenSetReport {
    pub constant: f64,
    pub mass: f64,
    pub area: f64,
    pub components: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub p: f64,
    pub bound: Outcome<f64>,
    pub probe: Option<usize>,
    /// Probes left out because their kernels are too sharp for the quadrature budget.
    pub skipped_probes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBoundReport {
    pub h_s: f64,
    pub g_p: f64,
    pub f_q: f64,
    pub gamma_max: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub max_residual: f64,
    pub linearity_gap: f64,
    pub norms: Outcome<NormBoundReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub mode: String,
    pub samples: u64,
    pub seed: Option<u64>,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_gap: f64,
    pub best: Outcome<f64>,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralPoint {
    pub index: usize,
    pub max_modulus: f64,
    pub ratios: Outcome<[f64; 2]>,
    pub gamma: Outcome<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmoReport {
    pub exponent: f64,
    /// `(depth, proxy)` for depths `1..=depth`.
    pub by_depth: Vec<(u32, f64)>,
    pub witness: Vec<(u32, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Analyses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolation_constant_h2: Option<Outcome<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_bound_h2: Option<Outcome<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rectangular_constant: Option<Outcome<RectangularReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open_set_lower: Option<Outcome<OpenSetReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding_lower_bounds: Option<Vec<EmbeddingReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gleason_product_min: Option<Outcome<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension: Option<Outcome<ExtensionReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signs: Option<Outcome<SignReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural_ratios: Option<Vec<StructuralPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bmo: Option<Outcome<BmoReport>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub m: usize,
    pub depth: u32,
    pub quadrature_tol: f64,
    /// `m · min_j (1 − |a_j|) / 2π`: grid nodes across the narrowest kernel peak.
    /// Below 1 the grid analyses (extension norms, balayage) alias the peaks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_per_peak: Option<f64>,
}

/// Everything computed for one generated sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub family: Family,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub seed: u64,
    pub generator: GeneratorSpec,
    pub grid: GridReport,
    /// Arc convention for boundary rectangles.
    pub rectangle_convention: String,
    pub config: Config,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation_error: Option<String>,
    pub analyses: Analyses,
}

pub fn write_json_lines<W: Write>(mut out: W, reports: &[ExperimentReport]) -> Result<(), LabError> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| LabError::Io("output".into(), e))?;
    }
    Ok(())
}

pub fn read_json_lines(text: &str) -> Result<Vec<ExperimentReport>, LabError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(LabError::from))
        .collect()
}

/// One flattened row per (sequence, analysis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub family: Family,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub seed: u64,
    pub analysis: String,
    pub status: String,
    pub value: Option<f64>,
    pub detail: String,
}

fn row<T>(r: &ExperimentReport, analysis: &str, o: &Outcome<T>, value: impl Fn(&T) -> f64, detail: impl Fn(&T) -> String) -> CsvRow {
    CsvRow {
        family: r.family,
        big_n: r.big_n,
        n: r.n,
        seed: r.seed,
        analysis: analysis.into(),
        status: if o.value.is_some() { "ok" } else { "error" }.into(),
        value: o.value.as_ref().map(&value),
        detail: match (&o.value, &o.error) {
            (Some(v), _) => detail(v),
            (None, Some(e)) => e.clone(),
            (None, None) => String::new(),
        },
    }
}

pub fn csv_rows(r: &ExperimentReport) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    if let Some(e) = &r.generation_error {
        rows.push(row(r, "generate", &Outcome::<f64>::err(e), |v| *v, |_| String::new()));
        return rows;
    }
    let a = &r.analyses;
    let none = |_: &f64| String::new();
    if let Some(o) = &a.interpolation_constant_h2 {
        rows.push(row(r, "interpolation_constant_h2", o, |v| *v, none));
    }
    if let Some(o) = &a.dual_bound_h2 {
        rows.push(row(r, "dual_bound_h2", o, |v| *v, none));
    }
    if let Some(o) = &a.rectangular_constant {
        rows.push(row(r, "rectangular_constant", o, |v| v.constant, |v| v.source.clone()));
    }
    if let Some(o) = &a.open_set_lower {
        rows.push(row(r, "open_set_lower", o, |v| v.constant, |v| v.components.join(";")));
    }
    for e in a.embedding_lower_bounds.iter().flatten() {
        let name = format!("embedding_lower_bound_p{}", e.p);
        rows.push(row(r, &name, &e.bound, |v| *v, |_| format!("skipped_probes={}", e.skipped_probes)));
    }
    if let Some(o) = &a.gleason_product_min {
        rows.push(row(r, "gleason_product_min", o, |v| *v, none));
    }
    if let Some(o) = &a.extension {
        rows.push(row(r, "extension_max_residual", o, |v| v.max_residual, |v| format!("linearity_gap={:e}", v.linearity_gap)));
    }
    if let Some(o) = &a.signs {
        rows.push(row(r, "sign_average_gap", o, |v| v.relative_gap, |v| format!("{} samples={}", v.mode, v.samples)));
    }
    for s in a.structural_ratios.iter().flatten() {
        rows.push(row(r, &format!("structural_gamma_{}", s.index), &s.gamma, |v| *v, |_| format!("max_modulus={}", s.max_modulus)));
    }
    if let Some(o) = &a.bmo {
        rows.push(row(r, "bmo_proxy", o, |v| v.by_depth.last().map_or(0.0, |d| d.1), |v| format!("depth={}", v.by_depth.len())));
    }
    rows
}

pub fn write_csv<W: Write>(out: W, reports: &[ExperimentReport]) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        for row in csv_rows(r) {
            w.serialize(row)?;
        }
    }
    w.flush().map_err(|e| LabError::Io("output".into(), e))?;
    Ok(())
}
