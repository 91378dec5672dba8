//! Experiment configuration: a TOML file mirroring the command-line flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use polydisc::hardy::HolderTriple;
use polydisc::Exponent;
use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::generate::{Family, GeneratorSpec};
use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(LabError::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// Exponents `(p, q, s)`; `f64::INFINITY` is written `inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleConfig {
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl TripleConfig {
    pub fn to_triple(self) -> Result<HolderTriple, LabError> {
        Ok(HolderTriple::new(Exponent::new(self.p)?, Exponent::new(self.q)?, Exponent::new(self.s)?)?)
    }
}

impl fmt::Display for TripleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.q, self.s)
    }
}

fn parse_exponent(s: &str) -> Result<f64, LabError> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => {
            if let Some((a, b)) = t.split_once('/') {
                let (a, b): (f64, f64) = (parse_number(a)?, parse_number(b)?);
                Ok(a / b)
            } else {
                parse_number(t)
            }
        }
    }
}

fn parse_number(s: &str) -> Result<f64, LabError> {
    s.trim().parse().map_err(|_| LabError::Config(format!("`{s}` is not a number")))
}

impl FromStr for TripleConfig {
    type Err = LabError;

    /// `p,q,s` or `p,q` (then `1/s = 1/p + 1/q`); fractions such as `4/3` are accepted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        let (p, q) = match parts.as_slice() {
            [p, q] | [p, q, _] => (parse_exponent(p)?, parse_exponent(q)?),
            _ => return Err(LabError::Config(format!("triple `{s}` must be p,q or p,q,s"))),
        };
        let s = match parts.get(2) {
            Some(v) => parse_exponent(v)?,
            None => HolderTriple::from_pq(Exponent::new(p)?, Exponent::new(q)?)?.s().value(),
        };
        Ok(Self { p, q, s })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub families: Vec<Family>,
    /// Points per sequence; the side length for the lattice family.
    pub count: usize,
    pub dim: usize,
    pub seed: u64,
    /// Nodes per circle of the torus grid used by quadrature analyses.
    pub grid: usize,
    /// Dyadic depth for Carleson witnesses and the BMO proxy.
    pub depth: u32,
    pub triple: TripleConfig,
    pub ratio: f64,
    pub shrink: f64,
    pub min_distance: f64,
    pub budget: usize,
    pub max_components: usize,
    pub embedding_exponents: Vec<f64>,
    pub sign_samples: u64,
    /// Relative tolerance of refined one-variable norms.
    pub quadrature_tol: f64,
    /// Points with a coordinate beyond this modulus skip true-norm quadrature.
    pub quadrature_radius: f64,
    pub format: Format,
    pub analyses: Vec<Analysis>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            families: vec![Family::Radial, Family::Lattice, Family::Colliding],
            count: 8,
            dim: 2,
            seed: 1,
            grid: 64,
            depth: 4,
            triple: TripleConfig { p: 2.0, q: 2.0, s: 1.0 },
            ratio: 0.1,
            shrink: 0.5,
            min_distance: 0.5,
            budget: 1000,
            max_components: 4,
            embedding_exponents: vec![1.5, 2.0, 4.0],
            sign_samples: 4096,
            quadrature_tol: 1e-8,
            quadrature_radius: 0.999,
            format: Format::Json,
            analyses: Analysis::ALL.to_vec(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        self.triple.to_triple()?;
        if self.dim == 0 || self.dim > 3 {
            return Err(LabError::Config(format!("dimension {} is outside 1..=3", self.dim)));
        }
        if self.grid < 4 || !self.grid.is_multiple_of(2) {
            return Err(LabError::Config(format!("grid {} must be even and at least 4", self.grid)));
        }
        if self.max_components == 0 {
            return Err(LabError::Config("max_components must be at least 1".into()));
        }
        if self.embedding_exponents.iter().any(|&p| !(1.0..f64::INFINITY).contains(&p)) {
            return Err(LabError::Config("embedding exponents must lie in [1, ∞)".into()));
        }
        if self.quadrature_tol.is_nan() || self.quadrature_tol <= 0.0 {
            return Err(LabError::Config("quadrature_tol must be positive".into()));
        }
        Ok(())
    }

    /// Generator spec for one family at `count`.
    pub fn spec(&self, family: Family, count: usize) -> GeneratorSpec {
        GeneratorSpec {
            family,
            count,
            dim: self.dim,
            seed: self.seed,
            ratio: self.ratio,
            shrink: self.shrink,
            min_distance: self.min_distance,
            budget: self.budget,
        }
    }
}
