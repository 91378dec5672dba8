//! Experiment harness for the `polydisc` crate: sequence generators, analysis
//! suites, JSON-lines and CSV reports, and trend summaries across families.

pub mod analysis;
pub mod config;
pub mod correlate;
pub mod generate;
pub mod report;
pub mod suite;

pub use analysis::{analyze, Analysis};
pub use config::{Config, Format, TripleConfig};
pub use correlate::{correlation_report, CorrelationReport, FamilyTrend, Trend};
pub use generate::{generate, Family, GeneratorSpec};
pub use report::ExperimentReport;
pub use suite::{run_suite, suite_specs, write_reports};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] polydisc::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Config(String),
    #[error("generator: {0}")]
    Generate(String),
}
