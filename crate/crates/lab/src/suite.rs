//! Sweeps and report output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::analysis::analyze;
use crate::config::{Config, Format};
use crate::generate::GeneratorSpec;
use crate::report::{write_csv, write_json_lines, ExperimentReport};
use crate::LabError;

/// Every family of `config` at counts `1..=config.count`, family-major.
pub fn suite_specs(config: &Config) -> Vec<GeneratorSpec> {
    config
        .families
        .iter()
        .flat_map(|&f| (1..=config.count).map(move |c| config.spec(f, c)))
        .collect()
}

/// One report per spec, in input order; sequences run concurrently.
pub fn run_suite(config: &Config, specs: &[GeneratorSpec]) -> Vec<ExperimentReport> {
    specs.par_iter().map(|s| analyze(config, s)).collect()
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_reports(path: Option<&Path>, format: Format, reports: &[ExperimentReport]) -> Result<(), LabError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| LabError::Io(p.display().to_string(), e))?;
            let mut out = BufWriter::new(file);
            encode(&mut out, format, reports)?;
            out.flush().map_err(|e| LabError::Io(p.display().to_string(), e))
        }
        None => encode(std::io::stdout().lock(), format, reports),
    }
}

fn encode<W: Write>(out: W, format: Format, reports: &[ExperimentReport]) -> Result<(), LabError> {
    match format {
        Format::Json => write_json_lines(out, reports),
        Format::Csv => write_csv(out, reports),
    }
}
