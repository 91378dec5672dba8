use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polydisc_lab::analysis::Analysis;
use polydisc_lab::config::{Config, Format, TripleConfig};
use polydisc_lab::correlate::correlation_report;
use polydisc_lab::generate::{generate, Family};
use polydisc_lab::report::read_json_lines;
use polydisc_lab::{analyze, run_suite, suite_specs, write_reports, LabError};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "polylab", version, about = "Interpolation and Carleson experiments on the polydisc")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the generated point sequences.
    Generate(Flags),
    /// Analyze one sequence per family at the requested count.
    Analyze(Flags),
    /// Analyze every family at counts 1..=count.
    Suite(Flags),
    /// Summarize trends in a JSON-lines report file.
    Correlate {
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
}

#[derive(Args)]
struct Flags {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated: radial, lattice, random-separated, colliding.
    #[arg(long, value_delimiter = ',')]
    family: Option<Vec<Family>>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Nodes per circle.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    depth: Option<u32>,
    /// `p,q,s` or `p,q`.
    #[arg(long)]
    triple: Option<TripleConfig>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Comma-separated subset of the analyses.
    #[arg(long, value_delimiter = ',')]
    analyses: Option<Vec<Analysis>>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    shrink: Option<f64>,
    #[arg(long)]
    min_distance: Option<f64>,
    #[arg(long)]
    max_components: Option<usize>,
    #[arg(long)]
    sign_samples: Option<u64>,
}

impl Flags {
    fn resolve(&self) -> Result<Config, LabError> {
        let mut c = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        macro_rules! set {
            ($($field:ident <- $flag:ident),*) => {$(
                if let Some(v) = &self.$flag {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(families <- family, count <- count, dim <- dim, seed <- seed, grid <- grid, depth <- depth,
            triple <- triple, format <- format, analyses <- analyses, ratio <- ratio, shrink <- shrink,
            min_distance <- min_distance, max_components <- max_components, sign_samples <- sign_samples);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Serialize)]
struct Generated {
    family: Family,
    spec: polydisc_lab::GeneratorSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), LabError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| LabError::Io(p.display().to_string(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::Generate(flags) => {
            let c = flags.resolve()?;
            let mut text = String::new();
            for &family in &c.families {
                let spec = c.spec(family, c.count);
                let (points, error) = match generate(&spec) {
                    Ok(s) => (Some(s.points().iter().map(|p| p.coords().iter().map(|z| [z.re, z.im]).collect()).collect()), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                text += &serde_json::to_string(&Generated { family, spec, points, error })?;
                text.push('\n');
            }
            write_text(flags.out.as_deref(), &text)
        }
        Command::Analyze(flags) => {
            let c = flags.resolve()?;
            let reports: Vec<_> = c.families.iter().map(|&f| analyze(&c, &c.spec(f, c.count))).collect();
            write_reports(flags.out.as_deref(), c.format, &reports)
        }
        Command::Suite(flags) => {
            let c = flags.resolve()?;
            let reports = run_suite(&c, &suite_specs(&c));
            write_reports(flags.out.as_deref(), c.format, &reports)
        }
        Command::Correlate { reports, out, format } => {
            let mut all = Vec::new();
            for p in &reports {
                let text = std::fs::read_to_string(p).map_err(|e| LabError::Io(p.display().to_string(), e))?;
                all.extend(read_json_lines(&text)?);
            }
            let summary = correlation_report(&all);
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["family", "n", "N", "interpolation_constant_h2", "rectangular_constant", "ratio", "bmo", "flag"])?;
                    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                    for f in &summary.families {
                        for p in &f.points {
                            w.write_record([
                                f.family.to_string(),
                                f.n.to_string(),
                                p.big_n.to_string(),
                                opt(p.interpolation_constant_h2),
                                opt(p.rectangular_constant),
                                opt(p.ratio),
                                opt(p.bmo),
                                f.flag.clone(),
                            ])?;
                        }
                    }
                    String::from_utf8(w.into_inner().map_err(|e| LabError::Io("csv".into(), e.into_error()))?)
                        .map_err(|e| LabError::Config(e.to_string()))?
                }
            };
            write_text(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polylab: {e}");
            ExitCode::FAILURE
        }
    }
}
