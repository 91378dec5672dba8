use std::path::Path;
use std::process::{Command, Output};

use polydisc::hardy::gleason_distance;
use polydisc::Point;
use polydisc_lab::analysis::Analysis;
use polydisc_lab::correlate::correlation_report;
use polydisc_lab::report::{csv_rows, read_json_lines};
use polydisc_lab::{analyze, run_suite, suite_specs, Config, Family};

fn polylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polylab")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn constants_only(families: Vec<Family>, count: usize) -> Config {
    Config {
        families,
        count,
        analyses: vec![Analysis::Interpolation, Analysis::Rectangular],
        ..Config::default()
    }
}

#[test]
fn radial_sweep_has_both_constants_bounded() {
    let c = constants_only(vec![Family::Radial], 10);
    let reports = run_suite(&c, &suite_specs(&c));
    assert_eq!(reports.len(), 10);
    for r in &reports {
        assert!(r.analyses.interpolation_constant_h2.as_ref().unwrap().value().is_some());
        assert!(r.analyses.rectangular_constant.as_ref().unwrap().value().is_some());
        assert!(r.analyses.open_set_lower.is_none());
    }
    let summary = correlation_report(&reports);
    assert_eq!(summary.families[0].flag, "both-bounded");
    assert!(summary.families[0].points.iter().all(|p| p.ratio.is_some()));
}

#[test]
fn colliding_sweep_is_interpolation_degenerate() {
    let c = constants_only(vec![Family::Colliding], 8);
    let summary = correlation_report(&run_suite(&c, &suite_specs(&c)));
    assert_eq!(summary.families[0].flag, "interpolation-degenerate");
}

#[test]
fn identical_reports_make_a_degenerate_scatter() {
    let c = constants_only(vec![Family::Radial], 4);
    let r = analyze(&c, &c.spec(Family::Radial, 4));
    let summary = correlation_report(&[r.clone(), r]);
    assert!(summary.families[0].degenerate);
    assert_eq!(summary.families[0].flag, "degenerate-scatter");
}

#[test]
fn failures_stay_inside_their_report() {
    let mut c = Config {
        count: 4,
        min_distance: 0.999,
        budget: 2,
        ..Config::default()
    };
    c.families = vec![Family::Radial];
    let alone = run_suite(&c, &suite_specs(&c));
    c.families = vec![Family::RandomSeparated, Family::Radial];
    let mixed = run_suite(&c, &suite_specs(&c));
    let failed = mixed.iter().filter(|r| r.generation_error.is_some()).count();
    assert!(failed > 0);
    let radial: Vec<_> = mixed.iter().filter(|r| r.family == Family::Radial).map(|r| &r.analyses).collect();
    assert_eq!(radial, alone.iter().map(|r| &r.analyses).collect::<Vec<_>>());
    // one CSV row records the generator failure
    let rows = csv_rows(mixed.iter().find(|r| r.generation_error.is_some()).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].status, "error");
}

#[test]
fn random_separated_output_is_separated() {
    let c = Config {
        families: vec![Family::RandomSeparated],
        count: 8,
        min_distance: 0.6,
        analyses: vec![Analysis::Gleason],
        ..Config::default()
    };
    for r in run_suite(&c, &suite_specs(&c)) {
        let pts: Vec<Point> = r
            .points
            .unwrap()
            .iter()
            .map(|p| Point::new(p.iter().map(|z| num_complex::Complex64::new(z[0], z[1])).collect()).unwrap())
            .collect();
        for i in 0..pts.len() {
            for j in 0..i {
                assert!(gleason_distance(&pts[i], &pts[j]).unwrap() >= 0.6);
            }
        }
    }
}

#[test]
fn suite_output_is_byte_identical_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, csv) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"), dir.path().join("a.csv"));
    let args = |out: &Path, format: &str| {
        let o = polylab(&["suite", "--family", "radial,colliding", "--count", "5", "--grid", "32", "--format", format, "--out", path(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    args(&a, "json");
    args(&b, "json");
    args(&csv, "csv");
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let reports = read_json_lines(&text).unwrap();
    assert_eq!(reports.len(), 10);
    assert!(reports.iter().all(|r| r.config.grid == 32 && r.grid.m == 32));
    let rows: usize = reports.iter().map(|r| csv_rows(r).len()).sum();
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("family,N,n,seed,analysis,status,value,detail"));
    assert_eq!(csv_text.lines().count(), rows + 1);

    let o = polylab(&["correlate", path(&a)]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["reports"], 10);
}

#[test]
fn empty_suite_is_an_empty_stream() {
    let c = Config {
        families: Vec::new(),
        ..Config::default()
    };
    assert!(run_suite(&c, &suite_specs(&c)).is_empty());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "families = []\n").unwrap();
    let out = dir.path().join("out.jsonl");
    let o = polylab(&["suite", "--config", path(&cfg), "--out", path(&out)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "count = 2\nseed = 9\ngrid = 16\nfamilies = [\"lattice\"]\nanalyses = [\"interpolation\"]\n").unwrap();
    let o = polylab(&["analyze", "--config", path(&cfg), "--seed", "4", "--triple", "2,4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &read_json_lines(&String::from_utf8(o.stdout).unwrap()).unwrap()[0];
    assert_eq!((r.seed, r.config.count, r.config.grid, r.big_n), (4, 2, 16, 4));
    assert!((r.config.triple.s - 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn bad_input_fails_cleanly() {
    let o = polylab(&["suite", "--out", "/nonexistent-dir/x.jsonl", "--count", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/x.jsonl"));
    assert!(!polylab(&["suite", "--triple", "2,2,2"]).status.success());
    assert!(!polylab(&["suite", "--family", "spiral"]).status.success());
    let o = polylab(&["generate", "--family", "random-separated", "--count", "100", "--min-distance", "0.99"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"error\""));
}
