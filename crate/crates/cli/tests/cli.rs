use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use maglab_cli::runner::ab_sweep_chart;
use maglab_cli::svg::render;

fn maglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maglab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run_config(dir: &Path, json: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = write_config(dir, "config.json", json);
    let out = dir.join("out");
    let mut args = vec!["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (maglab(&args), out)
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"version":1,"experiment":{"kind":"disk-baseline"}}"#;
    let (o, out) = run_config(dir.path(), json, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    assert!(!out.exists());
    let cfg = dir.path().join("config.json");
    assert_eq!(
        maglab(&["run", cfg.to_str().unwrap(), "--validate"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unknown_keys_and_bad_flags_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run_config(
        dir.path(),
        r#"{"version":1,"seed":1,"experiment":{"kind":"disk-baseline","cells":[8],"extra":0}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run_config(
        dir.path(),
        r#"{"version":1,"seed":1,"experiment":{"kind":"no-such-kind"}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run_config(
        dir.path(),
        r#"{"version":1,"seed":1,"experiment":{"kind":"disk-baseline"}}"#,
        &["--threads", "0"],
    );
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run_config(
        dir.path(),
        r#"{"version":1,"seed":1,"experiment":{"kind":"disk-baseline"}}"#,
        &["--format", "png"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_only_checks_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_config(
        dir.path(),
        r#"{"version":1,"seed":1,"experiment":{"kind":"inequality-suite"}}"#,
        &["--validate"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(!out.exists());
}

#[test]
fn disk_baseline_is_one_row_near_the_bessel_value() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_config(
        dir.path(),
        r#"{"version":1,"seed":1,"experiment":{"kind":"disk-baseline"}}"#,
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = read(out.join("disk_baseline.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    let lambda: f64 = col("lambda_extrapolated").parse().unwrap();
    assert!((lambda - 5.78319).abs() / 5.78319 <= 0.01, "{lambda}");
    assert_eq!(col("pass"), "true");
}

#[test]
fn empty_n_list_gives_a_header_only_profile() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"version":1,"seed":4,"experiment":{"kind":"counterexample-profile","n_list":[],"cells":33}}"#;
    let (o, out) = run_config(dir.path(), json, &["--format", "csv+svg"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = read(out.join("counterexample_profile.csv"));
    assert_eq!(
        csv,
        format!("{}\n", maglab::analysis::CompactnessProfile::CSV_HEADER)
    );
    assert!(out.join("counterexample_profile.svg").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["rows"], 0);
}

#[test]
fn failed_checks_set_the_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    // far too coarse for the 2% radial-oracle agreement
    let json = r#"{"version":1,"seed":1,"experiment":{"kind":"ab-annulus-sweep","cells":6,"alpha_steps":4}}"#;
    let (o, out) = run_config(dir.path(), json, &[]);
    assert_eq!(o.status.code(), Some(1));
    let csv = read(out.join("ab_annulus_sweep.csv"));
    assert!(
        csv.lines().skip(1).all(|l| l.contains(",true,false,")),
        "{csv}"
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["failed_checks"], 5);
    assert_eq!(manifest["flagged_rows"], 0);
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"version":1,"seed":11,"experiment":{"kind":"smooth-exceptional","n_list":[1,2,3,4],"cells":40}}"#;
    let cfg = write_config(dir.path(), "c.json", json);
    let mut csvs = Vec::new();
    let mut manifests = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let o = maglab(&[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        csvs.push(read(out.join("smooth_exceptional.csv")));
        let m: serde_json::Value = serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
        manifests.push(m);
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0].lines().count(), 5);
    assert_eq!(manifests[0]["config_sha256"], manifests[1]["config_sha256"]);
    assert_eq!(manifests[0]["diagnostics"], manifests[1]["diagnostics"]);
    assert_eq!(manifests[0]["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifests[0]["code_version"], env!("CARGO_PKG_VERSION"));
    assert!(manifests[0]["timestamp"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn seeded_studies_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"version":1,"seed":5,"experiment":{"kind":"pigeonhole-study","trials":4,"dimension":2,"n_max":4096}}"#;
    let (a, out) = run_config(dir.path(), json, &[]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let first = read(out.join("pigeonhole_study.csv"));
    let (b, _) = run_config(dir.path(), json, &["--threads", "2"]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(first, read(out.join("pigeonhole_study.csv")));
    assert_eq!(first.lines().count(), 1 + 4 * 2);
}

type Curve = Vec<(f64, f64)>;

/// Synthetic 33-point sweep with the shape of the real one.
fn synthetic_sweep() -> (Curve, Curve) {
    let alphas: Vec<f64> = (0..=32).map(|j| j as f64 / 32.0).collect();
    let dist = |a: f64| (a - a.round()).abs();
    let lam = alphas
        .iter()
        .map(|&a| (a, 39.0 + 4.0 * dist(a).powi(2)))
        .collect();
    let bound = alphas.iter().map(|&a| (a, dist(a).powi(2))).collect();
    (lam, bound)
}

#[test]
fn ab_sweep_svg_matches_golden_layout() {
    let (lam, bound) = synthetic_sweep();
    let svg = render(&ab_sweep_chart(0.5, 1.0, lam, bound));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/ab_sweep_33.svg");
    if std::env::var_os("MAGLAB_UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    assert_eq!(svg, read(golden));
}

#[test]
fn ab_sweep_run_draws_two_curves_of_33_points() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"version":1,"seed":1,"experiment":{"kind":"ab-annulus-sweep","cells":12}}"#;
    let (o, out) = run_config(dir.path(), json, &["--format", "csv+svg", "--threads", "2"]);
    assert!(
        matches!(o.status.code(), Some(0 | 1)),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(read(out.join("ab_annulus_sweep.csv")).lines().count(), 34);
    let svg = read(out.join("ab_annulus_sweep.svg"));
    let polylines: Vec<&str> = svg.lines().filter(|l| l.starts_with("<polyline")).collect();
    assert_eq!(polylines.len(), 2);
    for p in polylines {
        let pts = p
            .split("points=\"")
            .nth(1)
            .unwrap()
            .trim_end_matches("\"/>");
        assert_eq!(pts.split(' ').count(), 33);
    }
    assert!(svg.contains("data-name=\"lambda_m\"") && svg.contains("data-name=\"lower bound\""));
}
