//! End-to-end tests of the command-line surface: exit codes, file formats,
//! and determinism of outputs.

use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ulam2d"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn parse_rho_column(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|line| line.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn density_uniform_fixture_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let status = run(&[
        "density",
        "--t",
        "1.0",
        "--grid",
        "64",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("cell_id,cx,cy,area,rho"));
    for rho in parse_rho_column(&text) {
        assert!((rho - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn out_of_range_parameter_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    for bad_t in ["0.5", "1.2"] {
        let result = run(&[
            "density",
            "--t",
            bad_t,
            "--grid",
            "32",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(result.status.code(), Some(1), "t = {bad_t}");
        assert!(!out.exists());
        assert!(!String::from_utf8_lossy(&result.stderr).is_empty());
    }
}

#[test]
fn unknown_flag_is_a_validation_error() {
    let result = run(&["density", "--t", "1.0", "--frobnicate"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn odd_grid_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let result = run(&[
        "density",
        "--t",
        "1.0",
        "--grid",
        "33",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn holder_fit_on_synthetic_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.csv");
    let mut csv = String::from("t,s,gap,l1_distance\n");
    for &g in &[0.01, 0.02, 0.04, 0.08f64] {
        csv.push_str(&format!("1.0,0.9,{g},{}\n", 2.0 * g.sqrt()));
    }
    fs::write(&pairs, csv).unwrap();
    let out = dir.path().join("fit.json");
    let result = run(&[
        "holder",
        "--pairs",
        pairs.to_str().unwrap(),
        "--min-distance",
        "1e-3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((fit["eta_hat"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!((fit["c_hat"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(fit["pairs_used"].as_u64().unwrap(), 4);
}

#[test]
fn svg_heatmap_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let svg = dir.path().join("d.svg");
    let result = run(&[
        "density",
        "--t",
        "1.0",
        "--grid",
        "16",
        "--out",
        out.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.trim_end().ends_with("</svg>"));

    // One path per cell plus the outline.
    let cells = fs::read_to_string(&out).unwrap().lines().count() - 1;
    let paths = text.matches("<path").count();
    assert_eq!(paths, cells + 1);

    // Uniform density: all cell fills identical.
    let fills: std::collections::BTreeSet<&str> = text
        .lines()
        .filter(|l| l.contains("stroke=\"none\""))
        .filter_map(|l| l.split("fill=\"").nth(1).and_then(|s| s.split('"').next()))
        .collect();
    assert_eq!(fills.len(), 1);
}

#[test]
fn svg_two_cell_contrast() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let svg = dir.path().join("d.svg");
    // t < 1 on the coarsest grid: the two cells carry different densities.
    let result = run(&[
        "density",
        "--t",
        "0.9",
        "--grid",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let text = fs::read_to_string(&svg).unwrap();
    let fills: Vec<&str> = text
        .lines()
        .filter(|l| l.contains("stroke=\"none\""))
        .filter_map(|l| l.split("fill=\"").nth(1).and_then(|s| s.split('"').next()))
        .collect();
    assert_eq!(fills.len(), 2);
    assert!(fills.contains(&"#000000"));
    assert!(fills.contains(&"#ffffff"));
}

#[test]
fn sweep_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let result = run(&[
        "sweep",
        "--steps",
        "3",
        "--grid",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    for name in [
        "sweep.csv",
        "pairs.csv",
        "density_000.csv",
        "density_001.csv",
        "density_002.csv",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let sweep_text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(sweep_text.starts_with("t,entropy_lebesgue,entropy_measure,density_file"));
    assert_eq!(sweep_text.lines().count(), 4);
    let pairs_text = fs::read_to_string(out.join("pairs.csv")).unwrap();
    assert_eq!(pairs_text.lines().count(), 1 + 3);

    // Sweep with too few steps is a validation error.
    let bad = run(&[
        "sweep",
        "--steps",
        "1",
        "--grid",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn entropy_report_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let result = run(&[
        "entropy",
        "--t",
        "0.9",
        "--grid",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let expected = (2.0f64 * 0.81).ln();
    for key in ["entropy_lebesgue", "entropy_measure", "birkhoff_estimate"] {
        assert!((v[key].as_f64().unwrap() - expected).abs() < 1e-12, "{key}");
    }
}

#[test]
fn verify_bounds_reports_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bounds.json");
    let result = run(&[
        "verify-bounds",
        "--steps",
        "3",
        "--random-pairs",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 3 + 5);
    for r in reports {
        for item in r["items"].as_array().unwrap() {
            assert_eq!(item["satisfied"].as_bool(), Some(true));
        }
    }
}

#[test]
fn check_ly_reports_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ly.json");
    let result = run(&[
        "check-ly",
        "--steps",
        "2",
        "--grid",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for report in v.as_array().unwrap() {
        assert!(report["theta_hat"].as_f64().unwrap() < 1.0);
        assert_eq!(report["ell"].as_u64(), Some(6));
    }
}

#[test]
fn check_ops_passes_on_moderate_grid() {
    let result = run(&["check-ops", "--grid", "64"]);
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(result.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    assert!(stdout.lines().count() >= 10);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let result = run(&[
            "density",
            "--t",
            "0.93",
            "--grid",
            "32",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn no_stray_temp_files_left() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let result = run(&[
        "density",
        "--t",
        "1.0",
        "--grid",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "tmp"))
        .collect();
    assert!(leftovers.is_empty());
    assert!(out.exists());
}
