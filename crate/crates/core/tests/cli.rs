//! Exit-code and output contract of the command-line binary: 0 when every
//! check passes, 1 on a verification failure, 2 on usage or configuration
//! errors.

use std::path::Path;
use std::process::{Command, Output};

use derham::geometry::geometry_catalog;

fn derham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_derham"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn bundled(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn study_on_the_bundled_flat_config_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = derham(&[
        "study",
        &bundled("role0-p2-flat.json"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("STUDY: PASS"));

    let csv = std::fs::read_to_string(dir.path().join("role0-p2-flat.csv")).unwrap();
    assert!(csv.starts_with("level,h,L2,H1,rate_L2,rate_H1"));
    assert_eq!(csv.lines().count(), 5, "header plus one row per level");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("role0-p2-flat-summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["pass"], serde_json::Value::Bool(true));
    assert_eq!(summary["config"]["seed"], serde_json::json!(0));
    let rate = summary["final_rates"][0].as_f64().unwrap();
    assert!((rate - 3.0).abs() <= 0.15, "role-0 p=2 L² rate {rate}");
}

#[test]
fn study_with_a_single_level_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("one-level.json");
    std::fs::write(
        &config,
        r#"{"geometry":"flat-square","role":0,"degrees":[2,2],"levels":1,
           "solution":"trig","norms":["L2"],"projector":"tilde-interpolant"}"#,
    )
    .unwrap();
    let out = derham(&["study", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least 3 refinement levels"));
}

#[test]
fn study_with_mismatched_interface_knots_prints_the_conformity_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = derham(&[
        "study",
        &bundled("mismatched-two-squares.json"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("non-conforming"), "stderr: {err}");
    assert!(err.contains("knots MISMATCH"), "stderr: {err}");
}

#[test]
fn verify_complex_passes_in_both_dimensions() {
    for args in [
        vec!["verify-complex"],
        vec!["verify-complex", "--dim", "3", "--degree", "1", "--levels", "1"],
    ] {
        let out = derham(&args);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        let text = stdout(&out);
        assert!(text.contains("VERIFY: PASS"));
        assert!(text.contains("exactness"));
        assert!(text.contains("commuting"));
    }
}

#[test]
fn verify_complex_with_a_corrupted_derivative_fails() {
    let out = derham(&["verify-complex", "--corrupt-derivative", "--levels", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL"));
}

#[test]
fn verify_complex_is_deterministic_for_a_fixed_seed() {
    let a = derham(&["verify-complex", "--seed", "42"]);
    let b = derham(&["verify-complex", "--seed", "42"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn interface_check_accepts_catalog_names_and_geometry_files() {
    let out = derham(&["interface-check", "cube-surface"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("INTERFACES: PASS"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two-squares.json");
    let geom = geometry_catalog("two-squares").unwrap();
    std::fs::write(&path, serde_json::to_string_pretty(&geom).unwrap()).unwrap();
    let out = derham(&["interface-check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("INTERFACES: PASS"));
}

#[test]
fn interface_check_flags_a_refined_second_patch() {
    let out = derham(&["interface-check", "two-squares", "--patch-elements", "2,3"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("knots MISMATCH"));
    assert!(text.contains("INTERFACES: FAIL"));
}

#[test]
fn interface_check_rejects_unknown_geometries_and_bad_files() {
    let out = derham(&["interface-check", "no-such-geometry"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = derham(&["interface-check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot parse"));
}

#[test]
fn list_geometries_names_every_catalog_entry() {
    let out = derham(&["list-geometries"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in [
        "flat-square",
        "cylinder-shell",
        "quarter-annulus-nurbs",
        "cube-surface",
        "two-squares",
        "unit-cube",
        "distorted-cube",
        "two-cubes",
    ] {
        assert!(text.contains(name), "missing {name} in: {text}");
    }
}

#[test]
fn unknown_subcommands_are_usage_errors() {
    let out = derham(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(Path::new(env!("CARGO_BIN_EXE_derham")).exists());
}
