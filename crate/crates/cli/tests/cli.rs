use std::io::Write;
use std::path::PathBuf;

use lassogeom_cli::dispatch;
use lassogeom_cli::envelope::ProblemEnvelope;
use lassogeom_cli::error::{EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn call(args: &[&str]) -> lassogeom_cli::Outcome {
    dispatch(std::iter::once("lassogeom").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let out = call(args);
    assert_eq!(out.code, EXIT_OK, "{args:?}: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("stdout is JSON")
}

fn temp_file(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn non_uniqueness_example_reports_a_witness() {
    let v = json(&["check-unique", "--input", &fixture("ex_n1p2_lam12.json")]);
    assert_eq!(v["unique"], Value::Bool(false));
    let w = &v["witness"];
    assert_eq!(w["y"].as_array().unwrap().len(), 1);
    assert_ne!(w["b"], w["b_tilde"]);
    assert_eq!(w["dependent_column"], 1);
}

#[test]
fn structural_set_is_one_based() {
    let v = json(&["structural-set", "--input", &fixture("ex_2x3.json")]);
    assert_eq!(v["structural_set"], serde_json::json!([1, 2, 3]));
    let v = json(&["structural-set", "--input", &fixture("ex_n1p2.json")]);
    assert_eq!(v["structural_set"], serde_json::json!([2]));
}

#[test]
fn flags_override_the_envelope() {
    let input = fixture("ex_n1p2.json");
    let v = json(&["solve", "--input", &input, "--y", "-5", "--lambda", "1"]);
    let b: Vec<f64> = serde_json::from_value(v["b"].clone()).unwrap();
    assert_eq!(b[0], 0.0);
    assert!((b[1] + 2.25).abs() < 1e-12, "{b:?}");
    let v = json(&["check-unique", "--input", &input, "--lambda", "1,2"]);
    assert_eq!(v["unique"], Value::Bool(false));
}

#[test]
fn csv_design_with_flags() {
    let f = temp_file("1,2\n", ".csv");
    let path = f.path().to_str().unwrap();
    let v = json(&["prob-zero", "--input", path, "--lambda", "2", "--beta", "1,0", "--sigma", "1"]);
    let est = v["estimate"].as_f64().unwrap();
    assert!((est - 0.477249868051821).abs() < 1e-6, "{est}");
    let out = call(&["prob-zero", "--input", path, "--lambda", "2"]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("beta"));
}

#[test]
fn outputs_round_trip_through_json() {
    let input = fixture("ex_n1p2.json");
    let v = json(&["solve", "--input", &input]);
    for key in ["b", "fit", "objective", "kkt_residual", "unique_at_y"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let text = serde_json::to_string(&v).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), v);

    let v = json(&["prob-zero", "--input", &input, "--method", "mc", "--samples", "2000", "--seed", "1"]);
    assert_eq!(v["method"], "monte-carlo");
    assert_eq!(v["n_samples"], 2000);
    let v = json(&["simulate", "--input", &input, "--reps", "2000", "--seed", "1"]);
    assert_eq!(v["summary"]["n_rep"], 2000);
    assert!(v["comparisons"].as_array().unwrap().iter().all(|c| c["pass"].is_boolean()));
}

#[test]
fn envelope_round_trip() {
    let text = std::fs::read_to_string(fixture("ex_2x4.json")).unwrap();
    let envelope = ProblemEnvelope::from_json(&text).unwrap();
    let again = ProblemEnvelope::from_json(&serde_json::to_string(&envelope).unwrap()).unwrap();
    assert_eq!(envelope, again);
}

#[test]
fn floats_keep_seventeen_digits() {
    let out = call(&["solve", "--input", &fixture("ex_2x4.json")]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    let objective = v["objective"].as_f64().unwrap();
    assert!(out.stdout.contains(&format!("{objective:.16e}")));
}

#[test]
fn density_grid_header_and_shape() {
    let out = call(&[
        "density-grid",
        "--input",
        &fixture("density.csv"),
        "--lambda",
        "0.75",
        "--beta",
        "0,-0.25",
        "--sigma",
        "1",
        "--grid=-1:1:4",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "z1,z2,value");
    assert_eq!(lines.len(), 1 + 16);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
}

#[test]
fn malformed_json_is_an_input_error() {
    let f = temp_file("{\"X\": [[1, 2]], \"lambda\": ", ".json");
    let out = call(&["solve", "--input", f.path().to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("malformed problem JSON"), "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn input_errors_exit_with_two() {
    let input = fixture("ex_n1p2.json");
    for args in [
        vec!["solve", "--input", "no-such-file.json"],
        vec!["solve", "--input", &input, "--lambda", "1,2,3"],
        vec!["solve", "--input", &input, "--y", "1,x"],
        vec!["selectable", "--input", &input, "--model", "0"],
        vec!["selectable", "--input", &input, "--model", "3"],
        vec!["prob-zero", "--input", &input, "--method", "simplex"],
        vec!["density-grid", "--input", &input, "--grid", "1:0:3"],
        vec!["shrinkage-map", "--input", &input],
    ] {
        let out = call(&args);
        assert_eq!(out.code, EXIT_INPUT, "{args:?}: {}", out.stderr);
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn numerical_limits_exit_with_three() {
    let rank_deficient = call(&["orthant-prob", "--input", &fixture("ex_2x3.json"), "--z", "0.5,-0.2,0.1"]);
    assert_eq!(rank_deficient.code, EXIT_NUMERICAL);
    assert!(rank_deficient.stderr.contains("monte-carlo"));

    let row: Vec<String> = (0..15).map(|j| format!("{}", j % 4)).collect();
    let f = temp_file(&format!("{}\n", row.join(",")), ".csv");
    let out = call(&["check-unique", "--input", f.path().to_str().unwrap(), "--lambda", "1"]);
    assert_eq!(out.code, EXIT_NUMERICAL, "{}", out.stderr);
    assert!(out.stderr.contains("general_position"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = call(&["frobnicate"]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("Usage"), "{}", out.stderr);
    assert_eq!(call(&[]).code, EXIT_USAGE);
    let help = call(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("density-grid"));
}

#[test]
fn binary_exit_status_matches_dispatch() {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_lassogeom"))
        .arg("frobnicate")
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(EXIT_USAGE));
}
