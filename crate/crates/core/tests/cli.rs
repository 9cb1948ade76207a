use std::path::Path;
use std::process::Command;

use regpart::cli::{run, EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_VERIFY};
use regpart::io::{cx, ModelFile, ProjectionEntry, ReportFile};

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["regpart"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_example(dir: &Path, stage: &str) -> std::path::PathBuf {
    let p = dir.join(format!("cantor{stage}.json"));
    let (code, out, _) = call(&["example", "cantor", "--stage", stage, "--out", path_str(&p)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("cantor stage"));
    p
}

#[test]
fn example_then_compute() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_example(dir.path(), "2");
    let report = dir.path().join("report.json");
    let (code, out, err) = call(&["compute", "--model", path_str(&model), "--out", path_str(&report)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("oracle max rel err"));
    let r = ReportFile::read(&report).unwrap();
    assert!(r.oracle_max_rel_err() < 1e-8);
    assert!(r.diagnostics.inconsistencies().is_empty());
}

#[test]
fn compute_accepts_lambda_list() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_example(dir.path(), "1");
    let report = dir.path().join("r.json");
    let args = ["compute", "--model", path_str(&model), "--out", path_str(&report), "--lambda-list", "5,10,20"];
    assert_eq!(call(&args).0, EXIT_OK);
    let r = ReportFile::read(&report).unwrap();
    let lambdas: Vec<f64> = r.diagnostics.slope_probe[0].report.points.iter().map(|p| p.lambda).collect();
    assert_eq!(lambdas, vec![5.0, 10.0, 20.0]);

    let bad = ["compute", "--model", path_str(&model), "--out", path_str(&report), "--lambda-list", "5,-1"];
    assert_eq!(call(&bad).0, EXIT_VALIDATION);
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let (code, out, _) = call(&["verify", "--seed", "3", "--trials", "4", "--dims", "1,2,3,4"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("ok: 16 identity draws, 12 models"));

    let (code, _, err) = call(&["verify", "--seed", "3", "--trials", "2", "--dims", "2", "--inject-fault"]);
    assert_eq!(code, EXIT_VERIFY);
    assert!(err.contains("reproduce with --seed 3 --trials 1 --dims 2"), "{err}");
}

#[test]
fn verify_rejects_out_of_range_dimension() {
    assert_eq!(call(&["verify", "--dims", "7"]).0, EXIT_VALIDATION);
}

#[test]
fn probe_writes_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_example(dir.path(), "1");
    let out_path = dir.path().join("probe.json");
    let (code, out, _) = call(&["probe", "--model", path_str(&model), "--out", path_str(&out_path)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("growing=false"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
}

#[test]
fn non_projection_q_is_a_validation_error_naming_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_example(dir.path(), "1");
    let mut file = ModelFile::read(&model).unwrap();
    let loaded = file.load().unwrap();
    let mut q = loaded.q.clone();
    q[7][(0, 0)] = regpart::pointwise::c(0.5, 0.0);
    file.q = ProjectionEntry::dense(&q);
    file.write(&model).unwrap();
    let report = dir.path().join("r.json");
    let (code, _, err) = call(&["compute", "--model", path_str(&model), "--out", path_str(&report)]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("cell 7"), "{err}");
}

#[test]
fn sector_violation_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_example(dir.path(), "1");
    let mut file = ModelFile::read(&model).unwrap();
    file.coefficients.c[3][0][0] = cx(regpart::pointwise::c(-1.0, 0.0));
    file.write(&model).unwrap();
    let (code, _, err) = call(&["compute", "--model", path_str(&model), "--out", path_str(&dir.path().join("r"))]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("cell 3"), "{err}");
}

#[test]
fn parse_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(call(&["compute", "--model", path_str(&bad), "--out", path_str(&out)]).0, EXIT_PARSE);
    let missing = dir.path().join("missing.json");
    assert_eq!(call(&["compute", "--model", path_str(&missing), "--out", path_str(&out)]).0, EXIT_PARSE);
    assert_eq!(call(&["compute", "--bogus"]).0, EXIT_PARSE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_PARSE);
}

#[test]
fn example_rejects_bad_stages() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.json");
    assert_eq!(call(&["example", "cantor", "--stage", "13", "--out", path_str(&p)]).0, EXIT_VALIDATION);
    assert_eq!(call(&["example", "cantor", "--stage", "11", "--out", path_str(&p)]).0, EXIT_VALIDATION);
}

#[test]
fn help_exits_cleanly() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("compute"));
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_regpart");
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let st = Command::new(bin).args(["example", "cantor", "--stage", "1", "--out"]).arg(&model).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    let st = Command::new(bin).args(["compute", "--model"]).arg(dir.path().join("nope.json")).args(["--out", "x"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_PARSE));
    assert!(String::from_utf8_lossy(&st.stderr).starts_with("error:"));
}
