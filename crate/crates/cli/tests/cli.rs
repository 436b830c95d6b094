use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn disclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disclab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

fn body(o: &Output) -> String {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn gen_hammersley_four_points() {
    let o = disclab(&["gen", "--builtin", "hammersley", "--d", "2", "--n", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(body(&o), "2 4 2\n0/2^0 0/2^0\n1/2^1 1/2^2\n1/2^2 1/2^1\n3/2^2 3/2^2\n");
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("N=4") && err.contains("precision_bits=2") && err.contains("minimal_t=0"));
}

#[test]
fn gen_zero_is_origin_twice() {
    let o = disclab(&["gen", "--builtin", "zero", "--d", "2", "--n", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(body(&o), "2 2 1\n0/2^0 0/2^0\n0/2^0 0/2^0\n");
}

#[test]
fn gen_unknown_builtin_lists_names() {
    let o = disclab(&["gen", "--builtin", "halton", "--d", "2", "--n", "2"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("hammersley") && err.contains("sobol") && err.contains("zero"));
}

#[test]
fn malformed_matrix_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    fs::write(&path, "2 2 1\n10\n01\n1x\n").unwrap();
    let o = disclab(&["gen", "--matrices", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 4"));
}

#[test]
fn gen_output_roundtrips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.txt");
    let o = disclab(&["gen", "--builtin", "sobol", "--d", "3", "--n", "3", "--sigma", "2", "--out", pts.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = disclab(&["verify", "--points", pts.to_str().unwrap(), "--sigma", "2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["points"], 8);
    assert_eq!(v["result"]["empty_boxes"]["pass"], true);
}

#[test]
fn verify_hammersley_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("h.txt");
    fs::write(&spec, "2 2 1\n10\n01\n01\n10\n").unwrap();
    let o = disclab(&["verify", "--matrices", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["minimal_t"], 0);
    assert_eq!(v["result"]["pass"], true);
    assert_eq!(v["result"]["box_bound"], 1);
}

#[test]
fn verify_zero_spec_only_at_full_t() {
    let o = disclab(&["verify", "--builtin", "zero", "--d", "2", "--n", "3", "--t", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["result"]["minimal_t"], 3);
    let o = disclab(&["verify", "--builtin", "zero", "--d", "2", "--n", "3", "--t", "2"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["result"]["declared_t_pass"], false);
}

#[test]
fn verify_truncated_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("t.txt");
    fs::write(&spec, "2 2 1\n10\n01\n01\n").unwrap();
    let o = disclab(&["verify", "--matrices", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("parse error"));
}

#[test]
fn verify_over_budget_is_partial() {
    let o = disclab(&["verify", "--builtin", "sobol", "--d", "3", "--n", "6", "--sigma", "2", "--budget", "10"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["result"]["partial"], true);
}

#[test]
fn norms_parseval_matches_warnock() {
    let o = disclab(&["norms", "--builtin", "hammersley", "--d", "2", "--n", "4", "--norms", "l2-warnock,l2-parseval"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["result"]["parseval_warnock_delta"].as_f64().unwrap() < 1e-9);
    let reports = v["result"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["report"]["method"], "warnock");
}

#[test]
fn norms_star_of_origin() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("o.txt");
    fs::write(&pts, "1 1 3\n0/2^0\n").unwrap();
    let o = disclab(&["norms", "--points", pts.to_str().unwrap(), "--norms", "star", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let b = body(&o);
    let row = b.lines().find(|l| l.starts_with("star,")).unwrap();
    assert_eq!(row.split(',').nth(3), Some("1"));
}

#[test]
fn norms_empty_set_is_usage_error() {
    let o = disclab(&["norms", "--builtin", "hammersley", "--d", "2", "--n", "4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn norms_resource_error_keeps_others() {
    let o = disclab(&["norms", "--builtin", "hammersley", "--d", "2", "--n", "4", "--norms", "star,bmo-lower-bound", "--budget", "100"]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    let r = v["result"]["reports"].as_array().unwrap();
    assert!(r[0]["error"].as_str().unwrap().contains("resource"));
    assert!(r[1]["report"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn stochastic_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = disclab(&[
            "norms", "--builtin", "sobol", "--d", "2", "--n", "5", "--norms", "lp-estimate,orlicz-direct",
            "--p-grid", "2,3", "--samples", "4096", "--seed", "11", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        fs::read(out).unwrap()
    };
    let a = run("a.json");
    assert_eq!(a, run("b.json"));
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["meta"]["seed"], 11);
    assert_eq!(v["meta"]["tool"], "disclab");
    assert_eq!(v["meta"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn config_hash_tracks_input_contents() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.txt");
    let hash = |text: &str| {
        fs::write(&pts, text).unwrap();
        let o = disclab(&["norms", "--points", pts.to_str().unwrap(), "--norms", "l2-warnock"]);
        json(&o)["meta"]["config_hash"].as_str().unwrap().to_string()
    };
    assert_ne!(hash("1 1 2\n1/2^1\n"), hash("1 1 2\n1/2^2\n"));
}

fn study(args: &[&str], stem: &Path) -> (i32, Value, String) {
    let mut all = vec!["study", "--out", stem.to_str().unwrap()];
    all.extend_from_slice(args);
    let o = disclab(&all);
    let summary: Value = serde_json::from_slice(&fs::read(stem.with_extension("json")).unwrap()).unwrap();
    let csv = fs::read_to_string(stem.with_extension("csv")).unwrap();
    (code(&o), summary, csv)
}

#[test]
fn study_l2_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let (c, v, csv) = study(&["--d", "2", "--n-range", "4..10", "--norm", "l2"], &dir.path().join("l2"));
    assert_eq!(c, 0);
    let e = v["result"]["study"]["exponent"].as_f64().unwrap();
    assert!((0.25..=0.75).contains(&e), "{e}");
    assert!(csv.lines().any(|l| l == "n,N,value,method"));
    assert_eq!(csv.lines().filter(|l| l.ends_with(",warnock")).count(), 7);
}

#[test]
fn study_star_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let (c, v, _) = study(&["--d", "2", "--sigma", "2", "--n-range", "4..10", "--norm", "star"], &dir.path().join("s"));
    let e = v["result"]["study"]["exponent"].as_f64().unwrap();
    assert!((0.7..=1.3).contains(&e), "{e}");
    assert_eq!(c, 0);
}

#[test]
fn study_window_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (c, v, _) = study(&["--d", "2", "--n-range", "4..8", "--norm", "l2", "--window", "2,3"], &dir.path().join("w"));
    assert_eq!(c, 1);
    assert_eq!(v["result"]["pass"], false);
}

#[test]
fn study_single_n_is_usage_error() {
    let o = disclab(&["study", "--d", "2", "--n-range", "4", "--norm", "l2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn coeffs_csv_and_summary() {
    let o = disclab(&["coeffs", "--builtin", "hammersley", "--d", "2", "--n", "2", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let b = body(&o);
    assert!(b.starts_with("j_1,j_2,m_1,m_2,counting_num,counting_exp,linear_num,linear_exp\n"));
    let o = disclab(&["coeffs", "--builtin", "hammersley", "--d", "3", "--n", "3", "--sigma", "2"]);
    assert_eq!(json(&o)["result"]["parseval_equals_warnock"], true);
}

#[test]
fn thread_variable() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_disclab"))
            .args(["norms", "--builtin", "hammersley", "--d", "3", "--n", "4", "--norms", "star,lp-exact", "--p-grid", "4"])
            .env("DISCLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, run("2").stdout);
    assert_eq!(code(&run("zero")), 2);
}
