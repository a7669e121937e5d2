use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scissors(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scissors"));
    cmd.args(args).env_remove("SCISSORS_SEED");
    if let Some(s) = seed {
        cmd.env("SCISSORS_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn write(name: &str, body: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const IDEAL_TETRA: &str = r#"{"vertices":[
  {"model":"upper_half","coords":[0,0,0]},
  {"model":"upper_half","coords":[1,0,0]},
  {"model":"upper_half","coords":[0.5,0.8660254037844386,0]},
  {"model":"upper_half","coords":["inf","inf","inf"]}]}"#;

const SIMPLEX_H4: &str = r#"{"vertices":[
  {"coords":[0,0,0,0]},{"coords":[0.4,0,0,0]},{"coords":[0,0.4,0,0]},
  {"coords":[0,0,0.4,0]},{"coords":[0,0,0,0.4]}]}"#;

fn significant_digits(x: f64) -> usize {
    let s = format!("{:e}", x.abs());
    s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count()
}

#[test]
fn zeta_is_exact_string() {
    let out = scissors(&["zeta", "--d", "5", "--n", "2"], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["value"], "1/30");
    assert_eq!(v["method"], "bernoulli");
}

#[test]
fn zeta_cross_check_agrees() {
    let v = json_of(&scissors(&["zeta", "--d", "13", "--n", "2", "--check-terms", "100000"], None));
    let num = v["functional_equation"].as_f64().unwrap();
    assert_eq!(v["value"], "1/6");
    assert!((num - 1.0 / 6.0).abs() < 1e-9, "{v}");
}

#[test]
fn recognize_finds_one_thirtieth() {
    let out = scissors(&["recognize", "--x", "0.0333333333", "--maxden", "100"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["rational"], "1/30");
}

#[test]
fn recognize_failure_is_numeric() {
    let out = scissors(&["recognize", "--x", "0.1234567891", "--maxden", "10"], None);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["error"], "numeric");
}

#[test]
fn volume_of_regular_ideal_tetrahedron() {
    let p = write("ideal_tetra.json", IDEAL_TETRA);
    let out = scissors(&["volume", "--in", p.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!((v["value"].as_f64().unwrap() - 1.0149416064).abs() < 1e-9);
    assert_eq!(v["method"], "bloch_wigner");
}

#[test]
fn floats_have_at_most_twelve_digits() {
    let p = write("tetra_digits.json", IDEAL_TETRA);
    let v = json_of(&scissors(&["volume", "--in", p.to_str().unwrap()], None));
    assert!(significant_digits(v["value"].as_f64().unwrap()) <= 12);
    let v = json_of(&scissors(&["lvalue", "--minpoly", "x^2-5", "--s", "2", "--pmax", "1000"], None));
    assert!(significant_digits(v["value"].as_f64().unwrap()) <= 12);
}

#[test]
fn seed_comes_from_environment() {
    let p = write("h4.json", SIMPLEX_H4);
    let path = p.to_str().unwrap();
    let args = ["volume", "--in", path, "--samples", "20000"];
    let base = json_of(&scissors(&args, None))["value"].clone();
    let zero = json_of(&scissors(&args, Some("0")))["value"].clone();
    let other = json_of(&scissors(&args, Some("5")))["value"].clone();
    let flag = json_of(&scissors(&["volume", "--in", path, "--samples", "20000", "--seed", "0"], Some("5")))["value"].clone();
    assert_eq!(base, zero);
    assert_ne!(base, other);
    assert_eq!(flag, base);
}

#[test]
fn sequential_matches_parallel() {
    let p = write("h4_seq.json", SIMPLEX_H4);
    let path = p.to_str().unwrap();
    let par = json_of(&scissors(&["volume", "--in", path, "--samples", "20000"], None));
    let seq = json_of(&scissors(&["--sequential", "volume", "--in", path, "--samples", "20000"], None));
    assert_eq!(par, seq);
}

#[test]
fn volume_tolerance_breach_exits_3() {
    let p = write("h4_tol.json", SIMPLEX_H4);
    let out = scissors(&["volume", "--in", p.to_str().unwrap(), "--samples", "1000", "--tol", "1e-15"], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(json_of(&out)["partial"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_subcommand_exits_1_with_usage() {
    let out = scissors(&["frobnicate"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn validation_errors_exit_2() {
    let bad = write("bad.json", "{\"vertices\": 3}");
    assert_eq!(scissors(&["volume", "--in", bad.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(scissors(&["volume", "--in", "/nonexistent/x.json"], None).status.code(), Some(2));
    assert_eq!(scissors(&["zeta", "--d", "4", "--n", "2"], None).status.code(), Some(2));
    assert_eq!(scissors(&["zeta", "--d", "five", "--n", "2"], None).status.code(), Some(2));
    let out = scissors(&["covolume", "--case", "II-split", "--n", "5", "--t", "3", "--r", "2"], None);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"], "validation");
}

#[test]
fn dehn_of_edge_cycle_like_input_reports_terms() {
    let p = write("fin.json", r#"{"vertices":[{"coords":[0,0,0]},{"coords":[0.5,0,0]},{"coords":[0,0.5,0]},{"coords":[0,0,0.5]}]}"#);
    let v = json_of(&scissors(&["dehn", "--in", p.to_str().unwrap()], None));
    assert_eq!(v["terms"].as_array().unwrap().len(), 6);
    assert_eq!(v["zero"], false);
}

#[test]
fn periods_of_tetrahedron() {
    let p = write("fin_periods.json", r#"{"vertices":[{"coords":[0,0,0]},{"coords":[0.5,0,0]},{"coords":[0,0.5,0]},{"coords":[0,0,0.5]}]}"#);
    let v = json_of(&scissors(&["periods", "--in", p.to_str().unwrap()], None));
    assert_eq!(v["matrix"]["size"], 8);
    assert_eq!(v["coproduct"].as_array().unwrap().len(), 6);
    assert_eq!(v["graded_dims"], serde_json::json!([[0, 1], [2, 6], [4, 1]]));
    let vol = json_of(&scissors(&["volume", "--in", p.to_str().unwrap()], None))["value"].as_f64().unwrap();
    assert!((v["volume"].as_f64().unwrap() - vol).abs() < 1e-10);
    let four_pi2 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    assert!((v["real_period"].as_f64().unwrap() * four_pi2 - vol).abs() < 1e-10);
}

#[test]
fn excise_and_check_tiling() {
    let overlap = write(
        "overlap.json",
        r#"{"tiles":[[{"vertices":[{"coords":[0,0]},{"coords":[0.5,0]},{"coords":[0,0.5]}]}],
                     [{"vertices":[{"coords":[0.1,0.1]},{"coords":[0.6,0.1]},{"coords":[0.1,0.6]}]}]]}"#,
    );
    let out = scissors(&["excise", "--in", overlap.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    // T1 minus T0 is a single convex piece.
    assert_eq!(v["cells"].as_array().unwrap().len(), 2);
    assert_eq!(v["overlapping_pairs"], serde_json::json!([[0, 1]]));

    let square = write(
        "square.json",
        r#"{"tiles":[[{"vertices":[{"coords":[0,0]},{"coords":[0.5,0]},{"coords":[0,0.5]}]}],
                     [{"vertices":[{"coords":[0.5,0.5]},{"coords":[0,0.5]},{"coords":[0.5,0]}]}]],
            "gluing":[[0,0,1,0],[1,0,0,0]]}"#,
    );
    let v = json_of(&scissors(&["check-tiling", "--in", square.to_str().unwrap()], None));
    assert_eq!(v["proper"], true);
    assert_eq!(v["interior_facets"], 2);
}

#[test]
fn covolume_matches_bugaenko_class() {
    let v = json_of(&scissors(
        &["covolume", "--case", "II-nonsplit", "--n", "5", "--t", "1", "--r", "2", "--k", "x^2-x-1", "--l", "x^4-x^2-1", "--pmax", "0"],
        None,
    ));
    assert_eq!(v["pi_exp"], -3);
    assert_eq!(v["sqrt_disc"], "80");
}
