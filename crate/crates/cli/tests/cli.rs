use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weilrep")).args(args).output().expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

#[test]
fn invariants_of_d61() {
    let out = run(&["invariants", "--N", "6", "--Nprime", "1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"dimension":4}"#);
    let with_basis = json_lines(&run(&["invariants", "--N", "2", "--Nprime", "2", "--basis"]));
    assert_eq!(with_basis[0]["basis"].as_array().unwrap().len(), 5);
}

#[test]
fn eta_identity_for_three() {
    let out = run(&["verify-eta", "--p", "3", "--prec", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json_lines(&out)[0];
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["constant"], "1·ζ_24^1");
}

#[test]
fn one_relation_for_d22() {
    let v = &json_lines(&run(&["lnn", "relations", "--N", "2", "--p", "2"]))[0];
    assert_eq!(v["relations"].as_array().unwrap().len(), 1);
    let list = json_lines(&run(&["lnn", "selfdual", "--N", "2", "--p", "2"]));
    assert_eq!(list.len(), 6);
}

#[test]
fn subgroups_stream_one_object_per_line() {
    let all = json_lines(&run(&["subgroups", "--N", "2", "--Nprime", "1", "--kind", "all"]));
    assert_eq!(all.len(), 5);
    let sd = json_lines(&run(&["subgroups", "--N", "6"]));
    assert_eq!(sd.len(), 4);
}

#[test]
fn lift_output_shape() {
    let out = run(&["lift", "--N", "6", "--divisors", r#"{"2":1}"#, "--prec", "5"]);
    assert!(out.status.success());
    let v = &json_lines(&out)[0];
    assert_eq!(v["weyl"], serde_json::json!(["1/12", "1/12"]));
    assert_eq!(v["eta1"], "η(2τ)");
    assert_eq!(v["constant"], "undetermined");
    let coeffs = r#"{"0,0,0,0":1,"1,0,0,0":1,"0,1,0,0":1,"1,1,0,0":0}"#;
    let bad = run(&["lift", "--N", "2", "--coeffs", coeffs]);
    assert_eq!(bad.status.code(), Some(1));
    let good = r#"{"0,0,0,0":1,"1,0,0,0":1}"#;
    let v = &json_lines(&run(&["lift", "--N", "2", "--coeffs", good, "--prec", "3"]))[0];
    // {(0,0), (1,0)} is H_{1,0,2}
    assert_eq!(v["eta1"], "η(τ)");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["verify-eta", "--p", "4"]).status.code(), Some(1));
    assert_eq!(run(&["invariants", "--N", "6", "--Nprime", "4"]).status.code(), Some(1));
    let limited = Command::new(env!("CARGO_BIN_EXE_weilrep"))
        .args(["subgroups", "--N", "2", "--Nprime", "2"])
        .env("WEILREP_MAX_D", "10")
        .output()
        .unwrap();
    assert_eq!(limited.status.code(), Some(3));
    assert_eq!(run(&["--max-d", "10", "invariants", "--N", "4"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn deterministic_output() {
    let args = ["lift", "--N", "4", "--divisors", r#"{"1":2,"4":-1}"#, "--prec", "10"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["eta", "expand", "1:1/3:2", "2:0:-1", "--prec", "8"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn repro_single_criterion_table() {
    let out = run(&["--format", "text", "repro", "--criterion", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("[PASS] criterion 9"), "{text}");
}
