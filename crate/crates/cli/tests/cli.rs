use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn lieq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lieq")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn invariants_example() {
    let o = lieq(&["invariants", "heisenberg3", "--subalgebra", "Y,Z", "--lambda", "Z=1", "-N", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["command"], "invariants");
    assert_eq!(v["results"]["basis"], serde_json::json!(["1"]));
    assert_eq!(v["results"]["commutative"], true);
    assert_eq!(v["config"]["target"]["lambda"]["Z"], "1");
    // byte-identical reruns
    let again = lieq(&["invariants", "heisenberg3", "--subalgebra", "Y,Z", "--lambda", "Z=1", "-N", "6"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn graphs_and_weights() {
    let o = lieq(&["graphs", "enum", "-n", "1", "-m", "2"]);
    assert_eq!(json(&o)["results"]["count"], 2);
    let args = ["weights", "mc", "--graph", "K(1,2):v1->(g1,g2)", "--samples", "1000000", "--seed", "42"];
    let a = lieq(&args);
    let b = lieq(&args);
    assert_eq!(a.stdout, b.stdout);
    let r = &json(&a)["results"];
    let (est, se) = (r["estimate"].as_f64().unwrap(), r["stderr"].as_f64().unwrap());
    assert!((est - 0.5).abs() <= 3.0 * se, "{est} +- {se}");
}

#[test]
fn exit_codes() {
    assert_eq!(lieq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lieq(&["invariants", "heisenberg3"]).status.code(), Some(1));
    assert_eq!(lieq(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"name": "bad", "basis": ["X", "Y", "Z"], "brackets": [
            {"left": "X", "right": "Y", "result": {"Y": "1"}},
            {"left": "X", "right": "Z", "result": {"Z": "1"}},
            {"left": "Y", "right": "Z", "result": {"X": "1"}}]}"#,
    )
    .unwrap();
    let o = lieq(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["results"]["valid"], false);
    let o = Command::new(env!("CARGO_BIN_EXE_lieq"))
        .args(["invariants", "heisenberg3", "-N", "5"])
        .env("LIEQ_MAX_DEGREE", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(lieq(&["invariants", "heisenberg3", "--lambda", "Z=x", "-N", "2"]).status.code(), Some(1));
}

#[test]
fn validate_library_and_output_file() {
    let lib = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/library/axb.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = lieq(&["validate", lib, "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), o.stdout);
    assert_eq!(json(&o)["results"]["nilpotent"], false);
    let t = lieq(&["validate", lib, "--text"]);
    assert!(String::from_utf8_lossy(&t.stdout).contains("valid, dim 2"));
    let timed = lieq(&["validate", lib, "--timings"]);
    assert!(json(&timed).get("timings").is_some());
    assert!(json(&o).get("timings").is_none());
}

#[test]
fn other_commands() {
    let o = lieq(&["star", "heisenberg3", "--method", "kontsevich", "--order", "2", "--f", "X^2", "--g", "Y"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["results"]["per_order"][1], "X*Z");
    let o = lieq(&["duflo", "axb", "--truncation", "4"]);
    assert_eq!(json(&o)["results"]["identity"], false);
    let o = lieq(&["reduce", "heisenberg3", "--subalgebra", "Z", "--lambda", "Z=1", "-N", "2"]);
    assert_eq!(json(&o)["results"]["basis"].as_array().unwrap().len(), 6);
    let o = lieq(&["commutativity", "heisenberg3", "--subalgebra", "Z", "--lambda", "Z=1", "-N", "2"]);
    assert_eq!(json(&o)["results"]["commutative"], false);
    let o = lieq(&["centers-compare", "heisenberg3", "--subalgebra", "X,Y,Z", "-N", "2"]);
    assert_eq!(json(&o)["results"]["dims_match"], true);
    let o = lieq(&["theorem5", "roundtrip", "heisenberg3", "--subalgebra", "Z", "--lambda", "Z=1", "-N", "2"]);
    assert_eq!(json(&o)["results"]["all_ok"], true);
    let o = lieq(&["theorem6", "check", "heisenberg3", "-N", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["results"]["verdict"], "consistent");
}
