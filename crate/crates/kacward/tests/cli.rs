use std::path::PathBuf;

use kacward::cli::{run, EXIT_OK, EXIT_SCHEMA};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str, body: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn call(args: &[&str]) -> (i32, String) {
    run(std::iter::once("kacward").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out) = call(args);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")))
}

#[test]
fn partition_verifies_against_enumeration() {
    let (code, v) = json(&["partition", "--input", &data("triangle.json"), "--verify"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["command"], "partition");
    let z = v["value"].as_f64().unwrap();
    assert!((z - (1.0 + 0.3 * 0.5 * 0.7)).abs() < 1e-12, "{z}");
    assert_eq!(v["verify"]["pass"], true);
}

#[test]
fn output_is_byte_stable() {
    let triangle = data("triangle.json");
    let args = ["spin-corr", "--input", triangle.as_str(), "--face", "0.3,0.3"];
    let first = call(&args);
    for _ in 0..3 {
        assert_eq!(call(&args), first);
    }
}

#[test]
fn oversized_verify_is_skipped() {
    let path = scratch("torus5.json", r#"{"torus": {"width": 5, "height": 5, "weight": 0.3}}"#);
    let (code, v) = json(&["torus-partition", "--input", &path, "--verify"]);
    assert_eq!(code, EXIT_OK);
    assert!(v["verify"]["oracle"].is_null());
    assert!(v["verify"]["skipped"].is_string(), "{v}");
}

#[test]
fn schema_errors_exit_with_two() {
    let broken = scratch("broken.json", "{\"vertices\": [");
    for args in [
        vec!["partition", "--input", broken.as_str()],
        vec!["partition", "--input", "/nonexistent/graph.json"],
        vec!["no-such-command"],
    ] {
        let (code, v) = json(&args);
        assert_eq!(code, EXIT_SCHEMA, "{args:?}");
        assert!(v["error"]["reason"].is_string());
    }
}

#[test]
fn csv_and_pretty_carry_the_same_value() {
    let triangle = data("triangle.json");
    let (_, v) = json(&["partition", "--input", &triangle]);
    let (code, pretty) = json(&["partition", "--input", &triangle, "--format", "pretty"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(pretty, v);
    let (code, csv) = call(&["partition", "--input", &triangle, "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("key,value"));
    let rows: Vec<(&str, &str)> = lines.map(|l| l.split_once(',').unwrap()).collect();
    assert!(rows.contains(&("command", "partition")));
    let value = rows.iter().find(|r| r.0 == "value").unwrap().1;
    assert_eq!(value.parse::<f64>().unwrap(), v["value"].as_f64().unwrap());
}
