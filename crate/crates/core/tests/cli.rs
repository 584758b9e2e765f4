use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_energy-bounds")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = run(args);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    });
    (doc, out.status.code().unwrap())
}

fn constant(doc: &Value, row: &str) -> f64 {
    doc["results"][row]["constant"].as_f64().unwrap()
}

fn value(doc: &Value, row: &str) -> f64 {
    doc["results"][row]["value"].as_f64().unwrap()
}

#[test]
fn bounds_schema_and_values() {
    let (doc, code) = json(&["bounds"]);
    assert_eq!(code, 0);
    for field in ["command", "inputs", "results", "checks", "version"] {
        assert!(doc.get(field).is_some(), "missing {field}");
    }
    assert_eq!(doc["command"], "bounds");
    assert!((constant(&doc, "prior_lower") - 0.4507).abs() < 5e-4);
    assert!((constant(&doc, "our_lower") - 0.9057).abs() < 5e-4);
    assert!((constant(&doc, "prior_upper") - 3.1846).abs() < 5e-4);
    assert!((constant(&doc, "our_upper") - 2.3203).abs() < 1e-2);
    assert!(constant(&doc, "our_lower") >= 0.9050);
    assert!(constant(&doc, "our_upper") <= 2.3210);
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn bounds_scale_with_alpha() {
    let (one, _) = json(&["bounds"]);
    let (hundred, _) = json(&["bounds", "--alpha", "100"]);
    let (two, _) = json(&["--alpha", "2", "bounds"]);
    for row in ["prior_lower", "our_lower", "prior_upper", "our_upper"] {
        assert!((value(&hundred, row) - 10.0 * value(&one, row)).abs() < 1e-7 * value(&hundred, row));
        assert!((value(&two, row) - 2f64.sqrt() * value(&one, row)).abs() < 1e-8 * value(&two, row));
    }
    assert!((value(&hundred, "prior_lower") - 4.5070).abs() < 5e-3);
    assert!((value(&hundred, "our_lower") - 9.0570).abs() < 5e-3);
    assert!((value(&hundred, "prior_upper") - 31.8460).abs() < 5e-3);
}

#[test]
fn table2_cells() {
    let out = run(&["table2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "row,1,10,100,1000,10000");
    assert_eq!(lines.len(), 7);
    let cell = |row: usize, col: usize| lines[row].split(',').nth(col).unwrap().parse::<f64>().unwrap();
    assert!((cell(2, 4) - 28.6407).abs() < 5e-5);
    assert!((cell(6, 2) - 2.7332).abs() < 5e-5);
    for col in 1..=5 {
        assert!((cell(5, col) - (cell(2, col) - cell(1, col)).abs()).abs() < 1e-3);
        assert!((cell(6, col) - (cell(3, col) - cell(4, col)).abs()).abs() < 1e-3);
    }
}

#[test]
fn staircase_csv() {
    let out = run(&["staircase", "--format", "csv", "--c", "1", "--d", "0.5", "--layers", "4", "--step", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("Q,profile,scheme,slack"));
    assert_eq!(lines.next(), Some("0,1,1,0"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows.iter().all(|r| r[3] >= -1e-12));
    for jump in [1.0, 2.0, 3.0] {
        let row = rows.iter().find(|r| r[0] == jump).expect("jump row present");
        assert!(row[3].abs() <= 1e-9);
    }
}

#[test]
fn staircase_beyond_ladder_is_rejected() {
    let out = run(&["staircase", "--layers", "3", "--qmax", "3.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_suites() {
    let (doc, code) = json(&["validate", "identities", "--seed", "42"]);
    assert_eq!(code, 0);
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    let (doc, code) = json(&["validate", "rates"]);
    assert_eq!(code, 0);
    assert!(doc["checks"][0]["observed"].as_f64().unwrap() <= 1e-10);
    let (doc, code) = json(&["validate", "mmse", "--samples", "100000"]);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["inputs"]["samples"], 100000);
}

#[test]
fn failing_check_sets_exit_status() {
    // a poor ladder misses the upper-bound target, but the command still reports
    let (doc, code) = json(&["bounds", "--c", "1", "--d", "0.5"]);
    assert_eq!(code, 1);
    let upper = doc["checks"].as_array().unwrap().iter().find(|c| c["name"] == "our_upper_at_most_target").unwrap();
    assert_eq!(upper["passed"], false);
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["validate", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--alpha", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["lower", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    for args in [&["validate", "mmse", "--samples", "5000"][..], &["table2"], &["lower", "--K", "3"]] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn writes_to_file() {
    let path = std::env::temp_dir().join(format!("energy-bounds-{}.json", std::process::id()));
    let out = run(&["lemma2", "--d", "0.999", "--layers", "1000", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(doc["command"], "lemma2");
    assert_eq!(doc["results"]["rows"][0]["failures"], 0);
}

#[test]
fn lower_levels() {
    let (one, code) = json(&["lower", "--K", "1"]);
    assert_eq!(code, 0);
    assert!((constant_of(&one) - 0.8047).abs() < 1e-3);
    let (two, _) = json(&["lower"]);
    assert!(constant_of(&two) >= 0.9050);
    let (three, code) = json(&["lower", "--K", "3"]);
    assert_eq!(code, 0);
    assert!(constant_of(&three) >= constant_of(&two));
}

fn constant_of(doc: &Value) -> f64 {
    doc["results"]["constant"].as_f64().unwrap()
}
