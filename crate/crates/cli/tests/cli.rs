use std::path::PathBuf;
use std::process::{Command, Output};

use dziobek_core::{known_solutions, PotentialParam};
use serde_json::{json, Value};

fn dziobek(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dziobek"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str, body: &Value) -> PathBuf {
    let path = std::env::temp_dir().join(format!("dziobek-{}-{name}.json", std::process::id()));
    std::fs::write(&path, body.to_string()).unwrap();
    path
}

fn square_input(offset: f64) -> Value {
    let fx = known_solutions(4, PotentialParam::NEWTON).unwrap();
    let (x, _) = fx.iter().find(|(_, l)| l == "square").unwrap();
    let mut positions = x.positions();
    positions[0][0] += offset;
    json!({ "masses": [1.0, 1.0, 1.0, 1.0], "a": -1.5, "positions": positions })
}

#[test]
fn certify_exit_codes() {
    let ok = scratch("square", &square_input(0.0));
    let out = dziobek(&["certify", "--input", ok.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["certificate"]["verdict"], "ACCEPTED");

    let bad = scratch("perturbed", &square_input(1e-2));
    let out = dziobek(&["certify", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["certificate"]["verdict"], "REJECTED");
    assert_eq!(doc["certificate"]["failures"][0], "cc_residual");

    let mut missing = square_input(0.0);
    missing.as_object_mut().unwrap().remove("masses");
    let missing = scratch("missing", &missing);
    let out = dziobek(&["certify", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    for p in [ok, bad, missing] {
        std::fs::remove_file(p).ok();
    }
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(
        dziobek(&["solve", "--n", "2", "--equal"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dziobek(&["solve", "--masses", "1,-1,1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dziobek(&["solve", "--equal", "--n", "3", "--a", "banana"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dziobek(&["bound", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn bound_text_and_json() {
    let out = dziobek(&["bound", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "2^13 = 8192\n");
    let out = dziobek(&["bound", "--n", "10", "--format", "json"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["decimal"], "18446744073709551616");
    assert_eq!(doc["exponent"], 64);
}

#[test]
fn oracle_equal_masses_puts_a_body_at_the_midpoint() {
    let out = dziobek(&["oracle", "--masses", "1,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let sols = doc["solutions"].as_array().unwrap();
    assert_eq!(sols.len(), 3);
    for s in sols {
        assert!((s["ratio"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn solve_reports_bound_and_classes() {
    let out = dziobek(&[
        "solve", "--equal", "--n", "4", "--starts", "400", "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["schema"], "dziobek/1");
    assert_eq!(doc["bound"]["decimal"], "8192");
    let classes = doc["classes"].as_array().unwrap();
    assert_eq!(doc["class_count"].as_u64(), Some(classes.len() as u64));
    assert!(classes
        .iter()
        .all(|c| c["certificate"]["verdict"] == "ACCEPTED"));
}

#[test]
fn solve_csv_has_one_row_per_class() {
    let out = dziobek(&["solve", "--masses", "1,2,3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("class_key,d_12,d_13,d_23,kappa"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn output_is_independent_of_worker_count() {
    let run = |w: &str| {
        dziobek(&[
            "--workers",
            w,
            "sweep",
            "--n",
            "4",
            "--trials",
            "2",
            "--starts",
            "300",
            "--seed",
            "9",
        ])
        .stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
}
