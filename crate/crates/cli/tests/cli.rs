use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const INSTANCE: &str = r#"{
  "candidates": ["c1", "c2"],
  "issues": ["economy", "health"],
  "rho": [1, 2],
  "budgets": [1, 1],
  "voters": [{"quality": {"c1": ["0.5", "0.2"], "c2": ["0.3", "0.4"]}, "salience0": ["0.6", "0.4"]}]
}"#;

const G_PLUS: &str = r#"{
  "ranks": {"c1": [0, 10, 10], "c2": [0, 0, 9], "c3": [0, 11, 9]},
  "budgets": [1, 0, 0]
}"#;

const G_MAX: &str = r#"{
  "ranks": {"c1": [0, 1, 1], "c2": [0, 1, "9/10"], "c3": [0, "9/10", "11/10"], "c4": [0, 1, 0]},
  "budgets": [1, 1, 0, 0]
}"#;

fn file(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run_with(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_priming"));
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    cmd.env_remove("PRIMING_ORACLE_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = run_with(args, None, &[]);
    let report: Value =
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    let code = out.status.code().unwrap();
    assert_eq!(report["exit_code"], code);
    (code, report)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_and_rejects() {
    let good = file("valid.json", INSTANCE);
    let (code, report) = run(&["validate", path(&good)]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["valid"], true);
    assert_eq!(report["input_digest"].as_str().unwrap().len(), 64);

    let bad = file(
        "bad_salience.json",
        &INSTANCE.replace(r#"["0.6", "0.4"]"#, r#"["0.6", "0.5"]"#),
    );
    let (code, report) = run(&["validate", path(&bad)]);
    assert_eq!(code, 2);
    let listed = report["result"]["violations"][0].as_str().unwrap();
    assert!(listed.contains("salience sum"), "{listed}");

    let missing = file("missing_rho.json", &INSTANCE.replace(r#""rho": [1, 2],"#, ""));
    let (code, report) = run(&["validate", path(&missing)]);
    assert_eq!(code, 2);
    assert!(report["result"]["error"].as_str().unwrap().contains("rho"));
}

#[test]
fn aggregate_matches_hand_values_and_round_trips() {
    let inst = file("agg.json", INSTANCE);
    let (code, report) = run(&["aggregate", path(&inst)]);
    assert_eq!(code, 0);
    let ranks = &report["result"]["ranks"];
    assert_eq!(ranks["c1"], serde_json::json!(["19/100", "69/100", "59/100"]));
    assert_eq!(ranks["c2"], serde_json::json!(["17/100", "47/100", "97/100"]));

    let compact = file("agg_compact.json", &report["result"].to_string());
    let (code, again) = run(&["aggregate", path(&compact)]);
    assert_eq!(code, 0);
    assert_eq!(again["result"], report["result"]);
}

#[test]
fn zero_total_budget_is_rejected() {
    let inst = file(
        "zero_budget.json",
        &INSTANCE.replace(r#""budgets": [1, 1]"#, r#""budgets": [0, 0]"#),
    );
    let (code, _) = run(&["aggregate", path(&inst)]);
    assert_eq!(code, 2);
}

#[test]
fn floats_are_rejected() {
    let inst = file(
        "float.json",
        &INSTANCE.replace(r#""rho": [1, 2]"#, r#""rho": [1.5, 2]"#),
    );
    let (code, report) = run(&["validate", path(&inst)]);
    assert_eq!(code, 2);
    assert!(report["result"]["error"].as_str().unwrap().contains("floating-point"));
}

#[test]
fn counterexamples_all_pass() {
    let (code, report) = run(&["counterexamples"]);
    assert_eq!(code, 0, "{report:#}");
    let cases = report["result"]["cases"].as_array().unwrap();
    let names: Vec<&str> = cases.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["split", "plus", "max", "unnatural"]);
    assert!(cases.iter().all(|c| c["passed"] == true));
    assert_eq!(report["input_digest"], Value::Null);

    let (code, _) = run(&["counterexamples", "nope"]);
    assert_eq!(code, 2);
}

#[test]
fn plus_best_response_reports_supremum() {
    let game = file("g_plus.json", G_PLUS);
    let profile = file("g_plus_idle.json", r#"{"investments": {"c2": [0, 0], "c3": [0, 0]}}"#);
    let (code, report) = run(&[
        "best-response",
        path(&game),
        "--profile",
        path(&profile),
        "--candidate",
        "c1",
        "--utility",
        "plus",
        "--victory-weight",
        "4",
    ]);
    assert_eq!(code, 0, "{report:#}");
    assert_eq!(report["result"]["attained"], false);
    assert_eq!(report["result"]["value"], "216/49");
}

#[test]
fn nash_then_verify() {
    let inst = file("nash.json", INSTANCE);
    let (code, report) = run(&["nash", path(&inst)]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["valid"], true);
    let profile = file("nash_profile.json", &report["result"]["profile"].to_string());
    let (code, verified) = run(&["verify", path(&inst), "--profile", path(&profile)]);
    assert_eq!(code, 0);
    assert_eq!(verified["result"]["valid"], true);

    let losing = file(
        "nash_losing.json",
        r#"{"investments": {"c1": [0, 0, 1], "c2": [0, 0, 1]}}"#,
    );
    let (code, verified) = run(&["verify", path(&inst), "--profile", path(&losing)]);
    assert_eq!(code, 3);
    assert_eq!(verified["result"]["valid"], false);
}

#[test]
fn unsupported_equilibrium_requests_are_contract_violations() {
    let inst = file("contract.json", INSTANCE);
    let (code, _) = run(&["nash", path(&inst), "--utility", "ind"]);
    assert_eq!(code, 3);

    let game = file("g_max.json", G_MAX);
    let (code, report) = run(&[
        "nash",
        path(&game),
        "--algorithm",
        "dynamics",
        "--utility",
        "max",
        "--victory-weight",
        "4",
        "--max-rounds",
        "50",
    ]);
    assert_eq!(code, 3);
    assert_eq!(report["result"]["outcome"], "unknown");
    assert!(report["result"]["cycle_start"].is_u64());
}

#[test]
fn eval_writes_csv() {
    let inst = file("eval.json", INSTANCE);
    let profile = file("eval_profile.json", r#"{"investments": {"c1": [1, 0], "c2": [0, 1]}}"#);
    let out = run_with(
        &["eval", path(&inst), "--profile", path(&profile), "--output", "csv"],
        None,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("candidate,votes,share,victory,utility"));
    assert_eq!(lines.count(), 2);

    let (code, _) = run(&["validate", path(&inst), "--output", "csv"]);
    assert_eq!(code, 2);
}

#[test]
fn stdin_input_and_determinism() {
    let out_a = run_with(&["aggregate", "-"], Some(INSTANCE), &[]);
    let out_b = run_with(&["aggregate", "-"], Some(INSTANCE), &[]);
    assert_eq!(out_a.status.code(), Some(0));
    assert_eq!(out_a.stdout, out_b.stdout);
    let inst = file("stdin_same.json", INSTANCE);
    let from_file = run_with(&["aggregate", path(&inst)], None, &[]);
    assert_eq!(from_file.stdout, out_a.stdout);
}

#[test]
fn oracle_budget_comes_from_the_environment() {
    let game = file("oracle.json", G_MAX);
    let args = [
        "oracle",
        path(&game),
        "--utility",
        "max",
        "--victory-weight",
        "4",
        "--grid",
        "10",
    ];
    let out = run_with(&args, None, &[("PRIMING_ORACLE_BUDGET", "10")]);
    assert_eq!(out.status.code(), Some(3));
    let (code, report) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["equilibria"], serde_json::json!([]));
}
