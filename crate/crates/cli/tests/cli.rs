use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stroobnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stroobnet")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = stroobnet(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn synth(dir: &Path) -> (String, String) {
    let d = dir.display().to_string();
    ok(&["synth", "--seed", "3", "--n-observers", "25", "--out-dir", &d]);
    (dir.join("observers.csv").display().to_string(), dir.join("events.csv").display().to_string())
}

#[test]
fn synth_build_classify() {
    let dir = tempfile::tempdir().unwrap();
    let (obs, ev) = synth(dir.path());
    let out = dir.path().display().to_string();

    let state: Value = serde_json::from_slice(&ok(&["build", "--observers", &obs, "--events", &ev])).unwrap();
    assert_eq!(state["observer_count"], 25);
    assert_eq!(state["event_count"], 300);

    ok(&["classify", "--observers", &obs, "--events", &ev, "--out-dir", &out]);
    let c: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("classification.json")).unwrap()).unwrap();
    let (oe, ue) = (c["observed"].as_array().unwrap().len(), c["unobserved"].as_array().unwrap().len());
    assert_eq!(oe + ue, 300);
    assert_eq!(oe as u64, state["observed"].as_u64().unwrap());

    let csv = String::from_utf8(ok(&["classify", "--observers", &obs, "--events", &ev, "--format", "csv"])).unwrap();
    assert_eq!(csv.lines().count(), 301);
}

#[test]
fn unknown_strategy_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (obs, ev) = synth(dir.path());
    let out = stroobnet(&["plan", "--observers", &obs, "--events", &ev, "--strategy", "unknown"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "UnknownStrategy");
    assert_eq!(err["exit_code"], 3);
}

#[test]
fn missing_input_file_is_an_input_error() {
    let out = stroobnet(&["build", "--observers", "/nonexistent/o.csv", "--events", "/nonexistent/e.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plan_apply_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (obs, ev) = synth(dir.path());
    let out = dir.path().display().to_string();
    let common = ["--observers", obs.as_str(), "--events", ev.as_str(), "--insert-count", "5"];

    let plan_args: Vec<&str> = ["plan", "--strategy", "proximal_recurrence", "--out-dir", &out].into_iter().chain(common).collect();
    let plan: Value = serde_json::from_slice(&ok(&plan_args)).unwrap();
    assert_eq!(plan["new_observers"].as_array().unwrap().len(), 5);

    let plan_path = dir.path().join("plan.json").display().to_string();
    let apply_args: Vec<&str> = ["apply", "--plan", &plan_path].into_iter().chain(common).collect();
    let applied: Value = serde_json::from_slice(&ok(&apply_args)).unwrap();
    let delta = applied["report"]["observed_delta"].as_u64().unwrap();
    assert!(delta > 0);
    assert_eq!(applied["after"]["observer_count"], 30);

    let report_args: Vec<&str> = ["report", "--plan", &plan_path].into_iter().chain(common).collect();
    let report: Value = serde_json::from_slice(&ok(&report_args)).unwrap();
    assert_eq!(report["inserted"]["source"], "inserted");
    let inserted: u64 = report["inserted"]["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(inserted, 5);

    // a plan made for another state is refused
    let other = tempfile::tempdir().unwrap();
    let d = other.path().display().to_string();
    ok(&["synth", "--seed", "4", "--n-observers", "25", "--out-dir", &d]);
    let o2 = other.path().join("observers.csv").display().to_string();
    let res = stroobnet(&["apply", "--plan", &plan_path, "--observers", &o2, "--events", &ev, "--insert-count", "5"]);
    assert_eq!(res.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"], "StateMismatch");
}

#[test]
fn compare_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (obs, ev) = synth(dir.path());
    let args = ["compare", "--observers", &obs, "--events", &ev, "--insert-count", "5", "--seed", "11"];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let rows: Value = serde_json::from_slice(&a).unwrap();
    let rows = rows["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let delta = |name: &str| rows.iter().find(|r| r["strategy"] == name).unwrap()["observed_delta"].as_u64().unwrap();
    assert!(delta("proximal_recurrence") >= delta("mode"));
}

#[test]
fn ingest_reports_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let ev = dir.path().join("events.csv");
    std::fs::write(
        &ev,
        "nopd_item,type,type_text,priority,geolocation\nA1,64,SHOOTING,1,\"(29.95, -90.07)\"\nA2,21,THEFT,5,\"(29.95, -90.07)\"\n",
    )
    .unwrap();
    let r: Value = serde_json::from_slice(&ok(&["ingest", "--events", &ev.display().to_string()])).unwrap();
    assert_eq!(r["events"]["rows_accepted"], 1);
    assert_eq!(r["events"]["rejection_reasons"]["OutOfRange(priority)"], 1);
}
