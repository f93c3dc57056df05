use std::path::Path;
use std::process::{Command, Output};

fn parsched(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parsched")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_solve_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&parsched(d, &["--seed", "3", "--out", "data", "generate", "--patients", "4", "--scenarios", "3"]));
    assert!(d.join("data/pools.csv").exists());
    let inst = "data/instances/inst-003.json";
    let scen = "data/scenarios/inst-003.json";

    let solved = ok(&parsched(
        d,
        &["--out", "run", "solve", "--instance", inst, "--scenarios", scen, "--method", "heuristic:spt:50"],
    ));
    let reported: f64 = solved.trim().rsplit(' ').next().unwrap().parse().unwrap();

    let sched = "run/schedules/inst-003-SPT-50.json";
    let eval = ok(&parsched(d, &["evaluate", "--instance", inst, "--scenarios", scen, "--schedule", sched]));
    let metrics: serde_json::Value = serde_json::from_str(&eval).unwrap();
    let cost = metrics["cost"].as_f64().unwrap();
    assert!((cost - reported).abs() < 1e-3, "{cost} vs {reported}");

    let report = std::fs::read_to_string(d.join("run/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);

    ok(&parsched(d, &["--out", "charts", "gantt", "--instance", inst, "--scenarios", scen, "--schedule", sched]));
    let svg = std::fs::read_to_string(d.join("charts/gantt-0.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), "sead = [1]\n").unwrap();
    assert_eq!(parsched(d, &["--config", "bad.toml", "generate"]).status.code(), Some(2));
    assert_eq!(parsched(d, &["--seed", "1", "--out", "o", "solve", "--method", "bogus"]).status.code(), Some(2));
    assert_eq!(parsched(d, &["--seed", "1", "--out", "o", "solve", "--method", "brute"]).status.code(), Some(4));
}
