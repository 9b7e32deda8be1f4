use std::path::Path;
use std::process::{Command, Output};

fn stratagem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratagem")).args(args).output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_prints_a_record() {
    let out = ok(&stratagem(&["run", "--condition", "fixed-conquest", "--seed", "3", "--max-turns", "30"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["condition"], "fixed-conquest");
    assert_eq!(v["seed"], 3);
}

#[test]
fn unknown_condition_is_an_error() {
    let out = stratagem(&["run", "--condition", "fixed-conquets", "--seed", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fixed-conquets"));
}

#[test]
fn batch_analyze_replay_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
output = "records.jsonl"
seeds = { start = 0, end = 4 }
parallelism = 1

[game]
max_turns = 40

[[conditions]]
name = "builtin"
kind = "builtin"

[[conditions]]
name = "fixed-conquest"
kind = "script"
script = "fixed-conquest"
"#,
    )
    .unwrap();
    let store = dir.path().join("records.jsonl");
    let first = ok(&stratagem(&["batch", "--config", config.to_str().unwrap(), "--limit", "5"]));
    assert!(first.contains("ran 5 new games"), "{first}");
    let second = ok(&stratagem(&["batch", "--config", config.to_str().unwrap()]));
    assert!(second.contains("ran 3 new games, skipped 5"), "{second}");

    let report = dir.path().join("report");
    ok(&stratagem(&["analyze", "--in", store.to_str().unwrap(), "--out", report.to_str().unwrap()]));
    for f in ["report.txt", "summary.csv", "regressions.csv"] {
        assert!(Path::new(&report).join(f).exists(), "{f} missing");
    }

    let out = stratagem(&["replay", "--record", store.to_str().unwrap(), "--seed", "2", "--condition", "fixed-conquest"]);
    let log = ok(&out);
    assert!(log.starts_with("T"), "{log}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("record reproduced"));
}
