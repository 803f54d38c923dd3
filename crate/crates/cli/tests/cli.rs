use std::fs;
use std::process::{Command, Output};

fn pmgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmgame")).args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn play_writes_a_transcript_that_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("good.jsonl");
    let p = path.to_str().unwrap();
    let o = pmgame(&["play", "--n", "1024", "--p", "0.99", "--seed", "7", "--adversary", "blocker", "--out", p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("winner Red"));

    let o = pmgame(&["verify", p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    // Flip one bit of the first Blue move's edge.
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut mv: serde_json::Value = serde_json::from_str(&lines[2]).unwrap();
    let v = mv["edge"][1].as_u64().unwrap();
    mv["edge"][1] = (v ^ 1).into();
    lines[2] = serde_json::to_string(&mv).unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, lines.join("\n")).unwrap();
    assert_eq!(code(&pmgame(&["verify", bad.to_str().unwrap()])), 1);
}

#[test]
fn infeasible_partition_exits_one() {
    let o = pmgame(&["partition", "--n", "64", "--p", "0.2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PartitionFailure"));
}

#[test]
fn partition_of_a_sampled_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    assert_eq!(code(&pmgame(&["sample", "--n", "256", "--p", "0.99", "--seed", "3", "--out", g.to_str().unwrap()])), 0);
    let o = pmgame(&["partition", "--graph", g.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let body: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(body["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    let parts = body["partition"]["parts"].as_array().unwrap();
    assert_eq!(parts.iter().map(|p| p.as_array().unwrap().len()).sum::<usize>(), 256);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&pmgame(&[])), 2);
    assert_eq!(code(&pmgame(&["bogus"])), 2);
    assert_eq!(code(&pmgame(&["play", "--n", "63", "--p", "0.99"])), 2);
    assert_eq!(code(&pmgame(&["play", "--n", "64"])), 2);
    assert_eq!(code(&pmgame(&["play", "--n", "64", "--p", "0.9", "--adversary", "nobody"])), 2);
    assert_eq!(code(&pmgame(&["verify", "/nonexistent/t.jsonl"])), 2);
    assert_eq!(code(&pmgame(&["solve", "--m", "8"])), 2);
    assert_eq!(code(&pmgame(&["--help"])), 0);
}

#[test]
fn solve_k4() {
    let o = pmgame(&["solve", "--m", "4"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 disagreements"));
}

#[test]
fn batch_empty_and_small() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "{}").unwrap();
    assert_eq!(code(&pmgame(&["batch", empty.to_str().unwrap()])), 0);

    let cfg = dir.path().join("small.json");
    fs::write(
        &cfg,
        r#"{"n":[256],"p":[0.99],"seeds":[1,2],"adversaries":[{"kind":"random"},{"kind":"blocker"}],"verify":true}"#,
    )
    .unwrap();
    let out = dir.path().join("report.json");
    let o = pmgame(&["batch", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["summary"]["games"], 4);
    assert_eq!(rep["summary"]["red_wins"], rep["summary"]["partition_ok"]);

    let sparse = dir.path().join("sparse.json");
    fs::write(&sparse, r#"{"n":[64],"p":[0.2],"seeds":[1],"adversaries":[{"kind":"random"}]}"#).unwrap();
    let o = pmgame(&["batch", sparse.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("partition_ok 0"));

    let broken = dir.path().join("broken.json");
    fs::write(&broken, r#"{"n":[64],"colour":1}"#).unwrap();
    assert_eq!(code(&pmgame(&["batch", broken.to_str().unwrap()])), 2);
}
