use std::path::Path;
use std::process::{Command, Output};

fn analyze(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_analyze"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn simulate_into(path: &Path, n: &str) {
    let out = analyze(&[
        "simulate",
        "--n",
        n,
        "--p-pos",
        "0.3",
        "--p-neg",
        "0.7",
        "--seed",
        "42",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store.jsonl");
    simulate_into(&store, "10");
    assert_eq!(std::fs::read_to_string(&store).unwrap().lines().count(), 20);

    let md = analyze(&["report", "--store", store.to_str().unwrap()]);
    assert!(md.status.success());
    let text = stdout(&md);
    for q in 1..=7 {
        assert!(
            text.contains(&format!("## Question {q} ")),
            "missing section {q}"
        );
    }

    let json = analyze(&[
        "report",
        "--store",
        store.to_str().unwrap(),
        "--format",
        "structured",
    ]);
    assert!(json.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(doc["questions"].as_array().unwrap().len(), 7);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    simulate_into(&a, "5");
    simulate_into(&b, "5");
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn export_writes_both_collections() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store.jsonl");
    simulate_into(&store, "3");
    let out_dir = dir.path().join("export");
    let out = analyze(&[
        "export",
        "--store",
        store.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for name in ["answers_v1.jsonl", "answers_v2.jsonl"] {
        let text = std::fs::read_to_string(out_dir.join(name)).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}

#[test]
fn allais_and_bank() {
    let out = analyze(&["allais"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("$139M"));
    assert!(text.contains("(1A, 2B)  violates expected utility"));

    let out = analyze(&["validate-bank"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("Q1: equal expected values"));
    assert!(text.contains("Q2: not quantified"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let corrupt = dir.path().join("corrupt.jsonl");
    std::fs::write(&corrupt, "{not json}\n").unwrap();
    let out = analyze(&["report", "--store", corrupt.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let bad_policy = analyze(&[
        "simulate",
        "--n",
        "2",
        "--p-pos",
        "1.5",
        "--p-neg",
        "0.5",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(bad_policy.status.code(), Some(2));

    let missing_dir = dir.path().join("no/such/dir/store.jsonl");
    let out = analyze(&[
        "simulate",
        "--n",
        "1",
        "--p-pos",
        "0.5",
        "--p-neg",
        "0.5",
        "--out",
        missing_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // a missing store reads as empty and still renders
    let out = analyze(&[
        "report",
        "--store",
        dir.path().join("absent.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("## Question 7 "));
}
