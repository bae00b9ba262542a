use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use hashmark::canon::CanonVersion;
use hashmark::model::EntryId;
use serde_json::{json, Value};
use tempfile::TempDir;

fn hashmark(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hashmark"))
        .args(args)
        .current_dir(dir)
        .env("HASHMARK_PROFILE", "test")
        .output()
        .expect("spawn hashmark")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = hashmark(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn put(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

fn id(q: &str) -> String {
    EntryId::for_question(q, CanonVersion::C1).unwrap().to_string()
}

const QA: [(&str, &str, &str); 6] = [
    ("alice", "Which enzyme cleaves the marker peptide?", "Protease K7"),
    ("alice", "Which buffer stabilises the sample?", "Tris borate"),
    ("bob", "Name the precursor in step three.", "Ethyl acrylate"),
    ("bob", "Which column was used for the separation?", "C18 reverse phase"),
    ("carol", "What is the catalyst in the final step?", "Palladium on carbon"),
    ("carol", "Which solvent is used for the wash?", "Diethyl ether"),
];

/// Runs both protocol rounds in `dir/run` and returns the filtered questions.
fn run_protocol(dir: &Path) {
    fs::create_dir(dir.join("run")).unwrap();
    let mut round1 = Vec::new();
    for expert in ["alice", "bob", "carol"] {
        let pairs: Vec<Value> = QA
            .iter()
            .filter(|(e, _, _)| *e == expert)
            .map(|(_, q, a)| json!({"question": q, "answer": a}))
            .collect();
        put(dir, &format!("{expert}.pairs.json"), &json!(pairs));
        let out = format!("{expert}.submission.json");
        ok(dir, &["contribute", "--input", &format!("{expert}.pairs.json"), "--expert", expert, "--out", &out]);
        round1.push(out);
    }
    let mut args = vec!["auditor", "collect", "--run", "run", "--round", "1"];
    args.extend(round1.iter().map(String::as_str));
    ok(dir, &args);
    ok(dir, &["auditor", "packets", "--run", "run"]);

    let mut round2 = Vec::new();
    for expert in ["alice", "bob", "carol"] {
        let packet = format!("run/round2.{expert}.json");
        let questions: Vec<String> = serde_json::from_slice(&fs::read(dir.join(&packet)).unwrap()).unwrap();
        assert_eq!(questions.len(), 4);
        let pairs: Vec<Value> = questions
            .iter()
            .map(|q| {
                let a = QA.iter().find(|(_, qq, _)| qq == q).unwrap().2;
                json!({"question": q, "answer": a.to_lowercase()})
            })
            .collect();
        put(dir, &format!("{expert}.r2.json"), &json!(pairs));
        let out = format!("{expert}.r2.submission.json");
        ok(dir, &["contribute", "--input", &format!("{expert}.r2.json"), "--expert", expert, "--packet", &packet, "--out", &out]);
        round2.push(out);
    }
    let mut args = vec!["auditor", "collect", "--run", "run", "--round", "2"];
    args.extend(round2.iter().map(String::as_str));
    ok(dir, &args);
    let filtered = ok(dir, &["auditor", "filter", "--run", "run"]);
    assert!(filtered.starts_with("kept 6 "), "{filtered}");
}

fn perfect_sheet(dir: &Path) -> PathBuf {
    let items: Vec<Value> = QA.iter().map(|(_, q, a)| json!({"question": q, "candidate": a})).collect();
    put(dir, "perfect.sheet.json", &json!({"items": items}))
}

#[test]
fn full_pipeline_with_sealed_stage() {
    let start = Instant::now();
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    run_protocol(dir);
    let plan = json!({
        "stages": [
            {"entries": QA[..3].iter().map(|(_, q, _)| id(q)).collect::<Vec<_>>()},
            {"entries": QA[3..].iter().map(|(_, q, _)| id(q)).collect::<Vec<_>>(),
             "unlock": {"mode": "single", "source_stage": 0, "source_entry": id(QA[0].1)}},
        ],
        "answers": {id(QA[0].1): QA[0].2},
    });
    put(dir, "plan.json", &plan);
    ok(dir, &["auditor", "publish", "--run", "run", "--out", "doc.hashmark.json", "--plan", "plan.json", "--seed", "7"]);
    assert!(ok(dir, &["validate", "doc.hashmark.json"]).starts_with("ok: document: 2 stage(s), 3 cleartext entries"));

    let published = fs::read_to_string(dir.join("doc.hashmark.json")).unwrap();
    for secret in QA.iter().map(|(_, _, a)| *a).chain(["alice", "bob", "carol", "sensitivity", "contributor"]) {
        assert!(!published.contains(secret), "published document leaks {secret:?}");
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = fs::metadata(dir.join("run/ledger.json")).unwrap().permissions().mode();
        assert_eq!(mode & 0o777, 0o600);
    }

    perfect_sheet(dir);
    let text = ok(dir, &["grade", "--doc", "doc.hashmark.json", "--sheet", "perfect.sheet.json", "--out", "perfect.report.json"]);
    assert!(text.starts_with("score: 1.000 (6/6)"), "{text}");
    assert!(text.contains("stages unlocked: 2/2"), "{text}");
    assert!(start.elapsed().as_secs_f64() < 10.0);

    // wrong key answer: stage 1 stays locked and leaves the denominator
    let mut items: Vec<Value> = QA.iter().map(|(_, q, a)| json!({"question": q, "candidate": a})).collect();
    items[0] = json!({"question": QA[0].1, "candidate": "Protease K8"});
    put(dir, "flipped.sheet.json", &json!({"items": items}));
    let text = ok(dir, &["grade", "--doc", "doc.hashmark.json", "--sheet", "flipped.sheet.json"]);
    assert!(text.starts_with("score: 0.667 (2/3)"), "{text}");
    assert!(text.contains("stage 1: locked"), "{text}");

    let skew: Value = serde_json::from_slice(&fs::read(dir.join("run/skew.json")).unwrap()).unwrap();
    assert_eq!(skew["high_stakes"], 6);
}

#[test]
fn decoys_show_in_skew_report() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    run_protocol(dir);
    let pairs: Vec<Value> =
        (0..54).map(|i| json!({"question": format!("decoy question {i}"), "answer": format!("decoy answer {i}")})).collect();
    put(dir, "decoys.json", &json!(pairs));
    ok(dir, &["contribute", "--input", "decoys.json", "--expert", "auditor", "--out", "decoys.submission.json"]);
    let out = ok(dir, &["auditor", "publish", "--run", "run", "--out", "doc.hashmark.json", "--decoys", "decoys.submission.json"]);
    assert!(out.contains("high-stakes fraction 0.10"), "{out}");
    let ledger = ok(dir, &["validate", "run/ledger.json"]);
    assert!(ledger.starts_with("ok: ledger: 60 entries"), "{ledger}");
}

#[test]
fn auditor_steps_out_of_order_exit_3() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::create_dir(dir.join("run")).unwrap();
    for args in [
        &["auditor", "filter", "--run", "run"][..],
        &["auditor", "packets", "--run", "run"],
        &["auditor", "publish", "--run", "run", "--out", "x.json"],
    ] {
        let out = hashmark(dir, args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn grading_edge_cases() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    run_protocol(dir);
    ok(dir, &["auditor", "publish", "--run", "run", "--out", "doc.hashmark.json"]);

    put(dir, "empty.sheet.json", &json!({"items": []}));
    let text = ok(dir, &["grade", "--doc", "doc.hashmark.json", "--sheet", "empty.sheet.json"]);
    assert!(text.starts_with("score: 0.000 (0/6)"), "{text}");

    put(dir, "other.sheet.json", &json!({"items": [{"question": "not in this document", "candidate": "x"}]}));
    let out = hashmark(dir, &["grade", "--doc", "doc.hashmark.json", "--sheet", "other.sheet.json"]);
    assert_eq!(out.status.code(), Some(1));

    perfect_sheet(dir);
    let json_out = ok(dir, &["grade", "--doc", "doc.hashmark.json", "--sheet", "perfect.sheet.json", "--format", "json"]);
    let report: Value = serde_json::from_str(&json_out).unwrap();
    assert_eq!(report["matched_count"], 6);
    assert_eq!(report["score"], 1.0);

    let out = hashmark(dir, &["grade", "--doc", "doc.hashmark.json", "--sheet", "perfect.sheet.json", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn contribute_lints_and_abstains() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    put(
        dir,
        "pairs.json",
        &json!([
            {"question": "Is the compound stable?", "answer": "yes"},
            {"question": "Which isomer?", "answer": "   "},
            {"question": "Which solvent?", "answer": "Acetonitrile"},
        ]),
    );
    let out = hashmark(dir, &["contribute", "--input", "pairs.json", "--expert", "dana", "--out", "dana.submission.json"]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning: \"Is the compound stable?\""), "{stderr}");
    let sub: Value = serde_json::from_slice(&fs::read(dir.join("dana.submission.json")).unwrap()).unwrap();
    assert_eq!(sub["items"][1]["answer_hash"], Value::Null);
    assert!(sub["items"][2]["answer_hash"].is_string());

    put(dir, "blank.json", &json!([{"question": "Which isomer?", "answer": null}]));
    let out = hashmark(dir, &["contribute", "--input", "blank.json", "--expert", "dana", "--out", "b.submission.json"]);
    assert_eq!(out.status.code(), Some(1));

    let out = hashmark(dir, &["contribute", "--input", "missing.json", "--expert", "dana"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn attacks_from_the_command_line() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let words = ["argon", "boron", "carbon", "dubnium", "erbium"];
    let pairs: Vec<Value> =
        words.iter().enumerate().map(|(i, w)| json!({"question": format!("element {i}"), "answer": w})).collect();
    put(dir, "pairs.json", &json!(pairs));
    ok(dir, &["contribute", "--input", "pairs.json", "--expert", "eve", "--out", "eve.submission.json"]);
    put(dir, "frank.json", &json!([{"question": "frank's own", "answer": "zinc"}]));
    ok(dir, &["contribute", "--input", "frank.json", "--expert", "frank", "--out", "frank.submission.json"]);
    ok(dir, &["auditor", "collect", "--run", ".", "--round", "1", "eve.submission.json", "frank.submission.json"]);
    ok(dir, &["auditor", "packets", "--run", "."]);
    // frank confirms eve's answers; eve skips round 2, so frank's question drops
    ok(dir, &["contribute", "--input", "pairs.json", "--expert", "frank", "--packet", "round2.frank.json", "--out", "frank.r2.submission.json"]);
    ok(dir, &["auditor", "collect", "--run", ".", "--round", "2", "frank.r2.submission.json"]);
    assert!(ok(dir, &["auditor", "filter", "--run", "."]).starts_with("kept 5 / dropped 1"));
    ok(dir, &["auditor", "publish", "--run", ".", "--out", "doc.hashmark.json"]);

    let mut dict: Vec<&str> = vec!["xenon", "yttrium"];
    dict.extend(words);
    fs::write(dir.join("dict.txt"), dict.join("\n")).unwrap();

    let out = ok(dir, &["attack", "dict", "--doc", "doc.hashmark.json", "--dict", "dict.txt", "--out", "dict.report.json"]);
    assert!(out.contains("cracked          5/5"), "{out}");
    let report: Value = serde_json::from_slice(&fs::read(dir.join("dict.report.json")).unwrap()).unwrap();
    assert_eq!(report["total_evaluations"], 3 + 4 + 5 + 6 + 7);

    let out = ok(dir, &["attack", "rainbow", "--doc", "doc.hashmark.json", "--dict", "dict.txt"]);
    assert!(out.contains("cracked          0/5"), "{out}");
    let out = ok(dir, &["attack", "rainbow", "--doc", "doc.hashmark.json", "--dict", "dict.txt", "--context-question", "element 2"]);
    assert!(out.contains("cracked          1/5"), "{out}");

    let out = ok(dir, &["attack", "brute", "--doc", "doc.hashmark.json", "--alphabet", "abcdefghijklmnopqrstuvwxyz", "--max-len", "6", "--budget", "100"]);
    assert!(out.contains("cracked          0/5"), "{out}");
    assert!(out.contains("evaluations      500"), "{out}");

    let out = hashmark(dir, &["attack", "brute", "--doc", "doc.hashmark.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn profile_resolution_from_config_file() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    put(dir, "pairs.json", &json!([{"question": "q", "answer": "Acetonitrile"}]));
    fs::write(dir.join("custom.toml"), "profile = \"test\"\niterations = 2\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hashmark"))
        .args(["contribute", "--input", "pairs.json", "--expert", "f", "--out", "f.submission.json", "--config", "custom.toml"])
        .current_dir(dir)
        .env_remove("HASHMARK_PROFILE")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sub: Value = serde_json::from_slice(&fs::read(dir.join("f.submission.json")).unwrap()).unwrap();
    assert_eq!(sub["params"]["iterations"], 2);
    assert_eq!(sub["params"]["memory_kib"], 64);

    fs::write(dir.join("bad.toml"), "profile = \"fast\"\n").unwrap();
    let out = hashmark(dir, &["contribute", "--input", "pairs.json", "--expert", "f", "--config", "bad.toml", "--profile", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_rejects_tampered_documents() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    run_protocol(dir);
    ok(dir, &["auditor", "publish", "--run", "run", "--out", "doc.hashmark.json"]);
    let mut doc: Value = serde_json::from_slice(&fs::read(dir.join("doc.hashmark.json")).unwrap()).unwrap();
    doc["stages"][0]["entries"][0]["question"] = json!("edited question");
    put(dir, "tampered.hashmark.json", &doc);
    let out = hashmark(dir, &["validate", "tampered.hashmark.json"]);
    assert_eq!(out.status.code(), Some(1));

    doc["format_version"] = json!("9.0");
    put(dir, "future.hashmark.json", &doc);
    assert_eq!(hashmark(dir, &["validate", "future.hashmark.json"]).status.code(), Some(1));
}
