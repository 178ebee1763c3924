mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{fixture, read};

fn sepforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read(path)).expect("json")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&sepforge(&["frobnicate"])), 1);
    assert_eq!(code(&sepforge(&["mine"])), 1);
    assert_eq!(code(&sepforge(&["--help"])), 0);
    assert_eq!(code(&sepforge(&["--version"])), 0);
}

#[test]
fn corpus_and_format_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    assert_eq!(code(&sepforge(&["mine", "--corpus", p(&missing)])), 2);

    let no_manifest = dir.path().join("bare");
    fs::create_dir_all(no_manifest.join("x")).unwrap();
    assert_eq!(code(&sepforge(&["mine", "--corpus", p(&no_manifest)])), 2);

    let bad = dir.path().join("patterns.json");
    fs::write(&bad, r#"{"format_version": 99}"#).unwrap();
    let client = fixture("motivating/client");
    assert_eq!(code(&sepforge(&["detect", "--patterns", p(&bad), "--client", p(&client)])), 2);
}

#[test]
fn mine_detect_repair_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let patterns = dir.path().join("patterns.json");
    let corpus = fixture("motivating/corpus");
    let o = sepforge(&["mine", "--corpus", p(&corpus), "--min-support", "2", "--out", p(&patterns)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pf = json(&patterns);
    assert_eq!(pf["format_version"], 1);
    assert_eq!(pf["seps"].as_array().unwrap().len(), 1);

    let client_dir = dir.path().join("client");
    fs::create_dir(&client_dir).unwrap();
    let client = client_dir.join("showLicense.minij");
    let original = read(&fixture("motivating/client/showLicense.minij"));
    fs::write(&client, &original).unwrap();

    let found = dir.path().join("matches.json");
    let o = sepforge(&["detect", "--patterns", p(&patterns), "--client", p(&client_dir), "--out", p(&found)]);
    assert_eq!(code(&o), 0);
    let m = json(&found);
    assert_eq!(m["format_version"], 1);
    let matches = m["matches"].as_array().unwrap();
    assert_eq!(matches.len(), 1);
    assert!(matches[0]["anchors"][0]["line"].as_u64().unwrap() >= 1);

    let report = dir.path().join("repair.json");
    let o = sepforge(&["repair", "--patterns", p(&patterns), "--client", p(&client_dir), "--dry-run", "--out", p(&report)]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("+    License license = app.readLicense();"));
    assert_eq!(read(&client), original, "dry run must not write");
    assert_eq!(json(&report)["results"][0]["status"], "applied");

    let o = sepforge(&["repair", "--patterns", p(&patterns), "--client", p(&client_dir), "--out", p(&report)]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&client), read(&fixture("motivating/expected/showLicense.minij")));

    // the repaired method no longer offers an applicable match
    let o = sepforge(&["detect", "--patterns", p(&patterns), "--client", p(&client_dir), "--out", p(&found)]);
    assert_eq!(code(&o), 0);
    assert!(json(&found)["matches"].as_array().unwrap().is_empty());
}

#[test]
fn eval_writes_versioned_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let corpus = fixture("regression/corpus");
    let o = sepforge(&["eval", "--corpus", p(&corpus), "--seed", "3", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("size"));
    assert_eq!(read(&out), read(&fixture("regression/golden_report.json")));
}

#[test]
fn diff_ast_prints_pairs() {
    let ex = fixture("motivating/corpus");
    let first = fs::read_dir(&ex)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .min()
        .unwrap();
    let o = sepforge(&["diff-ast", p(&first.join("old.minij")), p(&first.join("new.minij"))]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("MethodDecl"));
}
