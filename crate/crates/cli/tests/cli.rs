use std::path::Path;
use std::process::{Command, Output};

fn bracelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bracelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let path_s = path.to_str().unwrap().to_string();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path_s]);
    let o = bracelab(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path_s
}

#[test]
fn validate_ring_brace() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "r.json", &["ring", "--p", "5", "--exponents", "4"]);
    let text = std::fs::read_to_string(&f).unwrap();
    assert_eq!(text, r#"{"format":"brace-v1","p":5,"exponents":[4],"op":{"kind":"ring","s":1}}"#);
    let o = bracelab(&["validate", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("brace-axioms/distributivity: Pass"));
}

#[test]
fn invalid_star_table_is_a_check_failure() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(
        &f,
        r#"{"format":"brace-v1","p":3,"exponents":[1],"op":{"kind":"star_table","table":[[0,0,0],[0,1,0],[0,0,0]]}}"#,
    )
    .unwrap();
    let o = bracelab(&["validate", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("Fail"));
}

#[test]
fn heisenberg_fails_descent_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "h.json", &["heisenberg", "--p", "5"]);
    let o = bracelab(&["props", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("property_1': Fail (Exhaustive, 75) witness [[0, 1], [0, 1]]"));
    let o = bracelab(&["props", &f, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["name"], "properties");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bracelab(&["validate", "/nonexistent/brace.json"]).status.code(), Some(2));
    assert_eq!(bracelab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bracelab(&["gen", "ring", "--p", "5", "--exponents", "4", "--s", "0"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "t.json", &["trivial", "--p", "5", "--exponents", "2"]);
    assert_eq!(bracelab(&["suite", &f, "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(bracelab(&["prelie", &f, "--section", "sideways"]).status.code(), Some(2));
}

#[test]
fn prelie_document_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "r.json", &["ring", "--p", "5", "--exponents", "4"]);
    let out = dir.path().join("p.json");
    let o = bracelab(&["prelie", &f, "--k", "1", "--section", "random:7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["format"], "prelie-v1");
    assert_eq!(v["exponents"], serde_json::json!([2]));
    // [1]•[1] = [20]
    assert_eq!(v["product_table"][1][1], 20);
}

#[test]
fn flows_document_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "r.json", &["ring", "--p", "5", "--exponents", "4"]);
    let out = dir.path().join("flows.json");
    let o = bracelab(&["flows", &f, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = bracelab(&["validate", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn enumerate_and_suite() {
    let o = bracelab(&["enumerate", "--p", "5", "--exponents", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1 braces"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("enum");
    let o = bracelab(&["enumerate", "--p", "3", "--exponents", "2", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let n: usize = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), n);

    let f = gen(dir.path(), "r.json", &["ring", "--p", "5", "--exponents", "4"]);
    let o = bracelab(&["suite", &f, "--suite", "all", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suite"], "all");
}
