use std::path::PathBuf;
use std::process::Command;

use tormod::cli::{run_operations, Outcome};
use tormod::io::{emit, parse_doc, DiagramDoc, Overrides, Workspace};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> Workspace {
    Workspace::parse(&std::fs::read_to_string(fixture(name)).unwrap(), &Overrides::default()).unwrap()
}

fn without_timing(outs: &[Outcome]) -> Vec<String> {
    outs.iter()
        .map(|o| {
            let mut r = o.report.clone();
            r.timing_ms = None;
            emit(&r).unwrap()
        })
        .collect()
}

#[test]
fn reports_are_deterministic() {
    for name in ["semifree_gamma_h.json", "pullback.json", "circle.json"] {
        let ws = load(name);
        let a = run_operations(&ws, None, 8).unwrap();
        let b = run_operations(&load(name), None, 8).unwrap();
        assert_eq!(without_timing(&a), without_timing(&b), "{name}");
        assert!(a.iter().all(|o| o.report.passed), "{name}");
    }
}

#[test]
fn output_documents_read_back() {
    let ws = load("circle.json");
    for o in run_operations(&ws, None, 8).unwrap() {
        for (name, doc) in &o.outputs {
            let text = emit(doc).unwrap();
            assert!(text.ends_with('\n'));
            let back: DiagramDoc = parse_doc(&text).unwrap();
            assert_eq!(&back, doc, "{name}");
        }
    }
}

#[test]
fn torsion_output_is_quasi_coherent_and_extended() {
    let ws = load("semifree_gamma_h.json");
    let outs = run_operations(&ws, None, 8).unwrap();
    let (_, doc) = &outs[0].outputs[0];
    let text = format!(r#"{{"rank": 1, "preset": "semifree-circle", "window": [-8, 8], "modules": {{"T": {}}}}}"#, emit(doc).unwrap());
    let again = Workspace::parse(&text, &Overrides::default()).unwrap();
    let t = again.module("T").unwrap();
    assert!(t.is_quasicoherent(&again.window).unwrap());
    assert!(t.is_extended(&again.window).unwrap());
}

fn tormod(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tormod")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn exit_codes() {
    let ws = fixture("semifree_gamma_h.json");
    let ws = ws.to_str().unwrap();
    let (code, out) = tormod(&["--workspace", ws, "gamma-h", "--module", "Y", "--window", "-4:4"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"operation\": \"gamma-h\""));
    // a failing certificate: Y is not quasi-coherent
    assert_eq!(tormod(&["--workspace", ws, "check-qce", "--module", "Y"]).0, 1);
    assert_eq!(tormod(&["--workspace", ws, "check-qce", "--module", "missing"]).0, 2);
    assert_eq!(tormod(&["--workspace", "/nonexistent.json", "run"]).0, 1);
    assert_eq!(tormod(&["--window", "5:1", "run"]).0, 2);
    // untracked kernel: the subgroup of order two is not tracked in the empty workspace
    let (code, _) = tormod(&["--workspace", fixture("empty.json").to_str().unwrap(), "resolve-rank1", "--rep", r#"{"positive": [[2]]}"#]);
    assert_eq!(code, 3);
}

#[test]
fn out_directory_holds_reports() {
    let dir = std::env::temp_dir().join(format!("tormod-cli-{}", std::process::id()));
    let ws = fixture("circle.json");
    let (code, _) = tormod(&["--workspace", ws.to_str().unwrap(), "--out", dir.to_str().unwrap(), "resolve-rank1"]);
    assert_eq!(code, 0);
    assert!(dir.join("report.json").exists());
    for i in 0..3 {
        assert!(dir.join(format!("resolution.term{i}.json")).exists());
    }
    std::fs::remove_dir_all(dir).unwrap();
}
