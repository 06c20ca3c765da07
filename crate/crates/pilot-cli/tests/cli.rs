use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use pilot::corpus::golden_cases;
use pilot::prover::{check_derivation, Derivation};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn pilot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pilot"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs")
}

fn pilot_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pilot"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn manifest() -> Vec<Value> {
    let text = std::fs::read_to_string(fixtures().join("manifest.json")).unwrap();
    serde_json::from_str::<Value>(&text).unwrap().as_array().unwrap().clone()
}

#[test]
fn manifest_matches_golden_expectations() {
    let entries = manifest();
    let cases = golden_cases();
    assert_eq!(entries.len(), cases.len());
    for case in &cases {
        let entry = entries.iter().find(|e| e["name"] == case.name.as_str()).unwrap();
        assert_eq!(entry["command"], case.expectation.command(), "{}", case.name);
        assert_eq!(entry["exit"], case.expectation.exit_code(), "{}", case.name);
        let input = std::fs::read_to_string(fixtures().join(entry["file"].as_str().unwrap())).unwrap();
        assert_eq!(input.trim(), case.input, "{}", case.name);
    }
}

#[test]
fn fixtures_reproduce_exit_codes_and_outputs() {
    for entry in manifest() {
        let out = pilot(&[entry["command"].as_str().unwrap(), entry["file"].as_str().unwrap()]);
        let name = entry["name"].as_str().unwrap();
        assert_eq!(out.status.code(), entry["exit"].as_i64().map(|c| c as i32), "{name}");
        let digest = hex::encode(Sha256::digest(&out.stdout));
        assert_eq!(digest, entry["sha256"].as_str().unwrap(), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn exit_codes_are_deterministic() {
    for entry in manifest() {
        let args = [entry["command"].as_str().unwrap(), entry["file"].as_str().unwrap()];
        let a = pilot(&args);
        let b = pilot(&args);
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn json_is_one_document_with_the_text_verdict() {
    for entry in manifest() {
        let (cmd, file) = (entry["command"].as_str().unwrap(), entry["file"].as_str().unwrap());
        let text = pilot(&[cmd, file]);
        let json = pilot(&["--format", "json", cmd, file]);
        assert_eq!(text.status.code(), json.status.code());
        let doc: Value = serde_json::from_slice(&json.stdout).expect("a single JSON document");
        let first = String::from_utf8(text.stdout).unwrap();
        assert_eq!(doc["verdict"].as_str().unwrap(), first.lines().next().unwrap(), "{file}");
    }
    let many = pilot(&["--format", "json", "--jobs", "2", "check", "eq1.pi", "eq13.pi", "deadlock-witness.pi"]);
    assert_eq!(many.status.code(), Some(2));
    let doc: Value = serde_json::from_slice(&many.stdout).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 3);
}

#[test]
fn stdin_input() {
    let out = pilot_stdin(&["check", "-"], "new x.(x!a.0 | x?b.0)");
    assert_eq!(out.status.code(), Some(0));
    let out = pilot_stdin(&["encode", "-"], "0");
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(pilot(&[]).status.code(), Some(1));
    assert_eq!(pilot(&["check"]).status.code(), Some(1));
    assert_eq!(pilot(&["check", "no-such-file.pi"]).status.code(), Some(1));
    assert_eq!(pilot_stdin(&["check", "-"], "x!").status.code(), Some(1));
    assert_eq!(pilot(&["--depth", "0", "check", "eq1.pi"]).status.code(), Some(1));
}

#[test]
fn emitted_derivations_check() {
    let dir = std::env::temp_dir().join(format!("pilot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("eq1.json");
    let out = pilot(&["--emit-derivation", path.to_str().unwrap(), "check", "eq1.pi"]);
    assert_eq!(out.status.code(), Some(0));
    let d: Derivation = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    check_derivation(&d).unwrap();

    let path = dir.join("eq11.json");
    let out = pilot(&["--emit-derivation", path.to_str().unwrap(), "extract", "eq11-extract.net"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let d: Derivation = serde_json::from_value(doc["pil"].clone()).unwrap();
    check_derivation(&d).unwrap();
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_flag_agrees() {
    for file in ["eq1.pi", "eq13.pi", "deadlock-witness.pi", "restriction-scope.pi"] {
        let plain = pilot(&["check", file]);
        let checked = pilot(&["--oracle", "check", file]);
        assert_eq!(plain.status.code(), checked.status.code(), "{file}");
    }
    let out = pilot(&["--oracle", "progress", "progress-stuck-output.pi"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn prove_and_run_commands() {
    let out = pilot_stdin(&["prove", "-"], "x!y\nx?y\n");
    assert_eq!(out.status.code(), Some(0));
    let out = pilot_stdin(&["prove", "-"], "x!y tens x?y\n");
    assert_eq!(out.status.code(), Some(2));
    let out = pilot(&["run", "eq13.pi"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.contains("rule=")), "{text}");
    let out = pilot(&["run", "eq-choreo-project.chor"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn races_command() {
    assert_eq!(pilot(&["races", "race-com.pi"]).status.code(), Some(3));
    assert_eq!(pilot(&["races", "eq1.pi"]).status.code(), Some(0));
}
