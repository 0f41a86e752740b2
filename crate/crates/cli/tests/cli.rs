//! End-to-end tests driving the installed binary: output contents,
//! input forms, exit codes, config precedence, and byte determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nsbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsbound"))
        .args(args)
        .output()
        .expect("binary must launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout must be UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr must be UTF-8")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn run_single_cell_reports_the_polytope_bound() {
    let out = nsbound(&["run", "--argument", "HNA", "--principle", "NS", "--case", "16", "--starts", "2"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("| HNA | NS | 16 | NO LR | 0.5000000 | 0.5000 | +0.0000 |"), "{text}");
}

#[test]
fn verify_reads_json_and_whitespace_forms() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("pr.json");
    write(&json, "[0.5,0,0,0.5, 0.5,0,0,0.5, 0.5,0,0,0.5, 0,0.5,0.5,0]");
    let out = nsbound(&["verify", json.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("validity: ok"));
    // the nonlocal vertex violates all four residual sets
    assert_eq!(text.matches("| NO |").count(), 4, "{text}");

    let ws = dir.path().join("uniform.txt");
    write(&ws, "0.25 0.25 0.25 0.25\n0.25 0.25 0.25 0.25\n0.25 0.25 0.25 0.25\n0.25 0.25 0.25 0.25\n");
    let out = nsbound(&["verify", ws.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("validity: ok"));
    assert!(text.contains("outside both mixture families"), "{text}");

    let sig = dir.path().join("sig.txt");
    write(&sig, "0.6 0 0 0.4 0.5 0 0 0.5 0.5 0 0 0.5 0 0.5 0.5 0");
    let out = nsbound(&["verify", sig.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("validity: INVALID"));
    assert!(text.contains("signals beyond tolerance"), "{text}");
}

#[test]
fn errors_exit_nonzero_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.txt");
    write(&short, "0.5 0 0 0.5 0.5 0 0 0.5 0.5 0 0 0.5 0 0.5 0.5");
    let out = nsbound(&["verify", short.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("expected 16 entries"), "{}", stderr(&out));

    let out = nsbound(&["run", "--case", "17", "--argument", "HNA"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("case index must be in 1..=16"));

    let out = nsbound(&["table", "9"]);
    assert_eq!(out.status.code(), Some(2), "usage errors exit 2");

    let out = nsbound(&["run", "--argument", "XYZ"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown argument"), "{}", stderr(&out));
}

#[test]
fn strict_mode_exits_three_on_a_reference_exceedance() {
    // This cell's computed optimum sits provably above the published
    // per-case value, so strict mode must flag it.
    let out = nsbound(&[
        "run", "--argument", "CNA", "--principle", "LO", "--case", "1", "--starts", "2", "--strict",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("exceeds"), "{}", stderr(&out));

    // A faithful cell passes strict mode.
    let out = nsbound(&[
        "run", "--argument", "HNA", "--principle", "NS", "--case", "16", "--starts", "2", "--strict",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    write(
        &cfg,
        "# cell selection\nargument = HNA\nprinciple = NS\ncase = 16\nstarts = 2\nformat = csv\n",
    );
    let out = nsbound(&["run", "--config", cfg.to_str().unwrap(), "--case", "15"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("argument,principle,case,lr,"), "format from file: {text}");
    assert!(text.contains("HNA,NS,15,"), "case from flag must win: {text}");
    assert!(!text.contains("HNA,NS,16,"), "file case must be overridden: {text}");

    let out = nsbound(&["run", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with('{'), "format flag must override file");

    let bad = dir.path().join("bad.txt");
    write(&bad, "starts = 2\nwhatever = 3\n");
    let out = nsbound(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = nsbound(&[
            "oracle", "--argument", "CNA", "--principle", "NS", "--case", "16", "--starts", "2",
            "--samples", "2000", "--format", "json", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let (ba, bb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(!ba.is_empty());
    assert_eq!(ba, bb, "identical seed/config must produce identical bytes");
    let parsed: serde_json::Value = serde_json::from_slice(&ba).unwrap();
    assert_eq!(parsed["command"], "oracle");
    assert_eq!(parsed["body"]["kind"], "cells");
    let row = &parsed["body"]["rows"][0];
    assert_eq!(row["oracle"]["samples"], 2000);
    assert!(row["computed"]["value"].as_f64().unwrap() <= 0.5 + 1e-9);
}

#[test]
fn oracle_witness_stays_below_the_solver_value() {
    let out = nsbound(&[
        "oracle", "--argument", "HNA", "--principle", "LO", "--case", "16", "--starts", "2",
        "--samples", "5000", "--format", "json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &parsed["body"]["rows"][0];
    let solver = row["computed"]["value"].as_f64().unwrap();
    let witness = row["oracle"]["best_value"]["value"].as_f64().unwrap();
    assert!(witness <= solver + 1e-6, "witness {witness} above solver {solver}");
    assert!(witness >= solver - 0.05, "witness {witness} far below solver {solver}");
}
