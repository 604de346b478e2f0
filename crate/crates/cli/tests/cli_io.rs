//! End-to-end checks of the binary's exit codes, diagnostics and the tw
//! subcommand contract.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wishroot")
}

fn dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("wishroot-cli-io-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write(name: &str, contents: &str) -> PathBuf {
    let p = dir().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn small_inputs() -> (PathBuf, PathBuf) {
    // deterministic pseudo-random values, no external RNG needed
    let mut state = 12345u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
    };
    let mut x = String::from("a,b,c,d,e,f,g,h\n");
    let mut y = String::from("u,v\n");
    for _ in 0..20 {
        let xr: Vec<String> = (0..8).map(|_| format!("{:.6}", next())).collect();
        x.push_str(&(xr.join(",") + "\n"));
        let yr: Vec<String> = (0..2).map(|_| format!("{:.6}", next())).collect();
        y.push_str(&(yr.join(",") + "\n"));
    }
    (write("x_ok.csv", &x), write("y_ok.csv", &y))
}

#[test]
fn parse_error_exits_2_with_location() {
    let bad = write("bad.csv", "a,b\n1,2\n3,oops\n");
    let (_, y) = small_inputs();
    let out = Command::new(bin())
        .args([
            "test", "cca", "--x", bad.to_str().unwrap(), "--y", y.to_str().unwrap(), "--seed",
            "1", "--out", dir().join("r.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains(":3:2:"), "diagnostic should carry line:col, got {msg}");
}

#[test]
fn nan_and_ragged_rows_exit_2() {
    let (_, y) = small_inputs();
    for contents in ["a,b\n1,NaN\n2,3\n", "a,b\n1\n2,3\n", "a,b\n1,inf\n2,3\n"] {
        let bad = write("bad2.csv", contents);
        let out = Command::new(bin())
            .args([
                "test", "cca", "--x", bad.to_str().unwrap(), "--y", y.to_str().unwrap(),
                "--seed", "1", "--out", dir().join("r.json").to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "input {contents:?}");
    }
}

#[test]
fn validation_error_exits_3() {
    // mismatched row counts between X and Y
    let x = write("x3.csv", "a,b\n1,2\n3,4\n5,6\n");
    let y = write("y3.csv", "u\n1\n2\n");
    let out = Command::new(bin())
        .args([
            "test", "cca", "--x", x.to_str().unwrap(), "--y", y.to_str().unwrap(), "--seed",
            "1", "--out", dir().join("r.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn degenerate_problem_exits_4() {
    // A saturated projector (p_low = n - 1) leaves A with rank zero for the
    // observed data and every permutation, so the null is degenerate.
    let x = write("x4.csv", "a,b,c,d\n1,0,2,1\n0,1,1,2\n2,2,0,0\n");
    let y = write("y4.csv", "u,v\n0,0\n1,0\n0,1\n");
    let out = Command::new(bin())
        .args([
            "test", "cca", "--x", x.to_str().unwrap(), "--y", y.to_str().unwrap(), "--seed",
            "1", "--k", "10", "--out", dir().join("r.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn tw_subcommand_contract() {
    // quantile anchor
    let out = Command::new(bin()).args(["tw", "quantile", "0.95"]).output().unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - 0.9793).abs() < 2e-3);

    // location-scale identity: cdf(--mu 1 --sigma 2, 1.0) == cdf(0)
    let a = Command::new(bin())
        .args(["tw", "cdf", "--mu", "1", "--sigma", "2", "1.0"])
        .output()
        .unwrap();
    let b = Command::new(bin()).args(["tw", "cdf", "0.0"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);

    // deep left tail via the `--` escape
    let tail = Command::new(bin()).args(["tw", "cdf", "--", "-10"]).output().unwrap();
    let v: f64 = String::from_utf8_lossy(&tail.stdout).trim().parse().unwrap();
    assert!(v <= 1e-7);

    // 12 significant digits
    let text = String::from_utf8_lossy(&b.stdout);
    let mantissa = text.trim().split('e').next().unwrap();
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    assert_eq!(digits, 12, "expected 12 significant digits, got {text}");

    // out-of-domain probability -> exit 2
    let bad = Command::new(bin()).args(["tw", "quantile", "1.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn pvalues_stdout_row_count() {
    let out = Command::new(bin())
        .args([
            "simulate", "pvalues", "--method", "pcev", "--p", "12", "--n", "20", "--r2", "0",
            "--sims", "5", "--perms", "20", "--k", "10", "--seed", "7",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines.len(), 6, "header + 5 rows, got {}", lines.len());
    assert_eq!(lines[0], "sim,p_value_tw,p_value_perm");
}

#[test]
fn approx_csv_schema() {
    let out_path = dir().join("approx.csv");
    let out = Command::new(bin())
        .args([
            "simulate", "approx", "--p", "10", "--m", "8", "--n", "2", "--k", "10", "--reps",
            "100", "--seed", "3", "--out", out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("grid,empirical,mm,mle,ad,adr"));
    assert_eq!(lines.count(), 100);
    let sidecar = std::fs::read_to_string(format!("{}.config.json", out_path.display())).unwrap();
    let cfg: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(cfg["config"]["seed"], 3);
    assert!(cfg["ks"]["mm"].as_f64().unwrap() <= 1.0);
}

#[test]
fn test_document_has_stable_shape() {
    let (x, y) = small_inputs();
    let out_path = dir().join("doc.json");
    let out = Command::new(bin())
        .args([
            "test", "cca", "--x", x.to_str().unwrap(), "--y", y.to_str().unwrap(), "--k", "15",
            "--seed", "9", "--out", out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], "1");
    let p = doc["result"]["p_value_tw"].as_f64().unwrap();
    assert!(p > 0.0 && p < 1.0);
    assert_eq!(doc["result"]["problem_label"], "cca");
    assert!(doc["timing_seconds"].as_f64().unwrap() >= 0.0);
    let inputs = doc["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 2);
    assert!(inputs[0]["content_hash"]
        .as_str()
        .unwrap()
        .starts_with("fnv1a64:"));
    assert_eq!(inputs[0]["rows"], 20);
    assert_eq!(inputs[0]["cols"], 8);
}
