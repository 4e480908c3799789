//! One line per acceptance criterion, read from the `verify` JSON reports.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

const SEED: &str = "20240611";

fn verify(suite: &str, out: &Path) -> (bool, Duration) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_magtube"))
        .args(["verify", suite, "--seed", SEED, "--out"])
        .arg(out)
        .env_remove("MAGTUBE_CONFIG")
        .status()
        .unwrap();
    (status.success(), start.elapsed())
}

fn checks(report: &Value) -> Vec<&Value> {
    report["suites"].as_array().unwrap().iter().flat_map(|s| s["checks"].as_array().unwrap()).collect()
}

fn line(criterion: u8, passed: bool, detail: &str) -> bool {
    println!("criterion {criterion:>2}: {} {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("all-1.json"), dir.path().join("all-2.json"));
    let (ok1, t1) = verify("all", &first);
    let (ok2, t2) = verify("all", &second);
    let flat = dir.path().join("flat.json");
    let (_, t_flat) = verify("flat-oracle", &flat);

    let text = std::fs::read_to_string(&first).unwrap();
    let report: Value = serde_json::from_str(&text).unwrap();
    let all = checks(&report);
    let mut results = Vec::new();
    for criterion in 1..=10u8 {
        let tagged: Vec<&&Value> = all.iter().filter(|c| c["criterion"] == criterion).collect();
        let failed: Vec<String> = tagged
            .iter()
            .filter(|c| c["passed"] != true)
            .map(|c| format!("{}={} (tol {})", c["name"].as_str().unwrap(), c["value"], c["tolerance"]))
            .collect();
        let mut passed = !tagged.is_empty() && failed.is_empty();
        let mut detail = format!("{} checks", tagged.len());
        if criterion == 1 {
            passed &= t_flat < Duration::from_secs(10);
            detail.push_str(&format!(", flat-oracle in {:.1} s", t_flat.as_secs_f64()));
        }
        if !failed.is_empty() {
            detail.push_str(&format!(", failing: {}", failed.join(", ")));
        }
        results.push(line(criterion, passed, &detail));
    }
    let deterministic = text == std::fs::read_to_string(&second).unwrap();
    let slowest = t1.max(t2);
    results.push(line(
        11,
        ok1 && ok2 && deterministic && slowest < Duration::from_secs(300),
        &format!(
            "verify all exit {}, {:.1} s, {} across runs",
            if ok1 && ok2 { 0 } else { 1 },
            slowest.as_secs_f64(),
            if deterministic { "identical" } else { "different" }
        ),
    ));
    if !results.iter().all(|&p| p) {
        eprintln!("some acceptance criteria failed");
        std::process::exit(1);
    }
}
