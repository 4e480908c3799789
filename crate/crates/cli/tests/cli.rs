use std::path::Path;
use std::process::{Command, Output};

fn magtube(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.cfg");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_magtube"))
        .arg("--config")
        .arg(&path)
        .args(args)
        .env_remove("MAGTUBE_OUT")
        .env_remove("MAGTUBE_SEED")
        .output()
        .unwrap()
}

fn rows(out: &Output) -> Vec<csv::StringRecord> {
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    reader.records().map(Result::unwrap).collect()
}

fn column(out: &Output, name: &str) -> usize {
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    reader.headers().unwrap().iter().position(|h| h == name).unwrap()
}

#[test]
fn zero_time_rows_are_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = magtube(dir.path(), "kind = flat\nB = 0 1; -1 0\ngrid.x1 = -1 1 3\ngrid.p2 = 0.4\ntime = 0\n", &["flow"]);
    assert!(out.status.success());
    let (x1, p2, status) = (column(&out, "re_x1"), column(&out, "re_p2"), column(&out, "status"));
    let rows = rows(&out);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(&r[status], "ok");
        assert_eq!(r[x1].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap());
        assert_eq!(r[p2].parse::<f64>().unwrap(), 0.4);
    }
}

#[test]
fn oversized_sphere_grid_flags_chart_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = magtube(dir.path(), "kind = sphere\nradius = 1\nfield = 1\ngrid.x1 = -4 4 3\ngrid.p1 = 0.5\n", &["flow"]);
    assert!(out.status.success());
    let reason = column(&out, "reason");
    let reasons: Vec<String> = rows(&out).iter().map(|r| r[reason].to_string()).collect();
    assert_eq!(reasons, ["CHART_EXIT", "", "CHART_EXIT"]);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(magtube(dir.path(), "kind = flat\nbogus = 1\n", &["flow"]).status.code(), Some(2));
    assert_eq!(magtube(dir.path(), "kind = flat\ntime = 2i\n", &["flow"]).status.code(), Some(2));
    assert_eq!(magtube(dir.path(), "kind = flat\n", &["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn sweep_success_decays_with_momentum() {
    let dir = tempfile::tempdir().unwrap();
    let out = magtube(dir.path(), "kind = custom\nname = small-disk\nsweep.shells = 4\n", &["sweep"]);
    assert!(out.status.success());
    let rate = column(&out, "success_rate");
    let rates: Vec<f64> = rows(&out).iter().map(|r| r[rate].parse().unwrap()).collect();
    assert_eq!(rates.len(), 4);
    assert_eq!(rates[0], 1.0);
    assert!(rates.windows(2).all(|w| w[1] <= w[0]));
    assert!(rates[3] < rates[0]);
}

#[test]
fn acs_rows_report_positive_structure_at_i() {
    let dir = tempfile::tempdir().unwrap();
    let out = magtube(dir.path(), "kind = flat\nB = 0 1; -1 0\ngrid.x1 = -1 1 2\ngrid.p1 = 0 1 2\n", &["acs"]);
    assert!(out.status.success());
    let status = column(&out, "status");
    assert!(rows(&out).iter().all(|r| &r[status] == "ok"));
}

#[test]
fn verify_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = magtube(dir.path(), "kind = flat\n", &["verify", "flat-oracle", "--out", report.to_str().unwrap()]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    let checks = json["suites"][0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "kappa1_adaptedness" && c["note"].is_string()));
}
