use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_birkhoff"))
        .args(args)
        .env_remove("BIRKHOFF_PRECISION")
        .env_remove("BIRKHOFF_TOL")
        .env_remove("BIRKHOFF_OUT")
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("birkhoff-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn analyze_worked_instance() {
    let out = run(&["analyze", data("worked_difference.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["hypotheses_ok"], true);
    assert_eq!(v["n"], 2);
}

#[test]
fn fuchs_suite_is_exact() {
    let out = run(&["verify", data("worked_difference.json").to_str().unwrap(), "fuchs"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn q_periodicity_writes_csv() {
    let dir = scratch("periodicity");
    let out = run(&[
        "--precision",
        "128",
        "--out",
        dir.to_str().unwrap(),
        "verify",
        data("mu_one_q.json").to_str().unwrap(),
        "periodicity",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("monodromy_q.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn unattainable_tolerance_exits_one() {
    let out = run(&["--tol", "1e-300", "verify", data("mu_one_q.json").to_str().unwrap(), "legendre"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn normalize_roundtrip_files() {
    let dir = scratch("normalize");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "normalize",
        data("mu_one_q.json").to_str().unwrap(),
        "-1,1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("norm trajectory"));
    let shifted = dir.join("system.json");
    assert!(dir.join("gauge_log.json").exists());
    let back_dir = scratch("normalize-back");
    let out = run(&["--out", back_dir.to_str().unwrap(), "normalize", shifted.to_str().unwrap(), "1,-1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let original: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data("mu_one_q.json")).unwrap()).unwrap();
    let back: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(back_dir.join("system.json")).unwrap()).unwrap();
    // Leading coefficient Q_mu is recovered exactly.
    let top = |v: &serde_json::Value| v["coefficients"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(top(&back), top(&original));
}

#[test]
fn malformed_input_exits_two() {
    let dir = scratch("malformed");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"difference\", \"n\": 2,").unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_two() {
    let out = run(&["analyze", "/nonexistent/system.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wrong_suite_for_kind_exits_two() {
    let out = run(&["verify", data("worked_difference.json").to_str().unwrap(), "legendre"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn real_ratio_reports_violation() {
    let out = run(&["analyze", data("real_ratio_difference.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["hypotheses_ok"], false);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn normalize_rejects_bad_targets() {
    let out = run(&["normalize", data("mu_one_q.json").to_str().unwrap(), "1,x"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["normalize", data("mu_one_q.json").to_str().unwrap(), "1,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}
