use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_edge-goal-sim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn missing_config_exits_2_and_names_the_path() {
    let out = run(&["run", "--config", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/scenario.json"), "{err}");
}

#[test]
fn invalid_config_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"radio": {"ber_target": 0.0}, "primary": {"alpha": 1.2}}"#);
    let out = run(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("radio.ber_target"), "{err}");
    assert!(err.contains("primary.alpha"), "{err}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "typo.json", r#"{"radio": {"ber_targte": 1e-3}}"#);
    let out = run(&["run", "--config", &cfg, "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ber_targte"));
}

#[test]
fn trials_override_is_reported() {
    let out = run(&["run", "--trials", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("param,value,mode,trials,effectiveness,"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "none");
    assert_eq!(rows[0][1], "");
    assert_eq!(rows[0][3], "10");
}

#[test]
fn sweep_emits_one_row_per_value_and_mode() {
    let out = run(&[
        "sweep",
        "--trials",
        "500",
        "--sweep-param",
        "backhaul.rtt_ms",
        "--sweep-values",
        "0,25,75",
        "--mode",
        "standalone,ensemble",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 6);
    let keys: Vec<(&str, &str)> = rows.iter().map(|r| (r[1].as_str(), r[2].as_str())).collect();
    assert_eq!(
        keys,
        [
            ("0", "standalone"),
            ("0", "ensemble"),
            ("25", "standalone"),
            ("25", "ensemble"),
            ("75", "standalone"),
            ("75", "ensemble"),
        ]
    );
    assert!(rows.iter().all(|r| r[0] == "backhaul.rtt_ms" && r[3] == "500"));
}

#[test]
fn sweep_file_matches_inline_flags() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = write(
        dir.path(),
        "sweep.json",
        r#"{"parameter": "meh.beta_max", "values": [0.5, 1.0], "modes": ["ensemble"]}"#,
    );
    let a = run(&["sweep", "--trials", "300", "--sweep-file", &sweep]);
    let b = run(&[
        "sweep",
        "--trials",
        "300",
        "--sweep-param",
        "meh.beta_max",
        "--sweep-values",
        "0.5,1",
        "--mode",
        "ensemble",
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    let many = dir.path().join("many.csv");
    for (path, workers) in [(&one, "1"), (&many, "4")] {
        let out = run(&[
            "run",
            "--trials",
            "5000",
            "--mode",
            "ensemble",
            "--workers",
            workers,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        // summary goes to stdout when the CSV goes to a file
        assert!(String::from_utf8_lossy(&out.stdout).contains("goal effectiveness"));
    }
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&many).unwrap());
}

#[test]
fn seed_changes_results() {
    let a = run(&["run", "--trials", "2000", "--seed", "1"]);
    let b = run(&["run", "--trials", "2000", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn bad_sweep_path_is_a_config_error() {
    let out = run(&["sweep", "--trials", "10", "--sweep-param", "radio.nope", "--sweep-values", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
