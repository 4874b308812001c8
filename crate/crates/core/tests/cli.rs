use std::path::Path;
use std::process::{Command, Output};

use underlay_harq::experiments::CSV_COLUMNS;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_underlay-harq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn every_preset_sweeps() {
    for preset in ["fig1a", "fig1b", "fig2a", "fig2b"] {
        let out = cli(&["sweep", "--preset", preset]);
        assert!(out.status.success(), "{preset}: {}", stderr(&out));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with("# "));
        let lines = data_lines(&text);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines.len() > 20);
        assert!(lines[1..].iter().all(|l| l.ends_with(",ok")), "{preset}");
    }
}

#[test]
fn sweep_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let run = |path: &Path, seed: &str| {
        let out = cli(&["sweep", "--preset", "fig1a", "--mc", "20000", "--seed", seed, "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(path).unwrap()
    };
    let first = run(&a, "5");
    assert_eq!(first, run(&b, "5"));
    assert_ne!(first, run(&c, "6"));

    let text = String::from_utf8(first).unwrap();
    let row = data_lines(&text)[1];
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), CSV_COLUMNS.len());
    // MC columns are populated when --mc is set.
    assert!(fields[6..11].iter().all(|f| f.parse::<f64>().is_ok()), "{row}");
}

#[test]
fn analytic_only_sweep_leaves_mc_columns_empty() {
    let out = cli(&["sweep", "--preset", "fig2b"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row = data_lines(&text)[1];
    let fields: Vec<&str> = row.split(',').collect();
    assert!(fields[6..11].iter().all(|f| f.is_empty()), "{row}");
}

#[test]
fn config_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ini");
    std::fs::write(&path, "[preset]\ninclude = fig1a\n\n[harq]\nprotocols = rtd, harq\n").unwrap();
    let out = cli(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("bad.ini:5:"), "{msg}");

    std::fs::write(&path, "[preset]\ninclude = fig1a\n[policy]\npi_typo = 0.5\n").unwrap();
    let out = cli(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.ini:4:"));

    let out = cli(&["sweep", "--preset", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cli(&["sweep", "--config", "/definitely/not/here.ini"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mine.ini");
    std::fs::write(
        &path,
        "[preset]\ninclude = fig1a\n[sweep]\nname = mine\ngrid = 0.5, 1\n[harq]\nm = 1\nprotocols = inr\n",
    )
    .unwrap();
    let out = cli(&["sweep", "--config", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# sweep: mine"));
    assert_eq!(data_lines(&text).len(), 1 + 2 * 2);
}

#[test]
fn validate_passes_and_reports_json() {
    let out = cli(&["validate", "--preset", "fig2a", "--mc", "200000", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn validate_failure_exits_1() {
    // A single packet cannot reproduce any throughput to 0.003.
    let out = cli(&["validate", "--preset", "fig1a", "--mc", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("FAIL mc"));
}
