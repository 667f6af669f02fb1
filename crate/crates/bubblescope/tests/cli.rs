use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bubblescope(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bubblescope"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--kind", "gbm", "--n", "100", "--seed", "7", "--out", "s.csv",
    ];
    assert!(bubblescope(&args, dir.path()).status.success());
    let first = std::fs::read(dir.path().join("s.csv")).unwrap();
    assert!(bubblescope(&args, dir.path()).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("s.csv")).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 101);
}

#[test]
fn every_simulate_kind_runs() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["gbm", "fts", "lppl", "feedback", "ising"] {
        let out = bubblescope(&["simulate", "--kind", kind, "--n", "120"], dir.path());
        assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.starts_with(b"date,close\n"));
    }
}

#[test]
fn fit_on_short_file_reports_too_short() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("too_short.csv"), "date,close\n0,1\n1,1.1\n2,1.2\n").unwrap();
    let out = bubblescope(&["fit", "--model", "fts", "--input", "too_short.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["code"], "TooShort");
    assert_eq!(err["subcommand"], "fit");
    assert!(err["message"].is_string());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        bubblescope(&["scan", "--input", "x.csv", "--frobnicate"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bubblescope(&["simulate", "--kind", "nope"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(bubblescope(&["teleport"], dir.path()).status.code(), Some(2));
}

#[test]
fn missing_input_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bubblescope(&["ingest", "--input", "absent.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["code"], "Io");
}

#[test]
fn scan_end_to_end_with_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let sim = [
        "simulate", "--kind", "fts", "--n", "300", "--tc", "320", "--b", "-0.3", "--a", "6", "--noise", "0.005",
    ];
    let out = bubblescope(&[&sim[..], &["--out", "hs.csv"]].concat(), dir.path());
    assert!(out.status.success());

    let args = [
        "scan",
        "--input",
        "hs.csv",
        "--window",
        "250",
        "--step",
        "21",
        "--out",
        "report.json",
        "--emit-plot-data",
    ];
    let out = bubblescope(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: Value = serde_json::from_str(&text).unwrap();
    let windows = report["windows"].as_array().unwrap();
    assert_eq!(windows.len(), 3);
    assert_eq!(report["config"]["scan"]["window_length"], 250);
    assert_eq!(report["config"]["scan"]["crash"]["threshold"], 0.15);

    let flagged: Vec<u64> = windows
        .iter()
        .filter(|w| w["bubble_flag"] == true)
        .map(|w| w["offset"].as_u64().unwrap())
        .collect();
    assert!(!flagged.is_empty());
    for offset in flagged {
        let tsv = std::fs::read_to_string(dir.path().join(format!("report.window-{offset}.tsv"))).unwrap();
        assert!(tsv.starts_with("time\tlogp\tnull\tmodel\n"));
        assert_eq!(tsv.lines().count(), 251);
    }

    assert!(bubblescope(&args, dir.path()).status.success());
    assert_eq!(text, std::fs::read_to_string(dir.path().join("report.json")).unwrap());
}

#[test]
fn fit_and_drawdowns_echo_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = bubblescope(
        &[
            "simulate", "--kind", "gbm", "--n", "3000", "--sigma", "0.02", "--out", "g.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());

    let out = bubblescope(
        &["fit", "--model", "lppl", "--input", "g.csv", "--seed", "3"],
        dir.path(),
    );
    assert!(out.status.success());
    let fit: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(fit["fit"]["model"], "lppl");
    assert!(fit["fit"]["omega"].is_number());
    assert_eq!(fit["config"]["fit"]["seed"], 3);

    let out = bubblescope(&["drawdowns", "--input", "g.csv", "--epsilon", "0.01"], dir.path());
    assert!(out.status.success());
    let dd: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(dd["config"]["epsilon"], 0.01);
    assert!(dd["bulk_fit"]["z"].as_f64().unwrap() > 0.0);
    assert!(!dd["drawdowns"].as_array().unwrap().is_empty());

    let out = bubblescope(&["drawdowns", "--input", "g.csv", "--out", "dd.csv"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("dd.csv")).unwrap();
    assert!(csv.starts_with("peak_time,trough_time,magnitude\n"));
}

#[test]
fn ingest_writes_canonical_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.csv"),
        "date,close\n2020-01-02,10\n2020-01-03,11\n2020-01-06,10.5\n",
    )
    .unwrap();
    let out = bubblescope(&["ingest", "--input", "p.csv", "--out", "p.json"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(v["series"]["times"], serde_json::json!([0.0, 1.0, 2.0]));
    assert_eq!(v["series"]["label"], "p");
}
