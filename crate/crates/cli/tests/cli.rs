use std::path::Path;
use std::process::{Command, Output};

fn harmrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmrec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn without_timing(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn table_csv_is_deterministic_across_thread_counts() {
    let a = harmrec(&["table", "--n", "3,4", "--m", "4,9", "--threads", "1"]);
    let b = harmrec(&["table", "--n", "3,4", "--m", "4,9", "--threads", "4"]);
    assert!(a.status.success() && b.status.success());
    let (a, b) = (
        String::from_utf8(a.stdout).unwrap(),
        String::from_utf8(b.stdout).unwrap(),
    );
    assert_eq!(without_timing(&a), without_timing(&b));
    assert_eq!(a.lines().next(), Some("n,m,e,gramian_cond,M_hat,wall_ms"));
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{"functional": "point", "m_list": [4], "n_list": [3]}"#,
    )
    .unwrap();
    let out = dir.path().join("t.csv");
    let cfg = config.to_str().unwrap();
    let status = harmrec(&[
        "table",
        "--config",
        cfg,
        "--n",
        "4",
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..2], &["4", "4"]);
}

#[test]
fn exit_codes() {
    assert_eq!(harmrec(&["table", "--n", "8"]).status.code(), Some(2));
    assert_eq!(
        harmrec(&["table", "--m", "5", "--n", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        harmrec(&["table", "--config", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        harmrec(&["recover", "--n", "4", "--m", "4", "--data", "1,2,3"])
            .status
            .code(),
        Some(2)
    );
    // 36 sensors on a level-2 mesh: the Gramian is singular
    assert_eq!(
        harmrec(&["recover", "--functional", "point", "--n", "2", "--m", "36"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(harmrec(&["bogus"]).status.code(), Some(2));
}

#[test]
fn recover_report() {
    let out = harmrec(&["recover", "--functional", "point", "--n", "6", "--m", "9"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = report["h1_error"].as_f64().unwrap();
    assert!((e - 0.28).abs() < 0.28 * 0.15, "{e}");
    assert_eq!(report["a_hat"].as_array().unwrap().len(), 9);

    let out = harmrec(&[
        "recover", "--n", "4", "--m", "4", "--data", "0,0,0,0", "--noise", "0",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["a_hat"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a.as_f64() == Some(0.0)));
    assert!(report["h1_error"].is_null());
    assert_eq!(report["noise"]["h1_bound"].as_f64(), Some(0.0));
}

#[test]
fn conv_reports_slopes() {
    let out = harmrec(&[
        "conv",
        "--n",
        "3,4,5",
        "--reference-n",
        "6",
        "--functional",
        "point",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("slope,"));
    assert!(!last.contains("NA"));
}

#[test]
fn bundle_write_then_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.hrb");
    let p = path.to_str().unwrap();
    let write = harmrec(&["bundle", "write", "--n", "4", "--m", "9", "--out", p]);
    assert!(write.status.success());
    assert!(Path::new(p).exists());
    let read = harmrec(&["bundle", "read", p, "--repeat", "10"]);
    assert!(read.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&read.stdout).unwrap();
    assert_eq!(summary["level"], 4);
    assert_eq!(summary["m"], 9);
    assert_eq!(summary["online_solves"], 10);

    std::fs::write(dir.path().join("bad.hrb"), b"nope").unwrap();
    let bad = harmrec(&[
        "bundle",
        "read",
        dir.path().join("bad.hrb").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(
        harmrec(&["bundle", "write", "--n", "4", "--m", "9"])
            .status
            .code(),
        Some(2)
    );
}
