//! End-to-end checks of the `ir-ntc` binary and the recipe runner.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ir_ntc::commands::RecipeArgs;
use ir_ntc::recipes::{run_tasks, SubTask};
use ir_ntc_core::rcsp::{expected_latency, joint_profile_bd, JointOptions};
use ir_ntc_core::{ChannelSpec, IncrementSchedule, LatencyMode};
use serde_json::Value;

fn ir_ntc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ir-ntc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = ir_ntc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn records(csv_text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(str::to_string).collect())
        .collect();
    (headers, rows)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["bounds", "rcsp", "optimize", "simulate", "recipe"] {
        let text = ok_stdout(&[sub, "--help"]);
        assert!(text.contains("Usage"), "{sub}");
    }
    assert!(!ir_ntc(&["frobnicate"]).status.success());
}

#[test]
fn bounds_writes_expected_columns() {
    let (headers, rows) = records(&ok_stdout(&[
        "bounds", "--kind", "infinite", "--k", "16,32",
    ]));
    assert_eq!(
        headers,
        ["k", "N", "I", "n1", "ell", "rate", "epsilon", "bound_kind"]
    );
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let k: f64 = row[0].parse().unwrap();
        let ell: f64 = row[4].parse().unwrap();
        let rate: f64 = row[5].parse().unwrap();
        assert!((rate - k / ell).abs() < 1e-12);
        assert_eq!(row[7], "infinite");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"channel": {"kind": "bsc", "p": 0.05}, "kind": "arq", "k": [16, 20]}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let (_, rows) = records(&ok_stdout(&["--config", cfg, "bounds"]));
    assert_eq!(
        rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(),
        ["16", "20"]
    );
    assert!(rows.iter().all(|r| r[7] == "arq"));
    let (_, rows) = records(&ok_stdout(&[
        "bounds", "--config", cfg, "--k", "32", "--kind", "infinite",
    ]));
    assert_eq!(rows.len(), 1);
    assert_eq!(
        (rows[0][0].as_str(), rows[0][7].as_str()),
        ("32", "infinite")
    );
    // same channel as the plain invocation
    let plain = ok_stdout(&[
        "bounds",
        "--channel",
        "bsc:0.05",
        "--kind",
        "infinite",
        "--k",
        "32",
    ]);
    assert_eq!(records(&plain).1, rows);
}

#[test]
fn rcsp_matches_library() {
    let text = ok_stdout(&[
        "rcsp",
        "--channel",
        "awgn:2",
        "--k",
        "16",
        "--increments",
        "19,4,4,4,8",
        "--jointness",
        "joint",
    ]);
    let (headers, rows) = records(&text);
    assert_eq!(
        headers,
        ["k", "j", "n_j", "marginal", "joint", "ell", "rate", "outage"]
    );
    let ch = ChannelSpec::awgn_db(2.0).unwrap();
    let s = IncrementSchedule::new(16, vec![19, 4, 4, 4, 8]).unwrap();
    let p = joint_profile_bd(&s, &ch, &JointOptions::default()).unwrap();
    let point = expected_latency(&p, LatencyMode::Repeated).unwrap();
    assert_eq!(rows.len(), 5);
    for (j, row) in rows.iter().enumerate() {
        assert_eq!(row[2], s.blocklengths()[j].to_string());
        assert_eq!(row[3].parse::<f64>().unwrap(), p.marginal[j]);
        assert_eq!(row[4].parse::<f64>().unwrap(), p.joint[j]);
        assert_eq!(row[5].parse::<f64>().unwrap(), point.ell);
    }
}

#[test]
fn simulate_is_independent_of_thread_count() {
    let args = [
        "simulate",
        "--channel",
        "bsc:0.0789",
        "--code",
        "cc64",
        "--k",
        "16",
        "--increments",
        "16,4,4,8",
        "--trials",
        "700",
        "--seed",
        "9",
    ];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_ir-ntc"))
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    let (headers, rows) = records(std::str::from_utf8(&one).unwrap());
    let col = |name: &str| rows[0][headers.iter().position(|h| h == name).unwrap()].clone();
    assert_eq!(col("trials"), "700");
    let completed: u64 = col("completed").parse().unwrap();
    let aborted: u64 = col("aborted").parse().unwrap();
    assert_eq!(completed + aborted, 700);
}

#[test]
fn recipe_is_reproducible_and_documented() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        let out = ir_ntc(&[
            "recipe",
            "table1",
            "--out",
            d.to_str().unwrap(),
            "--gnuplot",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let m = manifest(a.path());
    assert_eq!(m["preset"], "table1");
    assert_eq!(m["status"], "ok");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    let files: Vec<String> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap().to_string())
        .collect();
    assert!(!files.is_empty());
    for f in &files {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
        assert!(a
            .path()
            .join(PathBuf::from(f).with_extension("gp"))
            .exists());
    }
    for t in m["tasks"].as_array().unwrap() {
        assert_eq!(t["status"], "ok");
        assert!(t["rows"].as_u64().unwrap() > 0);
        assert!(t["invocations"].as_array().is_some_and(|v| !v.is_empty()));
    }
}

#[test]
fn unknown_preset_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ir_ntc(&["recipe", "fig99", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

#[test]
fn failed_subtask_yields_partial_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let argv = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    let tasks = [
        SubTask {
            file: "good.csv".into(),
            invocations: vec![argv("bounds --kind infinite --k 16")],
        },
        // joint profiles need the AWGN channel
        SubTask {
            file: "bad.csv".into(),
            invocations: vec![argv(
                "rcsp --channel bsc:0.1 --jointness joint --k 16 --m 3",
            )],
        },
    ];
    let args = RecipeArgs {
        name: "custom".into(),
        out: None,
        seed: 3,
        trials: None,
        gnuplot: false,
    };
    assert!(run_tasks(&tasks, dir.path(), &args).is_err());
    let m = manifest(dir.path());
    assert_eq!(m["status"], "partial");
    assert_eq!(m["files"], serde_json::json!(["good.csv"]));
    assert_eq!(m["tasks"][1]["status"], "failed");
    assert!(m["tasks"][1]["error"].as_str().unwrap().contains("AWGN"));
    assert!(dir.path().join("good.csv").exists());
    assert!(!dir.path().join("bad.csv").exists());
}
