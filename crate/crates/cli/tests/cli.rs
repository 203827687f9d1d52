use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use tp_eqln::network::save_model;
use tp_eqln::reference::{open_box_network, toy_network};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tp-eqln"))
        .args(args)
        .current_dir(dir)
        .env_remove("TP_EQLN_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = run(dir, args);
    assert_eq!(code(&o), 0, "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

#[test]
fn gen_data_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let out = ok(d, &["gen-data", "--task", "phi1", "--seed", "7", "--out", "a.ds"]);
    assert!(out.contains("demos 10 (training 6, extrapolation 4)"), "{out}");
    ok(d, &["gen-data", "--task", "phi1", "--seed", "7", "--out", "b.ds"]);
    assert_eq!(fs::read(d.join("a.ds")).unwrap(), fs::read(d.join("b.ds")).unwrap());
    assert!(d.join("a.ds.summary.txt").exists());
    assert!(d.join("gen-data.toml").exists());

    let bad = run(d, &["gen-data", "--task", "phi9", "--out", "c.ds"]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("toy, phi1, phi2, phi3, phi4"));
}

#[test]
fn train_is_deterministic_and_rerunnable_from_its_snapshot() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let args = ["train", "--task", "toy", "--samples", "30", "--epochs", "120", "--seed", "3"];
    let first = ok(d, &[&args[..], &["--out-dir", "a"]].concat());
    assert!(first.contains("phase lasso") && first.contains("phase pruning"), "{first}");
    assert!(first.contains("nonzero parameters"));
    ok(d, &[&args[..], &["--out-dir", "b"]].concat());
    let model = fs::read(d.join("a/model.json")).unwrap();
    assert_eq!(model, fs::read(d.join("b/model.json")).unwrap());
    assert_eq!(
        fs::read(d.join("a/train_report.csv")).unwrap(),
        fs::read(d.join("b/train_report.csv")).unwrap()
    );

    // The snapshot alone reproduces the run.
    ok(d, &["train", "--config", "a/train.toml", "--out-dir", "c"]);
    assert_eq!(model, fs::read(d.join("c/model.json")).unwrap());
}

#[test]
fn train_errors_map_to_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(code(&run(d, &["train", "--task", "toy", "--epochs", "0"])), 2);
    assert_eq!(code(&run(d, &["train", "--data", "missing.ds"])), 4);
    assert_eq!(code(&run(d, &["train"])), 2);
    assert_eq!(code(&run(d, &["train", "--bogus"])), 2);
    fs::write(d.join("bad.toml"), "[train]\nepoch = 4\n").unwrap();
    assert_eq!(code(&run(d, &["train", "--task", "toy", "--config", "bad.toml"])), 2);
    fs::write(d.join("broken.ds"), "tp-eqln-dataset 1\nname toy\n").unwrap();
    assert_eq!(code(&run(d, &["train", "--data", "broken.ds"])), 4);

    let o = run(
        d,
        &["train", "--task", "toy", "--samples", "20", "--epochs", "20", "--learning-rate", "1e300", "--out-dir", "div"],
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(d.join("div/model.diverged.json").exists());
}

#[test]
fn extract_reports_the_census() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    save_model(&toy_network().unwrap(), d.join("toy.json")).unwrap();
    let plain = ok(d, &["extract", "--model", "toy.json", "--out", "plain.txt"]);
    let simple = ok(d, &["extract", "--model", "toy.json", "--simplify", "--eps", "1e-4", "--out", "simple.txt"]);
    assert!(simple.contains("# census sin=1 cos=1 sigmoid=1 sech=0 product=1"), "{simple}");
    let nodes = |s: &str| -> usize {
        let line = s.lines().find(|l| l.starts_with("# y1 nodes")).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    assert!(nodes(&simple) <= nodes(&plain));
    assert!(d.join("simple.json").exists() && d.join("extract.toml").exists());
    assert_eq!(code(&run(d, &["extract", "--model", "nope.json"])), 4);
    assert_eq!(code(&run(d, &["extract"])), 2);
}

#[test]
fn eval_of_the_oracle_is_zero() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    save_model(&open_box_network().unwrap(), d.join("box.json")).unwrap();
    let out = ok(d, &["eval", "--model", "box.json", "--task", "phi4", "--out-dir", "e"]);
    let summary: Vec<&str> = out.lines().filter(|l| l.starts_with("phi4,")).collect();
    assert_eq!(summary.len(), 2, "{out}");
    for row in &summary {
        let mse: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(mse < 1e-24, "{row}");
    }
    let names: Vec<_> = fs::read_dir(d.join("e")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 3, "{names:?}");

    ok(d, &["eval", "--model", "box.json", "--task", "phi4", "--out-dir", "f"]);
    // The snapshots differ only in their out_dir; the CSVs must match.
    for n in names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")) {
        assert_eq!(fs::read(d.join("e").join(n)).unwrap(), fs::read(d.join("f").join(n)).unwrap(), "{n:?}");
    }

    let one = ok(
        d,
        &["eval", "--model", "box.json", "--task", "phi4", "--splits", "training", "--no-keypoints", "--out-dir", "g"],
    );
    assert!(one.starts_with("task,split,demos,mse\n"), "{one}");
    assert_eq!(one.lines().filter(|l| l.starts_with("phi4,")).count(), 1);
    assert_eq!(code(&run(d, &["eval", "--model", "box.json", "--task", "toy"])), 2);
}

#[test]
fn ablate_tables() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let base = ["ablate", "--task", "toy", "--samples", "20", "--epochs", "40", "--seed", "2"];
    let full = ok(d, &[&base[..], &["--out-dir", "a"]].concat());
    let rows: Vec<&str> = full.lines().filter(|l| l.starts_with("full") || l.starts_with("no_")).collect();
    let labels: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["full", "no_f2", "no_f3", "no_f4", "no_f5", "no_f2+f3+f4+f5"]);

    let again = ok(d, &[&base[..], &["--out-dir", "b", "--jobs", "1"]].concat());
    let table = |s: &str| s.lines().filter(|l| !l.starts_with("wrote")).collect::<Vec<_>>().join("\n");
    assert_eq!(table(&full), table(&again));

    let only = ok(d, &[&base[..], &["--out-dir", "c", "--baseline-only"]].concat());
    assert_eq!(only.lines().filter(|l| l.starts_with("full") || l.starts_with("no_")).count(), 1);
    assert_eq!(only.lines().find(|l| l.starts_with("full")), Some(rows[0]));

    let custom = ok(d, &[&base[..], &["--out-dir", "e", "--remove", "sin,cos"]].concat());
    assert!(custom.contains("\nno_f1+f2,"), "{custom}");
    assert_eq!(code(&run(d, &[&base[..], &["--remove", "f9"]].concat())), 2);
    assert!(d.join("a/ablate.toml").exists());
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let o = Command::new(env!("CARGO_BIN_EXE_tp-eqln"))
        .args(["train", "--task", "toy", "--samples", "20", "--epochs", "8"])
        .current_dir(d)
        .env("TP_EQLN_OUT", "envout")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(d.join("envout/model.json").exists());
    ok(d, &["train", "--task", "toy", "--samples", "20", "--epochs", "8"]);
    assert!(d.join("runs/model.json").exists());
}
