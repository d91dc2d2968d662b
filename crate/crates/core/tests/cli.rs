use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn twinslice(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinslice"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

const TINY: &str = r#"{
  "num_ues": 3,
  "hidden_units": 8,
  "batch_size": 8,
  "episodes": 2,
  "horizon_steps": 20,
  "eval_steps": 50,
  "final_window": 20,
  "jitter_window": 10
}"#;

#[test]
fn train_run_compare_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("tiny.json"), TINY).unwrap();

    let out = twinslice(&["train", "--config", "tiny.json", "--seed", "3", "--checkpoint", "ck.bin", "--out", "curve.csv"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(d.join("curve.csv")).unwrap().lines().count(), 3);

    let out = twinslice(&["run", "--config", "tiny.json", "--allocator", "pf", "--out", "pf.csv"], d);
    assert!(out.status.success());
    // 50 ticks recorded every 10.
    assert_eq!(fs::read_to_string(d.join("pf.csv")).unwrap().lines().count(), 6);

    for name in ["a.csv", "b.csv"] {
        let out = twinslice(&["compare", "--config", "tiny.json", "--checkpoint", "ck.bin", "--out", name, "--horizon", "40"], d);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(d.join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 3 * 4);
}

#[test]
fn validation_problems_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.json"), r#"{"ema_alpha": 1.5}"#).unwrap();
    fs::write(d.join("broken.json"), "{ not json").unwrap();
    fs::write(d.join("tiny.json"), TINY).unwrap();

    let out = twinslice(&["run", "--config", "bad.json", "--allocator", "static"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ema_alpha"));

    let out = twinslice(&["run", "--config", "broken.json", "--allocator", "static"], d);
    assert_eq!(out.status.code(), Some(1));

    let out = twinslice(&["run", "--config", "tiny.json", "--allocator", "drl"], d);
    assert_eq!(out.status.code(), Some(1));

    let out = twinslice(&["run", "--allocator", "greedy"], d);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("tiny.json"), TINY).unwrap();
    fs::write(d.join("junk.bin"), b"definitely not a checkpoint").unwrap();

    let out = twinslice(&["run", "--config", "tiny.json", "--allocator", "drl", "--checkpoint", "junk.bin"], d);
    assert_eq!(out.status.code(), Some(2));

    let out = twinslice(&["run", "--config", "tiny.json", "--allocator", "static", "--out", "no/such/dir/m.csv"], d);
    assert_eq!(out.status.code(), Some(2));
}
