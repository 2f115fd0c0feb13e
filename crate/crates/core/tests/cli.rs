use std::path::Path;
use std::process::{Command, Output};

fn qultsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qultsf"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, rows: usize, channels: usize) -> String {
    let csv = dir.join("data.csv");
    let out = qultsf(&["synth", "--rows", &rows.to_string(), "--channels", &channels.to_string(), "-o", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    csv.to_str().unwrap().to_string()
}

fn init_config(dir: &Path, csv: &str) -> String {
    let out = qultsf(&["init-config", "--data", csv]);
    assert!(out.status.success());
    let path = dir.join("config.toml");
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 500, 2);
    let cfg = init_config(dir.path(), &csv);
    let out_dir = dir.path().join("runs");
    let out = qultsf(&[
        "run", "-c", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", "3",
        "--set", "model.lookback=24", "--set", "model.horizon=6", "--set", "model.qubits=3",
        "--set", "model.layers=1", "--set", "train.max_epochs=1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cell = out_dir.join("qultsf_L24_T6_seed3");
    let metrics = std::fs::read_to_string(cell.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("model,lookback,horizon,seed,mse,mae"));
    assert!(metrics.lines().nth(1).unwrap().starts_with("qultsf,24,6,3,"));
    assert!(cell.join("checkpoint.txt").is_file());
}

#[test]
fn default_horizons_and_models_give_sixteen_rows() {
    let dir = tempfile::tempdir().unwrap();
    // small enough to be quick, large enough for T=720 windows in train and test
    let csv = synth(dir.path(), 2_400, 1);
    let cfg = init_config(dir.path(), &csv);
    let out_dir = dir.path().join("grid");
    let out = qultsf(&[
        "grid", "-c", &cfg, "--out", out_dir.to_str().unwrap(),
        "--set", "data.train_fraction=0.5", "--set", "data.test_fraction=0.4",
        "--set", "model.qubits=2", "--set", "model.layers=1", "--set", "train.max_epochs=1",
        "--set", "train.batch_size=256",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 16);
    let table = String::from_utf8(out.stdout).unwrap();
    for t in ["96", "192", "336", "720"] {
        assert!(table.lines().any(|l| l.trim_start().starts_with(t)), "{table}");
    }
    for m in ["qultsf", "linear", "nlinear", "dlinear"] {
        assert!(out_dir.join(format!("plots/T96_{m}.csv")).is_file());
    }
}

#[test]
fn failing_cell_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 300, 1);
    let cfg = init_config(dir.path(), &csv);
    let out = qultsf(&[
        "grid", "-c", &cfg, "--out", dir.path().join("g").to_str().unwrap(),
        "--horizons", "4", "--lookbacks", "8,5000", "--models", "linear", "--set", "train.max_epochs=1",
    ]);
    assert!(!out.status.success());
    assert!(dir.path().join("g/linear_L8_T4_seed0/metrics.csv").is_file());
    assert!(String::from_utf8_lossy(&out.stderr).contains("L=5000"));
}

#[test]
fn bad_config_field_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 300, 1);
    let cfg = init_config(dir.path(), &csv);
    let out = qultsf(&["run", "-c", &cfg, "--set", "model.kind=transformer"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.kind"));
}
