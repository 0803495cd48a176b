use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use grover_core::lab::report::read_threshold_csv;
use grover_core::lab::{Distribution, FitResult};

fn grover_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grover-lab"))
        .args(args)
        .env_remove("GROVER_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = grover_lab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_distribution_json() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["run", "--algo", "sga", "--qubits", "3", "--out", path_str(dir.path())]);
    let text = fs::read_to_string(dir.path().join("run_sga_3.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["target"], "111");
    assert_eq!(doc["shots"], 0);
    let dist = Distribution::from_json(&text).unwrap();
    // sin²(5·arcsin(1/√8))
    let theta = (1.0f64 / 8.0).sqrt().asin();
    assert!((dist.prob("111") - (5.0 * theta).sin().powi(2)).abs() < 1e-9);
}

#[test]
fn run_with_trajectories_and_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path());
    let args = [
        "run", "--algo", "sgaa", "--qubits", "3", "--target", "010", "--error", "dep", "--p", "0.01", "--backend",
        "trajectory", "--shots", "400", "--seed", "5", "--out", out,
    ];
    ok(&args);
    let dist = Distribution::from_json(&fs::read_to_string(dir.path().join("run_sgaa_3.json")).unwrap()).unwrap();
    assert_eq!(dist.shots, 400);
    assert_eq!(dist.target, "010");
    assert!((dist.total() - 1.0).abs() < 1e-12);
    assert!(dist.prob("010") > 0.5);
}

#[test]
fn threshold_is_deterministic_and_bracketed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        ok(&[
            "threshold", "--algo", "sga", "--qubits", "3", "--error", "bf,pd", "--grid", "1e-4:3e-1:6", "--seed", "3",
            "--out", path_str(dir.path()),
        ]);
    }
    for name in ["threshold_sga_3_bf.csv", "samples_sga_3_bf.csv", "threshold_sga_3_pd.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let rows = read_threshold_csv(&a.path().join("threshold_sga_3_bf.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].threshold > 1e-4 && rows[0].threshold < 3e-1);
    assert_eq!(rows[0].shots, 0);
}

#[test]
fn scoped_threshold_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path());
    ok(&["threshold", "--algo", "sga", "--qubits", "3", "--error", "dep", "--scope", "2q", "--grid", "1e-4:5e-1:6", "--out", out]);
    ok(&["threshold", "--algo", "sga", "--qubits", "3", "--error", "dep", "--noisy-qubits", "0", "--grid", "1e-3:1:6", "--out", out]);
    assert!(dir.path().join("threshold_sga_3_dep-2q.csv").exists());
    assert!(dir.path().join("threshold_sga_3_dep-q0.csv").exists());
}

#[test]
fn unbracketed_grid_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = grover_lab(&[
        "threshold", "--algo", "sga", "--qubits", "3", "--error", "bf", "--grid", "1e-7:1e-6:4", "--out",
        path_str(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid edge"));
}

#[test]
fn bad_flags_are_rejected() {
    for args in [
        vec!["run", "--algo", "xga", "--qubits", "3"],
        vec!["run", "--qubits", "3"],
        vec!["run", "--algo", "sga", "--qubits", "3", "--error", "dep"],
        vec!["threshold", "--algo", "sga", "--qubits", "3", "--error", "thermal"],
        vec!["threshold", "--algo", "sga", "--qubits", "3", "--error", "bf", "--grid", "1:2"],
        vec!["run", "--algo", "sga", "--qubits", "3", "--backend", "gpu"],
    ] {
        assert!(!grover_lab(&args).status.success(), "{args:?}");
    }
}

#[test]
fn relax_scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "relax-scan", "--algo", "sga", "--qubits", "3", "--grid", "10:1000:5", "--out", path_str(dir.path()),
    ]);
    let text = fs::read_to_string(dir.path().join("relax_sga_3.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "algorithm,n,T1_us,T2_us,selectivity");
}

#[test]
fn fit_then_extrapolate() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path());
    // y = 2·e^{0.5 n}
    let pts: Vec<String> = (2..7).map(|n| format!("{n}:{}", 2.0 * (0.5 * n as f64).exp())).collect();
    ok(&["fit", "--points", &pts.join(","), "--out", out]);
    let fit = FitResult::from_json(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    assert!((fit.a - 2.0).abs() < 1e-9 && (fit.b - 0.5).abs() < 1e-9);
    let stdout = ok(&["extrapolate", "--fit", path_str(&dir.path().join("fit.json")), "--at", "10"]);
    let value: f64 = stdout.split('\t').nth(1).unwrap().trim().parse().unwrap();
    assert!((value / (2.0 * 5f64.exp()) - 1.0).abs() < 1e-5);
}

#[test]
fn report_merges_and_fits_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path());
    for n in ["2", "3", "4"] {
        ok(&["threshold", "--algo", "sga", "--qubits", n, "--error", "pf", "--grid", "1e-4:9e-1:6", "--out", out]);
    }
    ok(&["report", "--input", out]);
    let rows = read_threshold_csv(&dir.path().join("thresholds.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 3, 4]);
    let merged = path_str(&dir.path().join("thresholds.csv")).to_string();
    ok(&["fit", "--input", &merged, "--algo", "sga", "--error", "pf", "--out", out]);
    let fit = FitResult::from_json(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    assert!(fit.b < 0.0, "thresholds shrink with n");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.toml");
    fs::write(
        &cfg,
        r#"
algo = "m1ga"
qubits = 4
seed = 9
[[noise.rules]]
family = "ad"
p = 0.002
gate_scope = ["1q", "2q"]
"#,
    )
    .unwrap();
    let stdout = ok(&["run", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert!(stdout.starts_with("S = "));
    assert!(dir.path().join("run_m1ga_4.json").exists());
    // Flag overrides the file.
    ok(&["run", "--config", path_str(&cfg), "--algo", "sga", "--out", path_str(dir.path())]);
    assert!(dir.path().join("run_sga_4.json").exists());
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_grover-lab"))
        .args(["run", "--algo", "sga", "--qubits", "2"])
        .env("GROVER_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_grover-lab"))
        .args(["run", "--algo", "sga", "--qubits", "2", "--out", path_str(dir.path())])
        .env("GROVER_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
}
