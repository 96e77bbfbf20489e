//! End-to-end runs of the binary against the shipped fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn out_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spx-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn spx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spx")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = spx(args);
    assert!(
        out.status.success(),
        "spx {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(|c| c.trim_matches('"').to_string()).collect()).collect()
}

#[test]
fn charseq_harmonic_example() {
    let dir = out_dir("charseq");
    let cfg = fixture("power.toml");
    let stdout = run_ok(&["charseq", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    let rows = csv_rows(&stdout);
    assert_eq!(rows[0], vec!["n", "epsilon", "delta"]);
    assert_eq!(rows.len(), 6);
    for (i, row) in rows[1..].iter().enumerate() {
        let n = i + 1;
        assert_eq!(row[0], n.to_string());
        let eps: f64 = row[1].parse().unwrap();
        assert!((eps - 1.0 / n as f64).abs() < 1e-15);
        assert_eq!(row[2], n.to_string());
    }
}

#[test]
fn geometric_nterm_example() {
    let dir = out_dir("nterm");
    let cfg = fixture("geometric.toml");
    let stdout = run_ok(&[
        "extremal",
        "nterm",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    let rows = csv_rows(&stdout);
    assert_eq!(rows[0][..3], ["n", "value", "s_star"]);
    let value: f64 = rows[1][1].parse().unwrap();
    assert!((value - 1.0 / 6.0).abs() < 1e-12, "value {value}");
    assert_eq!(rows[1][2], "2");
}

#[test]
fn jackson_integral_at_order_one() {
    let dir = out_dir("jin");
    let cfg = fixture("jackson.toml");
    let stdout = run_ok(&[
        "jackson",
        "in",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    for row in csv_rows(&stdout).iter().skip(1) {
        let lambda: f64 = row[1].parse().unwrap();
        if lambda == 1.0 {
            let value: f64 = row[2].parse().unwrap();
            assert!((value - 2.0).abs() < 1e-9, "I_n at order 1 gave {value}");
        }
    }
}

#[test]
fn sweeps_do_not_depend_on_worker_count() {
    let cfg = fixture("power.toml");
    let d1 = out_dir("det1");
    let d8 = out_dir("det8");
    for (dir, jobs) in [(&d1, "1"), (&d8, "8")] {
        run_ok(&[
            "extremal",
            "nterm",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
    }
    let a = std::fs::read(d1.join("extremal-nterm.csv")).unwrap();
    let b = std::fs::read(d8.join("extremal-nterm.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn manifest_echoes_inputs() {
    let dir = out_dir("manifest");
    let cfg = fixture("classify.toml");
    run_ok(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--tol",
        "1e-7",
        "--seed",
        "42",
    ]);
    let text = std::fs::read_to_string(dir.join("classify-manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "classify");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["tolerances"]["tol"], 1e-7);
    assert_eq!(v["config-hash"].as_str().unwrap().len(), 64);
    assert!(v["version"].is_string());
}

#[test]
fn plot_flag_writes_svg() {
    let dir = out_dir("plot");
    let cfg = fixture("modulus.toml");
    run_ok(&[
        "modulus",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--plot",
    ]);
    let svg = std::fs::read_to_string(dir.join("modulus.svg")).unwrap();
    assert!(svg.contains("<polyline"));
}

#[test]
fn missing_system_is_a_field_error() {
    let dir = out_dir("err");
    let cfg = fixture("classify.toml");
    let out = spx(&[
        "extremal",
        "nterm",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[system]"), "stderr: {err}");
}

#[test]
fn json_format_round_trips() {
    let dir = out_dir("json");
    let cfg = fixture("power.toml");
    let stdout = run_ok(&[
        "rearrange",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let rows: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(rows[0]["rank"], 1);
    assert_eq!(rows[0]["value"], 1.0);
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("rearrange.json")).unwrap())
            .unwrap();
    assert_eq!(rows, file);
}
