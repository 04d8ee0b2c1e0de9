//! End-to-end tests driving the compiled binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sumrate"))
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}\nstderr: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn without_runtime(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("runtime_seconds");
    v
}

fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

fn bounds_config(seed: u64) -> Value {
    json!({
        "seed": seed,
        "layout": {"kind": "dense", "b": 2, "p": 1.0, "cell_radius": 0.3, "r0": 0.1},
        "channel": {
            "alpha": 1.5, "beta": 1.0, "r0": 0.1, "pcon": 1.0,
            "fading": {"family": "rayleigh"}
        },
        "k_values": [100, 1000, 10000],
        "num_channels": 1,
        "trials": 30
    })
}

fn op_config() -> Value {
    json!({
        "seed": 0,
        "instance": {
            "c": 0.5, "hk": 100.0, "b": 2, "n": 2,
            "params": {
                "alpha": 1.5, "beta": 1.0, "r0": 0.5, "pcon": 1.0,
                "fading": {"family": "rayleigh"}
            },
            "p_radius": 1.0
        },
        "ratio_check": {"c1": 0.5, "c2": 1.0, "hk": 100.0}
    })
}

#[test]
fn design_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "design.json",
        &json!({
            "seed": 1,
            "c_over_sbar": 10.0,
            "sbar_over_c": 0.1,
            "lambdas": [0.5, 5.0]
        }),
    );
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        run_ok(&["design", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    }
    assert_eq!(
        fs::read(out_a.join("design_curves.csv")).unwrap(),
        fs::read(out_b.join("design_curves.csv")).unwrap()
    );
    assert_eq!(
        without_runtime(read_summary(&out_a)),
        without_runtime(read_summary(&out_b))
    );

    // 1901 grid values for each of: feasibility, two multipliers, ratio.
    let lines = csv_lines(&out_a.join("design_curves.csv"));
    assert_eq!(lines[0], "rho,lhs,rhs,constraint");
    assert_eq!(lines.len(), 1 + 1901 * 4);

    let row = lines
        .iter()
        .find(|l| l.starts_with("2,") && l.ends_with(",feasibility"))
        .expect("grid row at rho = 2");
    let rhs: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((rhs - 10.0 * (2.0f64.ln()).ln_1p()).abs() < 1e-12);

    let summary = read_summary(&out_a);
    let range = &summary["results"]["feasible_range"];
    assert!((range["rho_min"].as_f64().unwrap() - 1.1266607).abs() < 1e-4);
    assert!((range["rho_max"].as_f64().unwrap() - 12.6302234).abs() < 1e-4);
}

#[test]
fn bounds_sweep_emits_ordered_rows() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bounds.json", &bounds_config(7));
    let out = tmp.path().join("out");
    run_ok(&["bounds", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let lines = csv_lines(&out.join("bounds.csv"));
    assert_eq!(lines.len(), 4);
    for (line, want_k) in lines[1..].iter().zip(["100", "1000", "10000"]) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], want_k);
        let lower: f64 = cols[2].parse().unwrap();
        let upper: f64 = cols[3].parse().unwrap();
        assert!(lower <= upper, "k = {want_k}: {lower} > {upper}");
    }
}

#[test]
fn seed_flag_overrides_config_and_changes_draws() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bounds.json", &bounds_config(7));
    let base = tmp.path().join("base");
    let reseeded = tmp.path().join("reseeded");
    run_ok(&["bounds", "--config", cfg.to_str().unwrap(), "--out", base.to_str().unwrap()]);
    run_ok(&[
        "bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        reseeded.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    let summary = read_summary(&reseeded);
    assert_eq!(summary["config"]["seed"], json!(99));
    assert_ne!(
        fs::read(base.join("bounds.csv")).unwrap(),
        fs::read(reseeded.join("bounds.csv")).unwrap()
    );
}

#[test]
fn bits_flag_rescales_rates_only() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "op.json", &op_config());
    let nats = tmp.path().join("nats");
    let bits = tmp.path().join("bits");
    run_ok(&["op-solve", "--config", cfg.to_str().unwrap(), "--out", nats.to_str().unwrap()]);
    run_ok(&[
        "op-solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        bits.to_str().unwrap(),
        "--bits",
    ]);
    let s_nats = read_summary(&nats);
    let s_bits = read_summary(&bits);
    assert_eq!(s_nats["units"], json!("nats"));
    assert_eq!(s_bits["units"], json!("bits"));
    let obj_nats = s_nats["results"]["objective"].as_f64().unwrap();
    let obj_bits = s_bits["results"]["objective"].as_f64().unwrap();
    assert!((obj_bits - obj_nats / std::f64::consts::LN_2).abs() < 1e-12);
    // Powers and fixed-point values are unit-free and must not move.
    assert_eq!(
        fs::read(nats.join("op_solution.csv")).unwrap(),
        fs::read(bits.join("op_solution.csv")).unwrap()
    );
    // The dimensionless ratio is untouched as well.
    assert_eq!(s_nats["results"]["ratio"], s_bits["results"]["ratio"]);
}

#[test]
fn op_solve_ratio_stays_in_its_window() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "op.json", &op_config());
    let out = tmp.path().join("out");
    run_ok(&["op-solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let ratio = read_summary(&out)["results"]["ratio"].as_f64().unwrap();
    let cap = 2.0f64.powf(3.0);
    assert!(ratio >= 1.0 - 1e-6 && ratio <= cap + 1e-6, "ratio {ratio}");
}

#[test]
fn miso_flag_overrides_config_m() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "miso.json",
        &json!({
            "seed": 2,
            "instance": {
                "c": 1.0, "hk": 200.0, "b": 2, "n": 1,
                "params": {
                    "alpha": 1.5, "beta": 1.0, "r0": 0.5, "pcon": 1.0,
                    "fading": {"family": "rayleigh"}
                },
                "p_radius": 1.0
            },
            "m": 2
        }),
    );
    let out = tmp.path().join("out");
    run_ok(&[
        "miso",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--m",
        "3",
    ]);
    let summary = read_summary(&out);
    assert_eq!(summary["config"]["m"], json!(3));
    assert!(summary["results"]["gram_residual"].as_f64().unwrap() < 1e-10);
    // Two transmitters, three beams, one channel.
    assert_eq!(csv_lines(&out.join("miso_solution.csv")).len(), 1 + 6);
}

#[test]
fn schedule_sim_emits_one_row_per_cell_per_trial() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sched.json",
        &json!({
            "seed": 3,
            "layout": {"kind": "dense", "b": 2, "p": 1.0, "cell_radius": 0.3, "r0": 0.1},
            "channel": {
                "alpha": 1.5, "beta": 1.0, "r0": 0.1, "pcon": 1.0,
                "fading": {"family": "rayleigh"}
            },
            "k": 50,
            "num_channels": 2,
            "trials": 10
        }),
    );
    let out = tmp.path().join("out");
    run_ok(&["schedule-sim", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let lines = csv_lines(&out.join("schedule_trials.csv"));
    assert_eq!(lines.len(), 1 + 10 * 2 * 2);
    let first: Vec<&str> = lines[1].split(',').collect();
    let sinr: f64 = first[4].parse().unwrap();
    let rate: f64 = first[5].parse().unwrap();
    assert!((rate - sinr.ln_1p()).abs() < 1e-12);
    let summary = read_summary(&out);
    assert!(summary["results"]["rate"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["results"]["p2p"]["regime"], json!("linear"));
}

#[test]
fn scaling_sweep_levels_grow_with_k() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "scaling.json",
        &json!({
            "seed": 5,
            "fading": {"family": "rayleigh"},
            "path": {"alpha": 1.5, "beta": 1.0, "r0": 0.05},
            "d": 0.3,
            "p": 1.0,
            "k_values": [1000.0, 10000.0]
        }),
    );
    let out = tmp.path().join("out");
    run_ok(&["scaling-sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let lines = csv_lines(&out.join("scaling_points.csv"));
    assert_eq!(lines.len(), 3);
    let closed: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(closed[1] > closed[0]);
    // The empirical column is present but blank unless requested.
    assert_eq!(lines[1].split(',').nth(2).unwrap(), "");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = bounds_config(7);
    cfg.as_object_mut()
        .unwrap()
        .insert("typo_key".into(), json!(1));
    let path = write_config(tmp.path(), "bad.json", &cfg);
    let out = bin()
        .args(["bounds", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo_key"));
}

#[test]
fn missing_seed_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = bounds_config(7);
    cfg.as_object_mut().unwrap().remove("seed");
    let path = write_config(tmp.path(), "noseed.json", &cfg);
    let out = bin()
        .args(["bounds", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn missing_config_flag_fails() {
    let out = bin().arg("bounds").output().unwrap();
    assert!(!out.status.success());
}
