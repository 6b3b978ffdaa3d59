use std::path::Path;
use std::process::Command;

fn znd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_znd"));
    for var in [
        "ZND_CONFIG",
        "ZND_OUT",
        "ZND_TOL",
        "ZND_THREADS",
        "ZND_SEED",
        "ZND_PLOT_SCRIPT",
    ] {
        c.env_remove(var);
    }
    c
}

fn files_in(dir: &Path) -> Vec<String> {
    match std::fs::read_dir(dir) {
        Ok(rd) => {
            let mut v: Vec<String> = rd
                .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .collect();
            v.sort();
            v
        }
        Err(_) => Vec::new(),
    }
}

#[test]
fn verify_p0_exits_zero_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p0.json");
    std::fs::write(
        &cfg,
        r#"{"params": {"u_plus": 0, "u_star": 2, "q": 0.3, "k": 1, "u_i": 1.2}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let st = znd()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["winding_open_half_plane"], 0);
    assert_eq!(report["winding_small_circle"], 1);
    assert_eq!(report["verdict"], "StableConditionD");
    let trace = std::fs::read_to_string(out.join("report_trace_half_plane.csv")).unwrap();
    assert!(trace.starts_with("lambda_re,lambda_im,D_re,D_im,cum_arg\n"));
}

#[test]
fn malformed_json_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"params\": {\"u_plus\": 0,").unwrap();
    let out = dir.path().join("out");
    let st = znd()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    assert!(files_in(&out).is_empty());
}

#[test]
fn unknown_field_and_inadmissible_params_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for body in [
        r#"{"params": {"u_plus": 0, "u_star": 2, "q": 0.3, "k": 1, "u_i": 1.2}, "colour": 1}"#,
        r#"{"params": {"u_plus": 0, "u_star": 2, "q": 0.6, "k": 1, "u_i": 1.2}}"#,
    ] {
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, body).unwrap();
        let st = znd()
            .args(["params", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(2), "{body}");
    }
    assert!(files_in(&out).is_empty());
}

#[test]
fn bad_subcommand_is_usage_error() {
    assert_eq!(znd().arg("frobnicate").status().unwrap().code(), Some(2));
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let st = znd()
        .arg("params")
        .arg("--out")
        .arg(blocker.join("sub"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn flags_override_environment() {
    let dir = tempfile::tempdir().unwrap();
    let env_out = dir.path().join("env");
    let flag_out = dir.path().join("flag");
    let st = znd()
        .env("ZND_OUT", &env_out)
        .arg("params")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(files_in(&env_out), vec!["params.json"]);
    let st = znd()
        .env("ZND_OUT", &env_out)
        .arg("params")
        .arg("--out")
        .arg(&flag_out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(files_in(&flag_out), vec!["params.json"]);
    let bad_tol = znd()
        .env("ZND_TOL", "0.5")
        .arg("params")
        .arg("--out")
        .arg(&flag_out)
        .status()
        .unwrap();
    assert_eq!(bad_tol.code(), Some(2));
}

#[test]
fn seeded_random_lambdas_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("det.json");
    std::fs::write(&cfg, r#"{"random": {"count": 20, "radius": 5}}"#).unwrap();
    let run = |seed: &str, out: &Path| {
        let st = znd()
            .args(["det", "--seed", seed, "--plot-script", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        std::fs::read(out.join("det.csv")).unwrap()
    };
    let a = run("7", &dir.path().join("a"));
    let b = run("7", &dir.path().join("b"));
    let c = run("8", &dir.path().join("c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(dir.path().join("a/det.gp").exists());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 21);
}

#[test]
fn sweep_with_inadmissible_row_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"grid": {"u_plus": [0], "u_star": [2], "q_fraction": [0.5, 1.5], "k": [1]}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let st = znd()
        .args(["sweep", "--threads", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("StableConditionD"));
    assert!(lines[2].contains("heat release"));
}

#[test]
fn simulate_writes_metrics_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": {"grid": {"x_left": 10, "x_right": 2.5, "cells": 500},
             "perturbation": {"amplitude": 0.05, "width": 1, "center": -3},
             "horizon": 2, "record_every": 20, "snapshot_every": 100}, "control": false}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let st = znd()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(
        files_in(&out),
        vec!["metrics.csv", "simulate_summary.json", "snapshots.csv"]
    );
    let snaps = std::fs::read_to_string(out.join("snapshots.csv")).unwrap();
    assert!(snaps.starts_with("t,xi,u,z\n"));
}

#[test]
fn profile_det_psi_oracle_commands_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for cmd in ["profile", "det", "psi", "oracle"] {
        let st = znd().arg(cmd).arg("--out").arg(&out).status().unwrap();
        assert_eq!(st.code(), Some(0), "{cmd}");
    }
    assert_eq!(
        files_in(&out),
        vec![
            "det.csv",
            "oracle.csv",
            "oracle_summary.json",
            "profile.csv",
            "profile_check.json",
            "psi.csv"
        ]
    );
}
