use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rxd(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rxd"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn rxd")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = rxd(&["run", "--config", "no/such/run.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no/such/run.toml"), "{}", stderr(&o));
}

#[test]
fn run_writes_one_row_per_step_with_monotone_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = rxd(&["run", "--out", "res", "--set", "grid.n=64"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("res/diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,time,energy,mass_ac,mass_bc,min_a,min_b,min_c,reaction_residual,cg_iters_a,cg_iters_b,cg_iters_c"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], k as f64);
    }
    for w in rows.windows(2) {
        assert!(w[1][2] <= w[0][2], "energy rose: {} -> {}", w[0][2], w[1][2]);
    }
}

#[test]
fn non_integer_step_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rxd(&["run", "--set", "time.dt=0.013"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nsize = 12\n");
    let o = rxd(&["run", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("size"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    let o = rxd(&["run", "--out", "blocker/sub", "--set", "grid.n=8"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn snapshots_round_trip_through_inspect_and_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\nn = 16\n[time]\ndt = 0.05\nt_final = 0.1\n[output]\nout_dir = \"first\"\nsnapshot_every = 2\n",
    );
    let o = rxd(&["run", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let snap = dir.path().join("first/field_a_step2.txt");
    assert!(snap.exists());

    let o = rxd(&["inspect", snap.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rxd-field v1");
    assert!(lines[1].starts_with("dim=2 n=16 "), "{}", lines[1]);
    assert!(lines[1].ends_with("t=0.1"), "{}", lines[1]);
    assert_eq!(lines[2], "cells=256");
    assert!(lines[3].starts_with("min=") && lines[4].starts_with("max=") && lines[5].starts_with("mean="));

    // Restart from the step-2 fields.
    let restart = format!(
        "[grid]\nn = 16\n[time]\ndt = 0.05\nt_final = 0.1\n[initial]\nkind = \"snapshot\"\na = \"first/field_a_step2.txt\"\nb = \"first/field_b_step2.txt\"\nc = \"first/field_c_step2.txt\"\n"
    );
    let cfg = write_config(dir.path(), &restart);
    let o = rxd(&["run", "--config", &cfg, "--out", "second"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn inspect_rejects_malformed_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "rxd-field v2\n").unwrap();
    let o = rxd(&["inspect", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let o = rxd(&["inspect", "absent.txt"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn single_dt_study_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = rxd(&["study-time", "--set", "study_time.dts=[0.04]"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn small_temporal_study_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = rxd(
        &[
            "study-time",
            "--set",
            "grid.n=24",
            "--set",
            "study_time.dts=[0.04, 0.02, 0.01]",
            "--set",
            "study_time.ref_dt=0.0025",
            "--jobs",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/temporal_orders.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param,err_a,order_a,err_b,order_b,err_c,order_c");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].split(',').nth(2).unwrap().is_empty());
}

#[test]
fn default_spatial_study_emits_three_order_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = rxd(&["study-space", "--out", "sp"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sp/spatial_orders.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let with_orders = rows.iter().filter(|r| !r[2].is_empty()).count();
    assert_eq!(with_orders, 3);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\nn = 24\n[time]\ndt = 0.02\nt_final = 0.1\n[output]\nsnapshot_every = 5\n",
    );
    for out in ["r1", "r2"] {
        let o = rxd(&["run", "--config", &cfg, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<_> = fs::read_dir(dir.path().join("r1"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 1);
    for name in names {
        let a = fs::read(dir.path().join("r1").join(&name)).unwrap();
        let b = fs::read(dir.path().join("r2").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs");
    }
}

#[test]
fn in_process_entry_point_matches_binary_exit_codes() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    assert_eq!(rxd::cli::main_with_args(["rxd", "--help"], &mut out, &mut err), 0);
    assert_eq!(rxd::cli::main_with_args(["rxd", "bogus"], &mut out, &mut err), 2);
    err.clear();
    let code = rxd::cli::main_with_args(["rxd", "run", "--set", "time.dt=0.013"], &mut out, &mut err);
    assert_eq!(code, 2);
    assert!(String::from_utf8_lossy(&err).starts_with("error: "));
}
