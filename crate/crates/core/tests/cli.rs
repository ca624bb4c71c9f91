//! End-to-end runs of the command-line binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frontline"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("frontline-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn status(args: &[&str], out: &Path) -> i32 {
    bin().args(args).arg("--output-dir").arg(out).output().unwrap().status.code().unwrap()
}

#[test]
fn optimize_writes_wn_table_and_minimizer() {
    let d = scratch("optimize");
    let out = bin().args(["optimize", "--R", "1", "--T", "1", "--eps", "0.05", "--output-dir"]).arg(&d).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("minimizer: n = "), "{stdout}");
    let csv = fs::read_to_string(d.join("wn.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,w_n"));
    for line in lines {
        let (_, w) = line.split_once(',').unwrap();
        // 17 significant digits: one before the point, sixteen after
        let mantissa = w.split('e').next().unwrap();
        assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{w}");
    }
    let manifest = fs::read_to_string(d.join("manifest.txt")).unwrap();
    assert!(manifest.contains("wall_time_s:"));
    assert!(manifest.contains("package: frontline"));
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn empty_config_echoes_defaults() {
    let d = scratch("empty");
    let cfg = d.join("empty.cfg");
    fs::write(&cfg, "").unwrap();
    let code = status(&["--config", cfg.to_str().unwrap(), "spectral-gap"], &d);
    assert_eq!(code, 0);
    let manifest = fs::read_to_string(d.join("manifest.txt")).unwrap();
    for key in ["beta = 1.5000000000000000e0", "n_points = 801", "boundary = truncated_line", "seed = 42"] {
        assert!(manifest.contains(key), "missing `{key}` in\n{manifest}");
    }
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn exit_codes() {
    let d = scratch("codes");
    let bad_key = d.join("bad.cfg");
    fs::write(&bad_key, "gamma = 1\n").unwrap();
    assert_eq!(status(&["--config", bad_key.to_str().unwrap(), "instanton"], &d), 64);
    assert_eq!(status(&["--config", "/nonexistent/run.cfg", "instanton"], &d), 64);
    assert_eq!(status(&["centers", "--profile", "/nonexistent/p.csv"], &d), 64);
    assert_eq!(status(&["no-such-command"], &d), 64);
    let domain = d.join("domain.cfg");
    fs::write(&domain, "lambda = 3\n").unwrap();
    assert_eq!(status(&["--config", domain.to_str().unwrap(), "instanton"], &d), 1);
    assert_eq!(status(&["optimize", "--R=-1"], &d), 1);
    assert_eq!(status(&["optimize", "--R", "-1"], &d), 64);
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn repeated_runs_are_bit_identical() {
    let a = scratch("repeat-a");
    let b = scratch("repeat-b");
    for d in [&a, &b] {
        assert_eq!(status(&["instanton"], d), 0);
        assert_eq!(status(&["optimize", "--R", "1.3", "--T", "2"], d), 0);
    }
    for f in ["instanton.csv", "instanton.txt", "wn.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    fs::remove_dir_all(a).unwrap();
    fs::remove_dir_all(b).unwrap();
}

#[test]
fn profile_round_trip_through_centers() {
    let d = scratch("centers");
    assert_eq!(status(&["instanton"], &d), 0);
    let profile = d.join("instanton.csv");
    assert!(fs::read_to_string(&profile).unwrap().starts_with("x,m\n"));
    assert_eq!(status(&["centers", "--profile", profile.to_str().unwrap()], &d), 0);
    let csv = fs::read_to_string(d.join("centers.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "index,xi,sigma,residual");
    assert_eq!(rows.len(), 2);
    let xi: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!(xi.abs() < 1e-9);
    assert_eq!(status(&["contours", "--profile", profile.to_str().unwrap()], &d), 0);
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn particle_schedule_from_file() {
    let d = scratch("particles");
    let s = d.join("events.csv");
    fs::write(&s, "time,kind,a,b\n0.0,nucleation,0.5,\n1.0,collision,0,1\n").unwrap();
    assert_eq!(status(&["particle-model", "--schedule", s.to_str().unwrap(), "--R", "1", "--T", "1"], &d), 0);
    let csv = fs::read_to_string(d.join("particles.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    fs::write(&s, "0.5,collision,0,7\n").unwrap();
    assert_eq!(status(&["particle-model", "--schedule", s.to_str().unwrap()], &d), 1);
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn stored_trajectory_is_evaluated() {
    let d = scratch("traj");
    let args = ["strategy", "--R", "0.5", "--T", "0.5", "--n", "0", "--save-trajectory", "--stride", "1"];
    assert_eq!(status(&args, &d), 0);
    let summary = fs::read_to_string(d.join("strategy.csv")).unwrap();
    let action: f64 = summary.lines().find(|l| l.starts_with("action,")).unwrap()[7..].parse().unwrap();
    let traj = d.join("trajectory");
    let out = d.join("eval");
    assert_eq!(status(&["action-eval", "--traj", traj.to_str().unwrap()], &out), 0);
    let totals = fs::read_to_string(out.join("totals.csv")).unwrap();
    let total: f64 = totals.lines().find(|l| l.starts_with("total,")).unwrap()[6..].parse().unwrap();
    // the files carry every slice at full precision, so the two evaluations agree
    assert!((total - action).abs() <= 1e-12 * action, "{total} vs {action}");
    fs::remove_dir_all(d).unwrap();
}
