use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qbattery");
const HEADER: &str = "time,ergotropy_B10,ergotropy_B11,ergotropy_global,energy_total,trace,purity";

const BASE: &str = r#"
[system]
omega_cell = 4.0
g = 0.01
t_e = 0.001
s = 1.0
cutoff = 2

[bath]
gamma = 1e-6
omega0 = 0.05
temperature = 250.0
omega_k = 0.085

[evolution]
t_end = 30.0
"#;

fn qb(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_config(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    qb(&args)
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn single_run_writes_schema_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "base.toml", BASE);
    let out = run_config(&cfg, &dir.path().join("out"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/base.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), HEADER);
    let data = rows(&csv);
    assert_eq!(data.len(), 61);
    assert!(data.windows(2).all(|w| w[1][0] > w[0][0]));
    for r in &data {
        assert!(r[1] >= -1e-10 && r[2] >= -1e-10 && r[3] >= -1e-10, "{r:?}");
        assert!((r[5] - 1.0).abs() < 1e-6);
    }
    let manifest: toml::Table = fs::read_to_string(dir.path().join("out/base.manifest.toml")).unwrap().parse().unwrap();
    for key in ["drive_amplitude", "drive_frequency", "cutoff", "omega_c", "s"] {
        assert!(manifest["system"].get(key).is_some(), "missing system.{key}");
    }
    assert_eq!(manifest["bath"]["mode"].as_str(), Some("paper-literal"));
    assert!(manifest["evolution"]["dt"].as_float().unwrap() > 0.0);
    assert_eq!(manifest["run"]["status"].as_str(), Some("ok"));
    assert!(manifest["run"].get("max_trace_drift").is_some());
    assert!(manifest["run"].get("min_eigenvalue").is_some());
}

#[test]
fn reruns_and_manifest_replays_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "base.toml", BASE);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(run_config(&cfg, &a, &[]).status.success());
    assert!(run_config(&cfg, &b, &[]).status.success());
    let first = fs::read(a.join("base.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("base.csv")).unwrap());
    let replay = dir.path().join("base.toml.replay");
    fs::copy(a.join("base.manifest.toml"), &replay).unwrap();
    let replay = write(dir.path(), "base.toml", &fs::read_to_string(&replay).unwrap());
    assert!(run_config(&replay, &c, &[]).status.success());
    assert_eq!(first, fs::read(c.join("base.csv")).unwrap());
}

#[test]
fn config_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[system]\ng = 0.01\ngamma = 3\n");
    let out = run_config(&bad, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma") && err.contains("line 3"), "{err}");

    let syntax = write(dir.path(), "syntax.toml", "[system\n");
    assert_eq!(run_config(&syntax, dir.path(), &[]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(run_config(&missing, dir.path(), &[]).status.code(), Some(2));

    let empty = write(dir.path(), "empty.toml", "preset = \"fig2a\"\nvalues = []\n");
    let out = qb(&["sweep", empty.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("values"));
}

#[test]
fn cli_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "base.toml", &BASE.replace("t_end = 30.0", "t_end = 2.0"));
    let out = run_config(&cfg, dir.path(), &["--cutoff", "3", "--dissipator", "transition-frequency"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: toml::Table = fs::read_to_string(dir.path().join("base.manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["system"]["cutoff"].as_integer(), Some(3));
    assert_eq!(manifest["bath"]["mode"].as_str(), Some("transition-frequency"));
    assert_eq!(manifest["run"]["dimension"].as_integer(), Some(27));
}

#[test]
fn integration_failure_keeps_partial_csv_with_marker() {
    let dir = tempfile::tempdir().unwrap();
    // an explicit step far outside the RK4 stability region
    let text = BASE.replace("gamma = 1e-6", "gamma = 1e-3").replace("t_end = 30.0", "t_end = 30.0\ndt = 0.5\nrecord_every = 1");
    let cfg = write(dir.path(), "unstable.toml", &text);
    let out = run_config(&cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    let csv = fs::read_to_string(dir.path().join("unstable.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), HEADER);
    assert!(csv.lines().last().unwrap().starts_with("# status=failed last_good_time="));
    assert!(!rows(&csv).is_empty());
    let manifest: toml::Table = fs::read_to_string(dir.path().join("unstable.manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["run"]["status"].as_str(), Some("failed"));
}

/// Independent re-scan of a trajectory CSV.
fn scan(csv: &str, band: f64) -> (f64, f64, f64, f64) {
    let data = rows(csv);
    let (t, e): (Vec<f64>, Vec<f64>) = data.iter().map(|r| (r[0], r[1])).unzip();
    let peak = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = e.iter().position(|&v| v == peak).unwrap();
    let last = *e.last().unwrap();
    let mut settle = t[0];
    for i in 0..e.len() {
        if (e[i] - last).abs() > band * last.abs() {
            settle = t[(i + 1).min(t.len() - 1)];
        }
    }
    let tail = &e[k..];
    let osc = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max) - tail.iter().copied().fold(f64::INFINITY, f64::min);
    (peak, t[k], settle, osc)
}

const SWEEP: &str = r#"
preset = "fig2a"
values = [0.25, 0.5, 1.0]

[system]
cutoff = 2

[evolution]
t_end = 40.0
"#;

#[test]
fn sweep_writes_points_and_recomputable_summary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "fig2a.toml", SWEEP);
    let out_dir = dir.path().join("sweep");
    let out = qb(&["sweep", spec.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap(), "--workers", "2", "--stabilization-band", "0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next().unwrap(), "value,peak_ergotropy,time_of_peak,stabilization_time,post_peak_oscillation,final_ergotropy,status");
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[6], "ok");
        let csv = fs::read_to_string(out_dir.join(format!("fig2a_d_{k:02}.csv"))).unwrap();
        let (peak, t_peak, settle, osc) = scan(&csv, 0.1);
        let num = |i: usize| f[i].parse::<f64>().unwrap();
        assert_eq!(num(1), peak);
        assert_eq!(num(2), t_peak);
        assert_eq!(num(3), settle);
        assert!((num(4) - osc).abs() <= 1e-11 * peak.abs().max(1.0));
    }
    assert_eq!(summary.lines().count(), 4);
}

#[test]
fn sweeps_are_independent_of_worker_count_and_match_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "fig2a.toml", SWEEP);
    let one = dir.path().join("one");
    let many = dir.path().join("many");
    assert!(qb(&["sweep", spec.to_str().unwrap(), "--out-dir", one.to_str().unwrap(), "--workers", "1"]).status.success());
    assert!(qb(&["sweep", spec.to_str().unwrap(), "--out-dir", many.to_str().unwrap(), "--workers", "3"]).status.success());
    for k in 0..3 {
        let name = format!("fig2a_d_{k:02}.csv");
        assert_eq!(fs::read(one.join(&name)).unwrap(), fs::read(many.join(&name)).unwrap());
    }
    assert_eq!(fs::read(one.join("summary.csv")).unwrap(), fs::read(many.join("summary.csv")).unwrap());

    // the d = 0.5 point equals a plain run at s = 2
    let cfg = BASE.replace("s = 1.0", "s = 2.0").replace("t_end = 30.0", "t_end = 40.0");
    let cfg = write(dir.path(), "point.toml", &cfg);
    assert!(run_config(&cfg, &dir.path().join("single"), &[]).status.success());
    assert_eq!(fs::read(dir.path().join("single/point.csv")).unwrap(), fs::read(one.join("fig2a_d_01.csv")).unwrap());
}

#[test]
fn single_value_sweep_is_a_run_plus_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "one.toml", &SWEEP.replace("[0.25, 0.5, 1.0]", "[0.25]"));
    let out_dir = dir.path().join("s");
    assert!(qb(&["sweep", spec.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]).status.success());
    assert_eq!(fs::read_to_string(out_dir.join("summary.csv")).unwrap().lines().count(), 2);
    let cfg = write(dir.path(), "point.toml", &BASE.replace("t_end = 30.0", "t_end = 40.0"));
    assert!(run_config(&cfg, &dir.path().join("r"), &[]).status.success());
    assert_eq!(fs::read(dir.path().join("r/point.csv")).unwrap(), fs::read(out_dir.join("fig2a_d_00.csv")).unwrap());
}

#[test]
fn failed_sweep_point_is_marked_and_others_continue() {
    let dir = tempfile::tempdir().unwrap();
    let text = "parameter = \"gamma\"\nvalues = [1e-6, 1e-3]\n[system]\ncutoff = 2\n[evolution]\nt_end = 20.0\ndt = 0.5\nrecord_every = 1\n";
    let spec = write(dir.path(), "gam.toml", text);
    let out_dir = dir.path().join("g");
    let out = qb(&["sweep", spec.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let status: Vec<&str> = summary.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(status, vec!["ok", "failed"]);
    assert!(out_dir.join("custom_gamma_01.csv").exists());
}
