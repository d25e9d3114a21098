use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mclaw(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mclaw")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn lists_catalog() {
    let d = tempfile::tempdir().unwrap();
    let o = mclaw(&["list-scenarios"], d.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 8);
    assert!(text.contains("shear-flat-torus"));
}

#[test]
fn burgers_run_writes_series() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "burgers.cfg",
        "scenario = burgers-flat-circle\n[grid]\nn = 64\n[output]\ntimes = 0, 0.1, 0.2, 0.3\n[scheme]\nt_end = 0.3\n[checks]\nrun = mass, entropy, linf\n",
    );
    let o = mclaw(&["run", &cfg, "--out", "res"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let series = fs::read_to_string(d.path().join("res/series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next().unwrap(), "t,linf,linf_envelope,tv,tv_envelope,mass,entropy_residual_max");
    assert_eq!(lines.count(), 4);
    let state = fs::read_to_string(d.path().join("res/state_0.3.csv")).unwrap();
    assert!(state.starts_with("cell_index,r1,u\n"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("res/report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["checks"]["mass"]["pass"], true);
}

#[test]
fn shear_is_not_total_variation_diminishing() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "shear.cfg", "scenario = shear-flat-torus\n[grid]\nn = 32\n[checks]\nrun = mass, tv_diminishing\n");
    let o = mclaw(&["run", &cfg, "--out", "res"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tv_diminishing"));
    let report = fs::read_to_string(d.path().join("res/report.json")).unwrap();
    assert!(report.contains("\"tv_diminishing\""));
}

#[test]
fn expanding_circle_matches_closed_form() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "grow.cfg", "scenario = expanding-circle-compression\n[checks]\nrun = oracle_l1(tol=1e-6, n=256)\n");
    let o = mclaw(&["run", &cfg, "--out", "res"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn configuration_errors_exit_2_with_lines() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "bad.cfg", "[geometry]\nmetric = flat\n[flux]\nfamily = burgers\n[grid]\nn = 3\n");
    let o = mclaw(&["run", &cfg], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 6: n must be ≥ 4"));
    assert_eq!(mclaw(&["run", "no-such-scenario"], d.path()).status.code(), Some(2));
}

#[test]
fn solver_abort_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "short.cfg", "scenario = burgers-flat-circle\n[grid]\nn = 32\n[scheme]\nmax_steps = 2\n");
    let o = mclaw(&["run", &cfg], d.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn converge_prints_orders() {
    let d = tempfile::tempdir().unwrap();
    let o = mclaw(&["converge", "expanding-circle-compression", "--resolutions", "32,64", "--out", "c"], d.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(d.path().join("c/convergence.csv")).unwrap();
    assert!(csv.starts_with("n,l1_error,order\n"));
    assert!(csv.trim_end().ends_with("exact"));
}

#[test]
fn thread_count_is_validated() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mclaw")).arg("list-scenarios").env("MCLAW_THREADS", "0").current_dir(d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_mclaw")).arg("list-scenarios").env("MCLAW_THREADS", "2").current_dir(d.path()).output().unwrap();
    assert!(o.status.success());
}
