use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn detcouple(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_detcouple"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("DETCOUPLE_THREADS", t),
        None => cmd.env_remove("DETCOUPLE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn out_flag(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

const SMALL: &[&str] =
    &["--space", "sphere", "--dim", "2", "--profile", "constant", "--rho0", "1.2", "--dt", "1e-3", "--T", "0.2", "--paths", "12", "--seed", "4"];

#[test]
fn simulate_is_byte_identical_across_worker_counts() {
    let mut bytes = Vec::new();
    for threads in ["1", "3", "1"] {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec!["simulate"];
        args.extend_from_slice(SMALL);
        let out = out_flag(dir.path());
        args.extend(["--out", &out]);
        let o = detcouple(&args, Some(threads));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read(dir.path().join("paths.csv")).unwrap();
        let json = fs::read(dir.path().join("summary.json")).unwrap();
        bytes.push((csv, json));
    }
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[0], bytes[2]);
    let csv = String::from_utf8(bytes[0].0.clone()).unwrap();
    assert!(csv.starts_with("t,path,dist,target,abs_err\n"));
    assert_eq!(csv.lines().count(), 1 + 12 * 201);
    let summary: serde_json::Value = serde_json::from_slice(&bytes[0].1).unwrap();
    assert_eq!(summary["paths"], 12);
    assert_eq!(summary["K"], 1.0);
    assert_eq!(summary["pass"], true);
}

#[test]
fn bad_thread_count_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate"];
    args.extend_from_slice(SMALL);
    let out = out_flag(dir.path());
    args.extend(["--out", &out]);
    let o = detcouple(&args, Some("zero"));
    assert_eq!(code(&o), 2);
}

#[test]
fn zero_horizon_writes_initial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let o = detcouple(&["simulate", "--space", "euclidean", "--dim", "3", "--rho0", "2", "--T", "0", "--paths", "5", "--out", &out], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("paths.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    for row in csv.lines().skip(1) {
        let f: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(f[0], 0.0);
        assert_eq!(f[2], 2.0);
        assert_eq!(f[4], 0.0);
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    for args in [
        vec!["simulate", "--space", "sphere", "--dim", "0", "--out", &out],
        vec!["simulate", "--space", "torus", "--out", &out],
        vec!["simulate", "--space", "sphere", "--K", "-1", "--out", &out],
        vec!["simulate", "--space", "hyperbolic", "--dim", "2", "--profile", "constant", "--rho0", "1", "--out", &out],
        vec!["simulate", "--space", "euclidean", "--rho0-deg", "30", "--out", &out],
    ] {
        let o = detcouple(&args, None);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = detcouple(&["simulate", "--space", "hyperbolic", "--dim", "2", "--profile", "constant", "--rho0", "1", "--out", &out], None);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("admissible"), "{msg}");
}

#[test]
fn config_file_fills_unset_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("res");
    fs::write(&cfg, format!("# sphere run\nspace = sphere\ndim = 3\nrho0 = 0.9\ndt = 1e-3\nT = 0.1\npaths = 7\nout = {}\n", out.display()))
        .unwrap();
    let o = detcouple(&["simulate", "--config", cfg.to_str().unwrap(), "--paths", "3"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["paths"], 3);
    assert_eq!(summary["n"], 3);
    assert_eq!(summary["T"], 0.1);

    fs::write(&cfg, "space = sphere\ncolour = blue\n").unwrap();
    let o = detcouple(&["simulate", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn check_reports_the_active_edge() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let o = detcouple(&["check", "--space", "sphere", "--dim", "2", "--profile", "sphere-contracting", "--rho0-deg", "90", "--out", &out], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("admissibility.json")).unwrap()).unwrap();
    assert_eq!(report["admissible"], true);
    assert_eq!(report["active_edge"], "lower");
    let band = fs::read_to_string(dir.path().join("band.csv")).unwrap();
    assert!(band.starts_with("t,rho,drho,lo,hi\n"));
    assert_eq!(band.lines().count(), 1002);

    let o = detcouple(&["check", "--space", "hyperbolic", "--dim", "2", "--profile", "constant", "--rho0", "1", "--out", &out], None);
    assert_eq!(code(&o), 1);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("admissibility.json")).unwrap()).unwrap();
    assert_eq!(report["admissible"], false);
    assert_eq!(report["first_violation_time"], 0.0);
}

#[test]
fn verify_and_converge_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let o = detcouple(
        &["verify", "--space", "sphere", "--dim", "2", "--rho0-deg", "90", "--dt", "1e-3", "--paths", "20", "--samples", "2000", "--out", &out],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report.to_string().contains("oracle_agreement"));

    let o = detcouple(
        &["converge", "--space", "sphere", "--dim", "2", "--rho0-deg", "90", "--paths", "20", "--dt-list", "1e-1,3e-2,1e-2", "--out", &out],
        None,
    );
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("dt,paths,mean_sup_err,max_sup_err,rms_err\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("convergence.json").exists());
}
