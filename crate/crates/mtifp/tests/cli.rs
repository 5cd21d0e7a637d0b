//! The `mtifp` binary.

use std::path::Path;
use std::process::{Command, Output};

use mtifp::report::ConvergenceReport;

fn mtifp(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtifp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("MTIFP_REFERENCE_DIR", out.join("refs"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_writes_the_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let s = stdout(&mtifp(dir.path(), &["solve", "--eps", "0.5", "--grid-n", "64", "--tau", "0.01", "--lambda", "-1", "--t-final", "0.5"]));
    assert!(s.contains("50 steps"), "{s}");
    let csv = std::fs::read_to_string(dir.path().join("solution_eps0.5_N64.csv")).unwrap();
    assert_eq!(csv.lines().count(), 65);
    assert!(csv.starts_with("x,re_u,im_u\n-16,"));
}

#[test]
fn invalid_settings_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = mtifp(dir.path(), &["solve", "--tau", "0.3"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver"));
    let o = mtifp(dir.path(), &["sweep-temporal", "--preset", "table9"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("table9"));
    let o = mtifp(dir.path(), &["sweep-spatial", "--preset", "table2-lite"]);
    assert!(!o.status.success());
}

#[test]
fn config_file_sweep_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(
        &cfg,
        r#"
[solver]
t-final = 0.2
[sweep]
axis = "temporal"
eps = [0.5]
tau = [0.1, 0.025]
h = [0.5]
reference-n = 64
reference-tau = 0.001
"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let s = stdout(&mtifp(dir.path(), &["sweep-temporal", "--config", cfg, "--threads", "1"]));
    assert!(s.contains("max"), "{s}");
    let path = dir.path().join("custom_temporal.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let r = ConvergenceReport::from_csv(&text).unwrap();
    assert_eq!(r.resolutions, vec![0.1, 0.025]);
    assert!(r.meta("reference_sha256_eps0.5").is_some());
    assert!(dir.path().join("refs").read_dir().unwrap().count() == 1);
    // second run reuses the stored reference and writes the same bytes
    stdout(&mtifp(dir.path(), &["sweep-temporal", "--config", cfg]));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);

    let s = stdout(&mtifp(dir.path(), &["make-reference", "--config", cfg]));
    assert!(s.contains("sha256"), "{s}");
}

#[test]
fn traces_and_coefficient_check() {
    let dir = tempfile::tempdir().unwrap();
    let s = stdout(&mtifp(dir.path(), &["traces", "--eps", "1", "--grid-n", "64"]));
    assert!(s.contains("dominant period"), "{s}");
    assert!(dir.path().join("trace_eps1.csv").exists());
    assert!(dir.path().join("plot_traces.gp").exists());
    let s = stdout(&mtifp(dir.path(), &["check-coeffs", "--modes", "4", "--eps", "0.1", "--tau", "0.01"]));
    assert!(s.starts_with("worst discrepancy"), "{s}");
}
