//! Sweeps, reports, traces and configuration end to end, at small sizes.

use mtifp::config::{parse_str, resolve, Overrides, TraceSpec};
use mtifp::report::ConvergenceReport;
use mtifp::store::ReferenceStore;
use mtifp::sweep::run_sweep;
use mtifp::traces::{compute_traces, dominant_period, write_traces};
use mtifp::RustFftFactory;
use mtifp_core::fft::Fft;
use mtifp_core::oracle::{mode_ode_solve, OracleConfig};
use mtifp_core::solver::{init, propagate, InitialData, SolverConfig};
use mtifp_core::spectral::{h2_error, Fourier};
use mtifp_core::C64;

fn sweep_of(text: &str) -> mtifp::config::SweepSpec {
    resolve(&parse_str(text).unwrap(), &Overrides::default(), None).unwrap().sweep.unwrap()
}

const SMALL: &str = r#"
[solver]
t-final = 0.1
[sweep]
axis = "spatial"
eps = [0.5, 0.125]
h = [2.0, 1.0, 0.5]
tau = [0.001]
reference-n = 128
reference-tau = 0.001
"#;

#[test]
fn sweeps_are_byte_for_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let store = ReferenceStore::new(dir.path());
    let spec = sweep_of(SMALL);
    let f = RustFftFactory::default();
    let first = run_sweep(&spec, &store, &f).to_csv();
    let second = run_sweep(&spec, &store, &f).to_csv();
    assert_eq!(first, second);
    // a fresh store recomputes the same references
    let other = tempfile::tempdir().unwrap();
    assert_eq!(run_sweep(&spec, &ReferenceStore::new(other.path()), &f).to_csv(), first);

    let r = ConvergenceReport::from_csv(&first).unwrap();
    assert!(r.meta("failed").is_none());
    for row in &r.rows {
        assert!(row.errors.windows(2).all(|w| w[1] < w[0]), "{row:?}");
    }
    let u = r.uniform_row();
    for (k, v) in u.iter().enumerate() {
        assert_eq!(*v, r.rows.iter().map(|row| row.errors[k]).fold(0.0, f64::max));
    }
}

#[test]
fn linear_sweep_is_exact_once_the_data_are_resolved() {
    let spec = sweep_of(
        r#"
[solver]
lambda = 0.0
[sweep]
axis = "spatial"
eps = [1.0, 0.1]
h = [0.25, 0.125]
tau = [0.01]
reference-n = 512
reference-tau = 0.01
"#,
    );
    let dir = tempfile::tempdir().unwrap();
    let r = run_sweep(&spec, &ReferenceStore::new(dir.path()), &RustFftFactory::default());
    for row in &r.rows {
        for e in &row.errors {
            assert!(*e <= 1e-10, "eps {}: {e:e}", row.eps);
        }
    }
}

#[test]
fn failed_cells_do_not_stop_the_sweep() {
    // blows up: focusing, large data, small eps
    let mut spec = sweep_of(SMALL);
    spec.base.lambda = -50.0;
    spec.base.t_final = 1.0;
    spec.fixed = 0.01;
    spec.reference_tau = 0.01;
    let dir = tempfile::tempdir().unwrap();
    let r = run_sweep(&spec, &ReferenceStore::new(dir.path()), &RustFftFactory::default());
    assert!(r.meta("failed").is_some());
    assert!(r.rows.iter().all(|row| row.errors.len() == 3));
    assert!(r.uniform_row().iter().any(|e| e.is_nan()));
    ConvergenceReport::from_csv(&r.to_csv()).unwrap();
}

#[test]
fn negative_lambda_from_a_file_reaches_the_kernels() {
    let l = resolve(
        &parse_str("[solver]\nlambda = -1.0\nn = 64\neps = 0.5\ntau = 1e-4\nt-final = 0.25\n").unwrap(),
        &Overrides::default(),
        None,
    )
    .unwrap();
    let c = l.solver;
    assert_eq!(c.lambda, -1.0);
    let f = RustFftFactory::default();
    let s = propagate(&c, &f, &mut []).unwrap();
    let plus = propagate(&SolverConfig { lambda: 1.0, ..c.clone() }, &f, &mut []).unwrap();
    let mut four = Fourier::new(c.grid().unwrap(), Fft::new(c.n)).unwrap();
    let s0 = init(&c, &mut four).unwrap();
    let o = mode_ode_solve(&OracleConfig::matching(&c, 1e-11), Fft::new(c.n), &s0.u, &s0.u_dot).unwrap();
    assert!(h2_error(&s.u, &o.state.u).unwrap() < 1e-5);
    assert!(h2_error(&plus.u, &o.state.u).unwrap() > 1e-2);
}

fn short_traces(eps: Vec<f64>) -> TraceSpec {
    let mut t = TraceSpec { eps, ..TraceSpec::default() };
    t.base.n = 64;
    t
}

#[test]
fn trace_periods_scale_with_eps_squared() {
    let spec = short_traces(vec![1.0, 0.25]);
    let tr = compute_traces(&spec, &RustFftFactory::default()).unwrap();
    for t in &tr {
        let (t0, u0) = t.samples[0];
        assert_eq!(t0, 0.0);
        assert!((u0 - C64::new(1.0, 0.0)).norm() < 1e-12, "{u0}");
        assert_eq!(t.samples.len(), 10_001);
    }
    let p1 = dominant_period(&tr[0].samples).unwrap();
    let p4 = dominant_period(&tr[1].samples).unwrap();
    let ratio = p1 / p4;
    assert!((12.0..=20.0).contains(&ratio), "periods {p1} {p4}");
}

#[test]
fn zero_data_give_a_zero_trace_and_files_are_written() {
    let mut spec = short_traces(vec![0.5]);
    spec.base.initial = InitialData::Tabulated { phi1: vec![C64::new(0.0, 0.0); 64], phi2: vec![C64::new(0.0, 0.0); 64] };
    spec.base.t_final = 0.5;
    spec.snapshot_stride = 100;
    let tr = compute_traces(&spec, &RustFftFactory::default()).unwrap();
    assert!(tr[0].samples.iter().all(|(_, u)| *u == C64::new(0.0, 0.0)));
    assert_eq!(tr[0].snapshots.len(), 6);
    let dir = tempfile::tempdir().unwrap();
    let files = write_traces(&tr, dir.path()).unwrap();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["trace_eps0.5.csv", "snapshots_eps0.5.csv", "plot_traces.gp"]);
    let csv = std::fs::read_to_string(&files[0]).unwrap();
    assert!(csv.starts_with("t,re_u,im_u\n0,0,0\n"));
    let gp = std::fs::read_to_string(&files[2]).unwrap();
    assert!(gp.contains("trace_eps0.5.csv"));
}
