//! Time series `u(x₀, t)` for a list of ε, with optional nodal snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mtifp_core::fft::{Transform, TransformFactory};
use mtifp_core::solver::{propagate, Observer, PointTrace, SolverConfig, SolverState};
use mtifp_core::C64;

use crate::config::TraceSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub eps: f64,
    pub x: f64,
    /// `(t, u(x, t))` at every step.
    pub samples: Vec<(f64, C64)>,
    /// `(t, nodal u)` every `snapshot_stride` steps.
    pub snapshots: Vec<(f64, Vec<C64>)>,
    pub grid_nodes: Vec<f64>,
}

struct Snapshots<P> {
    plan: P,
    stride: u64,
    out: Vec<(f64, Vec<C64>)>,
}

impl<P: Transform> Observer for Snapshots<P> {
    fn stride(&self) -> u64 {
        self.stride
    }
    fn observe(&mut self, state: &SolverState) {
        let mut v = state.u.slots().to_vec();
        self.plan.inverse(&mut v);
        self.out.push((state.time(), v));
    }
}

pub fn compute_traces<F: TransformFactory>(spec: &TraceSpec, factory: &F) -> anyhow::Result<Vec<Trace>> {
    let mut out = Vec::new();
    for &eps in &spec.eps {
        let c = SolverConfig { eps, ..spec.base.clone() };
        let mut trace = PointTrace::new(spec.x, 1);
        let mut snaps = Snapshots { plan: factory.plan(c.n), stride: spec.snapshot_stride.max(1), out: Vec::new() };
        if spec.snapshot_stride > 0 {
            propagate(&c, factory, &mut [&mut trace, &mut snaps])?;
        } else {
            propagate(&c, factory, &mut [&mut trace])?;
        }
        out.push(Trace {
            eps,
            x: spec.x,
            samples: trace.samples,
            snapshots: snaps.out,
            grid_nodes: c.grid()?.nodes(),
        });
    }
    Ok(out)
}

/// Period estimate from the sign changes of `Re u` about its mean.
pub fn dominant_period(samples: &[(f64, C64)]) -> Option<f64> {
    if samples.len() < 3 {
        return None;
    }
    let mean = samples.iter().map(|s| s.1.re).sum::<f64>() / samples.len() as f64;
    let crossings: Vec<f64> = samples
        .windows(2)
        .filter(|w| (w[0].1.re - mean) * (w[1].1.re - mean) < 0.0)
        .map(|w| w[0].0)
        .collect();
    if crossings.len() < 3 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(2.0 * span / (crossings.len() - 1) as f64)
}

fn file_stem(eps: f64) -> String {
    format!("trace_eps{eps}")
}

/// Writes `trace_eps<ε>.csv` (t, Re u, Im u), snapshot files when
/// recorded and a gnuplot script `plot_traces.gp`.
pub fn write_traces(traces: &[Trace], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in traces {
        let mut s = String::from("t,re_u,im_u\n");
        for (time, u) in &t.samples {
            let _ = writeln!(s, "{time},{},{}", u.re, u.im);
        }
        let p = dir.join(format!("{}.csv", file_stem(t.eps)));
        fs::write(&p, s)?;
        written.push(p);
        if !t.snapshots.is_empty() {
            let mut s = String::from("t,x,re_u,im_u\n");
            for (time, u) in &t.snapshots {
                for (x, v) in t.grid_nodes.iter().zip(u) {
                    let _ = writeln!(s, "{time},{x},{},{}", v.re, v.im);
                }
            }
            let p = dir.join(format!("snapshots_eps{}.csv", t.eps));
            fs::write(&p, s)?;
            written.push(p);
        }
    }
    let mut gp = String::from(
        "# gnuplot -p plot_traces.gp\nset datafile separator ','\nset key outside\nset xlabel 't'\n",
    );
    if let Some(t) = traces.first() {
        let _ = writeln!(gp, "set ylabel 'Re u({}, t)'", t.x);
    }
    let _ = writeln!(gp, "set multiplot layout {},1", traces.len().max(1));
    for t in traces {
        let _ = writeln!(gp, "plot '{}.csv' using 1:2 every ::1 with lines title 'eps = {}'", file_stem(t.eps), t.eps);
    }
    gp.push_str("unset multiplot\n");
    let p = dir.join("plot_traces.gp");
    fs::write(&p, gp)?;
    written.push(p);
    Ok(written)
}
