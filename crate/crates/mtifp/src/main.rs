use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mtifp::config::{self, Loaded, Overrides};
use mtifp::report::ConvergenceReport;
use mtifp::store::ReferenceStore;
use mtifp::sweep::{references, run_sweep, with_pool};
use mtifp::traces::{compute_traces, dominant_period, write_traces};
use mtifp::RustFftFactory;
use mtifp_core::coeffs::mode_frequencies;
use mtifp_core::fft::TransformFactory;
use mtifp_core::quadrature::{closed_form_discrepancy, QuadratureOptions};
use mtifp_core::solver::{energy, init, run, Stepper};
use mtifp_core::spectral::{h2_norm_continuous, Fourier, SpectralGrid};

#[derive(Parser)]
#[command(version, about = "MTI-FP solver and convergence studies for the Klein-Gordon equation")]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sweep preset: table1, table2, table1-lite, table2-lite
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Number of grid nodes
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    #[arg(long, global = true)]
    t_final: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configuration to T and write the final state
    Solve,
    /// Spatial convergence table (default preset table1-lite)
    SweepSpatial,
    /// Temporal convergence table (default preset table2-lite)
    SweepTemporal,
    /// u(x0, t) time series for a list of eps
    Traces,
    /// Compute and store the fine references of a sweep
    MakeReference,
    /// Compare closed-form step coefficients with the quadrature oracle
    CheckCoeffs {
        /// Largest mode index |l| to check
        #[arg(long, default_value_t = 32)]
        modes: i64,
    },
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            eps: self.eps,
            tau: self.tau,
            grid_n: self.grid_n,
            t_final: self.t_final,
            lambda: self.lambda,
            preset: self.preset.clone(),
        }
    }

    fn load(&self, default_preset: Option<&str>) -> Result<Loaded> {
        let o = self.overrides();
        let loaded = match &self.config {
            Some(p) => config::load_config(p, &o, default_preset),
            None => config::resolve(&config::FileConfig::default(), &o, default_preset),
        };
        let loaded = loaded.context("invalid configuration")?;
        Ok(loaded)
    }
}

fn store() -> ReferenceStore {
    ReferenceStore::from_env("references")
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_report(r: &ConvergenceReport) {
    print!("{:>12}", "eps \\ res");
    for x in &r.resolutions {
        print!("{x:>12.4e}");
    }
    println!();
    let line = |label: String, errs: &[f64], rates: &[Option<f64>]| {
        print!("{label:>12}");
        for e in errs {
            print!("{e:>12.3e}");
        }
        println!();
        print!("{:>12}", "rate");
        for q in rates {
            match q {
                Some(q) => print!("{q:>12.2}"),
                None => print!("{:>12}", "-"),
            }
        }
        println!();
    };
    for row in &r.rows {
        line(format!("{:.4e}", row.eps), &row.errors, &r.row_rates(row));
    }
    line("max".into(), &r.uniform_row(), &r.uniform_rates());
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let factory = RustFftFactory::default();
    match &cli.command {
        Command::Solve => {
            let c = cli.load(None)?.solver;
            let mut stepper = Stepper::new(&c, factory.plan(c.n))?;
            let t0 = Instant::now();
            let s = run(&mut stepper, &c, &mut [])?;
            let elapsed = t0.elapsed();
            let mut f = Fourier::new(c.grid()?, factory.plan(c.n))?;
            let s0 = init(&c, &mut f)?;
            let e0 = energy(&mut f, &s0, c.eps, &c.params())?;
            let e1 = energy(&mut f, &s, c.eps, &c.params())?;
            let u = f.from_spectral(&s.u)?;
            let mut text = String::from("x,re_u,im_u\n");
            for (x, v) in c.grid()?.nodes().iter().zip(&u) {
                text.push_str(&format!("{x},{},{}\n", v.re, v.im));
            }
            let path = cli.out.join(format!("solution_eps{}_N{}.csv", c.eps, c.n));
            write(&path, &text)?;
            println!("eps {} N {} tau {} T {}: {} steps in {:.2?}", c.eps, c.n, c.tau, c.t_final, s.step_index, elapsed);
            println!("H2 norm of u(T) {:.6e}", h2_norm_continuous(&s.u)?);
            println!("energy {:.12e} -> {:.12e} (relative drift {:.3e})", e0, e1, (e1 - e0).abs() / e0);
            println!("wrote {}", path.display());
        }
        Command::SweepSpatial | Command::SweepTemporal => {
            let spatial = matches!(cli.command, Command::SweepSpatial);
            let default = if spatial { "table1-lite" } else { "table2-lite" };
            let spec = cli.load(Some(default))?.sweep.expect("a sweep is always resolved here");
            let want = if spatial { mtifp::report::Axis::Spatial } else { mtifp::report::Axis::Temporal };
            if spec.axis != want {
                bail!("preset/config {:?} describes a {} sweep", spec.name, spec.axis.name());
            }
            let store = store();
            eprintln!("references in {}", store.dir().display());
            let report = with_pool(cli.threads, || run_sweep(&spec, &store, &factory))?;
            let path = cli.out.join(format!("{}_{}.csv", spec.name, spec.axis.name()));
            write(&path, &report.to_csv())?;
            print_report(&report);
            println!("wrote {}", path.display());
            if let Some(f) = report.meta("failed") {
                bail!("some cells failed, first: {f}");
            }
        }
        Command::Traces => {
            let spec = cli.load(None)?.traces;
            let traces = compute_traces(&spec, &factory)?;
            for t in &traces {
                match dominant_period(&t.samples) {
                    Some(p) => println!("eps {}: dominant period {p:.4e}", t.eps),
                    None => println!("eps {}: too few oscillations to estimate a period", t.eps),
                }
            }
            for p in write_traces(&traces, &cli.out)? {
                println!("wrote {}", p.display());
            }
        }
        Command::MakeReference => {
            let spec = cli.load(Some("table2"))?.sweep.expect("a sweep is always resolved here");
            let store = store();
            let refs = with_pool(cli.threads, || references(&spec, &store, &factory))?;
            for (e, r) in spec.eps.iter().zip(refs) {
                let r = r?;
                println!("eps {e}: {} sha256 {}", store.path(&r.config)?.display(), r.hash_hex());
            }
        }
        Command::CheckCoeffs { modes } => {
            let eps_list = match cli.eps {
                Some(e) => vec![e],
                None => vec![1.0, 0.5, 0.1, 0.01, 1e-4],
            };
            let tau_list = match cli.tau {
                Some(t) => vec![t],
                None => vec![0.2, 1e-2, 1e-4],
            };
            let g = SpectralGrid::new(-16.0, 16.0, 2 * (*modes as usize).max(2))?;
            let opts = QuadratureOptions::default();
            let mut worst = (0.0, String::new());
            for &eps in &eps_list {
                for &tau in &tau_list {
                    for l in 0..=*modes {
                        let f = mode_frequencies(eps, g.mu(l))?;
                        let (which, score) = closed_form_discrepancy(&f, tau, 1e-10, 1e-14, &opts)?;
                        if !(score <= worst.0) {
                            worst = (score, format!("eps {eps} tau {tau} l {l} coefficient {}", which.name()));
                        }
                    }
                }
            }
            println!("worst discrepancy {:.3} of the tolerance 1e-10 rel / 1e-14 abs, at {}", worst.0, worst.1);
            if !(worst.0 <= 1.0) {
                bail!("closed forms disagree with the quadrature oracle");
            }
        }
    }
    Ok(())
}
