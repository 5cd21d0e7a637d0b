//! Run configuration: TOML files, named presets and command-line overrides.
//!
//! ```toml
//! preset = "table2-lite"      # optional starting point
//!
//! [solver]                    # any SolverConfig field, kebab-case
//! lambda = -1.0
//! initial = "complex-gaussian"
//!
//! [sweep]
//! axis = "temporal"
//! eps = [0.5, 0.0625]
//! tau = [0.2, 0.05, 0.0125]   # one entry for a spatial sweep
//! h = [0.125]                 # one entry for a temporal sweep
//! reference-n = 1024
//! reference-tau = 5e-6
//!
//! [traces]
//! eps = [1.0, 0.25]
//! ```

use std::path::Path;

use mtifp_core::mdf::Filter;
use mtifp_core::solver::{InitialData, Phi2Convention, SolverConfig};
use serde::Deserialize;

use crate::report::Axis;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid { key: key.to_owned(), reason: reason.to_string() }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub preset: Option<String>,
    #[serde(default)]
    pub solver: SolverSection,
    pub sweep: Option<SweepSection>,
    pub traces: Option<TraceSection>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolverSection {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub tau: Option<f64>,
    pub t_final: Option<f64>,
    pub lambda: Option<f64>,
    pub initial: Option<InitialName>,
    pub phi2_convention: Option<Phi2Name>,
    pub real_fast_path: Option<bool>,
    pub filter: Option<FilterName>,
    pub dealias: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialName {
    ComplexGaussian,
    RealGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phi2Name {
    EpsIndependent,
    PaperSection5Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterName {
    Sin,
    Unfiltered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisName {
    Spatial,
    Temporal,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepSection {
    pub axis: Option<AxisName>,
    pub eps: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
    pub reference_n: Option<usize>,
    pub reference_tau: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TraceSection {
    pub eps: Option<Vec<f64>>,
    pub x: Option<f64>,
    pub snapshot_stride: Option<u64>,
}

impl SolverSection {
    pub fn apply(&self, c: &mut SolverConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(a, b, n, eps, tau, t_final, lambda, real_fast_path, dealias);
        if let Some(i) = self.initial {
            c.initial = match i {
                InitialName::ComplexGaussian => InitialData::ComplexGaussian,
                InitialName::RealGaussian => InitialData::RealGaussian,
            };
        }
        if let Some(p) = self.phi2_convention {
            c.phi2 = match p {
                Phi2Name::EpsIndependent => Phi2Convention::EpsIndependent,
                Phi2Name::PaperSection5Literal => Phi2Convention::PaperSection5Literal,
            };
        }
        if let Some(f) = self.filter {
            c.filter = match f {
                FilterName::Sin => Filter::Sin,
                FilterName::Unfiltered => Filter::Unfiltered,
            };
        }
    }
}

/// `0.5/2^k` for `k ∈ {0,1,2,3,4,5,7,9,11,13}`: the rows of both tables.
pub fn table_eps() -> Vec<f64> {
    [0, 1, 2, 3, 4, 5, 7, 9, 11, 13].iter().map(|&k| 0.5 / f64::powi(2.0, k)).collect()
}

/// A convergence sweep: one run per (ε, column), each compared against a
/// stored fine reference at the same ε.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub axis: Axis,
    pub eps: Vec<f64>,
    /// Column resolutions: `h` for spatial sweeps, `τ` for temporal ones.
    pub resolutions: Vec<f64>,
    /// The other resolution, shared by every run.
    pub fixed: f64,
    pub reference_n: usize,
    pub reference_tau: f64,
    /// Interval, `T`, `λ`, data and scheme options of every run.
    pub base: SolverConfig,
}

/// Fig.-1 style traces at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSpec {
    pub eps: Vec<f64>,
    pub x: f64,
    /// Record nodal snapshots every this many steps; 0 disables them.
    pub snapshot_stride: u64,
    pub base: SolverConfig,
}

impl Default for TraceSpec {
    fn default() -> Self {
        TraceSpec {
            eps: vec![1.0, 0.5, 0.25, 0.125],
            x: 0.0,
            snapshot_stride: 0,
            base: SolverConfig {
                n: 256,
                tau: 1e-3,
                t_final: 10.0,
                initial: InitialData::RealGaussian,
                real_fast_path: true,
                ..SolverConfig::default()
            },
        }
    }
}

pub const PRESETS: [&str; 4] = ["table1", "table2", "table1-lite", "table2-lite"];

pub fn preset(name: &str) -> Option<SweepSpec> {
    let base = SolverConfig::default();
    let h = vec![1.0, 0.5, 0.25, 0.125];
    let taus = |k: i32| (0..=k).map(|j| 0.2 / f64::powi(4.0, j)).collect::<Vec<_>>();
    let spec = |name: &str, axis, eps, resolutions, fixed, reference_tau| SweepSpec {
        name: name.to_owned(),
        axis,
        eps,
        resolutions,
        fixed,
        reference_n: 1024,
        reference_tau,
        base: base.clone(),
    };
    Some(match name {
        "table1" => spec(name, Axis::Spatial, table_eps(), h, 5e-6, 5e-6),
        "table1-lite" => spec(name, Axis::Spatial, vec![0.5, 0.5 / 512.0], h, 1e-5, 1e-5),
        "table2" => spec(name, Axis::Temporal, table_eps(), taus(6), 0.125, 5e-6),
        "table2-lite" => {
            spec(name, Axis::Temporal, vec![0.5, 0.5 / 8.0, 0.5 / 32.0, 0.5 / 8192.0], taus(5), 0.125, 5e-6)
        }
        _ => return None,
    })
}

fn nodes_for(c: &SolverConfig, h: f64) -> Result<usize, ConfigError> {
    let m = (c.b - c.a) / h;
    let n = m.round();
    if !(h > 0.0) || (m - n).abs() > 1e-9 * m || n < 4.0 || n as usize % 2 != 0 {
        return Err(invalid("sweep.h", format!("h = {h} does not give an even node count on ({}, {})", c.a, c.b)));
    }
    Ok(n as usize)
}

impl SweepSpec {
    pub fn run_config(&self, eps: f64, resolution: f64) -> Result<SolverConfig, ConfigError> {
        let (h, tau) = match self.axis {
            Axis::Spatial => (resolution, self.fixed),
            Axis::Temporal => (self.fixed, resolution),
        };
        Ok(SolverConfig { n: nodes_for(&self.base, h)?, eps, tau, real_fast_path: false, ..self.base.clone() })
    }

    pub fn reference_config(&self, eps: f64) -> SolverConfig {
        SolverConfig { n: self.reference_n, eps, tau: self.reference_tau, real_fast_path: false, ..self.base.clone() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.eps.is_empty() || self.resolutions.is_empty() {
            return Err(invalid("sweep", "needs at least one eps and one resolution"));
        }
        if let InitialData::Tabulated { .. } = self.base.initial {
            return Err(invalid("solver.initial", "sweeps need built-in initial data"));
        }
        for &e in &self.eps {
            let r = self.reference_config(e);
            r.validate().map_err(|err| invalid("sweep.reference", err))?;
            for &res in &self.resolutions {
                let c = self.run_config(e, res)?;
                c.validate().map_err(|err| invalid(self.key(), err))?;
                if self.reference_n % c.n != 0 {
                    return Err(invalid("sweep.h", format!("N = {} does not divide reference N = {}", c.n, self.reference_n)));
                }
            }
        }
        Ok(())
    }

    fn key(&self) -> &'static str {
        match self.axis {
            Axis::Spatial => "sweep.h",
            Axis::Temporal => "sweep.tau",
        }
    }

    /// Every effective setting, for report metadata.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let b = &self.base;
        let mut m: Vec<(String, String)> = vec![
            ("scenario".into(), self.name.clone()),
            ("interval".into(), format!("[{} {}]", b.a, b.b)),
            ("t_final".into(), b.t_final.to_string()),
            ("lambda".into(), b.lambda.to_string()),
            ("initial".into(), format!("{:?}", b.initial)),
            ("phi2_convention".into(), format!("{:?}", b.phi2)),
            ("filter".into(), format!("{:?}", b.filter)),
            ("dealias".into(), b.dealias.to_string()),
        ];
        let fixed = match self.axis {
            Axis::Spatial => "tau",
            Axis::Temporal => "h",
        };
        m.push((fixed.into(), self.fixed.to_string()));
        m.push(("reference".into(), format!("N={} tau={} same scheme", self.reference_n, self.reference_tau)));
        m.push(("norm".into(), "H2 of the interpolant on (a b): sqrt(b-a) * sqrt(sum (1+mu^2+mu^4)|u_l|^2), reference sampled at the run's nodes".into()));
        m.push(("version".into(), format!("mtifp {}", env!("CARGO_PKG_VERSION"))));
        m
    }
}

/// Command-line overrides, applied after the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub eps: Option<f64>,
    pub tau: Option<f64>,
    pub grid_n: Option<usize>,
    pub t_final: Option<f64>,
    pub lambda: Option<f64>,
    pub preset: Option<String>,
}

/// Everything a command may need, fully validated where it applies.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub solver: SolverConfig,
    pub sweep: Option<SweepSpec>,
    pub traces: TraceSpec,
}

pub fn parse_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<FileConfig, ConfigError> {
    Ok(toml::from_str(text)?)
}

/// Resolves presets, file sections and overrides. `default_preset` names
/// the sweep used when neither the file nor the overrides pick one.
pub fn resolve(file: &FileConfig, o: &Overrides, default_preset: Option<&str>) -> Result<Loaded, ConfigError> {
    let mut solver = SolverConfig::default();
    file.solver.apply(&mut solver);
    let cli = SolverSection {
        eps: o.eps,
        tau: o.tau,
        n: o.grid_n,
        t_final: o.t_final,
        lambda: o.lambda,
        ..SolverSection::default()
    };
    cli.apply(&mut solver);

    let preset_name = o.preset.as_deref().or(file.preset.as_deref());
    let mut sweep = match preset_name.or(if file.sweep.is_some() { None } else { default_preset }) {
        Some(p) => Some(preset(p).ok_or_else(|| invalid("preset", format!("unknown preset {p:?}; known: {PRESETS:?}")))?),
        None => None,
    };
    if let Some(s) = &file.sweep {
        let mut spec = sweep.take().unwrap_or_else(|| preset("table2-lite").expect("built-in preset"));
        spec.name = preset_name.unwrap_or("custom").to_owned();
        if let Some(a) = s.axis {
            spec.axis = match a {
                AxisName::Spatial => Axis::Spatial,
                AxisName::Temporal => Axis::Temporal,
            };
        }
        if let Some(e) = &s.eps {
            spec.eps = e.clone();
        }
        let (cols, fixed, fixed_key) = match spec.axis {
            Axis::Spatial => (&s.h, &s.tau, "sweep.tau"),
            Axis::Temporal => (&s.tau, &s.h, "sweep.h"),
        };
        if let Some(c) = cols {
            spec.resolutions = c.clone();
        }
        if let Some(f) = fixed {
            match f.as_slice() {
                [v] => spec.fixed = *v,
                _ => return Err(invalid(fixed_key, "needs exactly one value on this axis")),
            }
        }
        if let Some(n) = s.reference_n {
            spec.reference_n = n;
        }
        if let Some(t) = s.reference_tau {
            spec.reference_tau = t;
        }
        sweep = Some(spec);
    }
    if let Some(spec) = &mut sweep {
        // solver-section settings that describe the scenario carry over
        file.solver.apply(&mut spec.base);
        spec.base.lambda = o.lambda.unwrap_or(spec.base.lambda);
        spec.base.t_final = o.t_final.unwrap_or(spec.base.t_final);
        if let Some(e) = o.eps {
            spec.eps = vec![e];
        }
        match spec.axis {
            Axis::Spatial => spec.fixed = o.tau.unwrap_or(spec.fixed),
            Axis::Temporal => {
                if let Some(n) = o.grid_n {
                    spec.fixed = (spec.base.b - spec.base.a) / n as f64;
                }
            }
        }
        spec.validate()?;
    }

    let mut traces = TraceSpec::default();
    file.solver.apply(&mut traces.base);
    cli.apply(&mut traces.base);
    if let Some(t) = &file.traces {
        if let Some(e) = &t.eps {
            traces.eps = e.clone();
        }
        if let Some(x) = t.x {
            traces.x = x;
        }
        if let Some(s) = t.snapshot_stride {
            traces.snapshot_stride = s;
        }
    }
    if let Some(e) = o.eps {
        traces.eps = vec![e];
    }
    solver.validate().map_err(|e| invalid("solver", e))?;
    Ok(Loaded { solver, sweep, traces })
}

/// Reads, resolves and validates a configuration file.
pub fn load_config(path: &Path, o: &Overrides, default_preset: Option<&str>) -> Result<Loaded, ConfigError> {
    resolve(&parse_file(path)?, o, default_preset)
}
