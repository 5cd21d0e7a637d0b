//! Convergence sweeps over (ε, resolution) against stored references.

use mtifp_core::fft::TransformFactory;
use mtifp_core::solver::propagate;
use mtifp_core::spectral::h2_error;
use rayon::prelude::*;

use crate::config::SweepSpec;
use crate::report::{ConvergenceReport, Row};
use crate::store::{Reference, ReferenceStore, StoreError};

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t.max(1));
    }
    Ok(b.build()?.install(f))
}

/// Fetches or computes the reference of every ε of the sweep.
pub fn references<F>(spec: &SweepSpec, store: &ReferenceStore, factory: &F) -> Vec<Result<Reference, StoreError>>
where
    F: TransformFactory + Sync,
{
    spec.eps.par_iter().map(|&e| store.get_or_create(&spec.reference_config(e), factory)).collect()
}

/// Errors of every cell. A failed cell or reference is recorded as `NaN`
/// with a `failed` metadata line; the other cells still run.
pub fn run_sweep<F>(spec: &SweepSpec, store: &ReferenceStore, factory: &F) -> ConvergenceReport
where
    F: TransformFactory + Sync,
{
    let refs = references(spec, store, factory);
    let jobs: Vec<(usize, usize)> =
        (0..spec.eps.len()).flat_map(|i| (0..spec.resolutions.len()).map(move |k| (i, k))).collect();
    let results: Vec<Result<f64, String>> = jobs
        .par_iter()
        .map(|&(i, k)| {
            let reference = refs[i].as_ref().map_err(|e| format!("reference: {e}"))?;
            let c = spec.run_config(spec.eps[i], spec.resolutions[k]).map_err(|e| e.to_string())?;
            let s = propagate(&c, factory, &mut []).map_err(|e| e.to_string())?;
            h2_error(&s.u, &reference.state.u).map_err(|e| e.to_string())
        })
        .collect();

    let mut metadata = spec.metadata();
    for (i, r) in refs.iter().enumerate() {
        if let Ok(r) = r {
            metadata.push((format!("reference_sha256_eps{}", spec.eps[i]), r.hash_hex()));
        }
    }
    let mut rows: Vec<Row> = spec.eps.iter().map(|&eps| Row { eps, errors: Vec::new() }).collect();
    for (&(i, k), r) in jobs.iter().zip(results) {
        let e = match r {
            Ok(e) => e,
            Err(msg) => {
                metadata.push(("failed".into(), format!("eps={} resolution={}: {msg}", spec.eps[i], spec.resolutions[k])));
                f64::NAN
            }
        };
        rows[i].errors.push(e);
    }
    ConvergenceReport { axis: spec.axis, resolutions: spec.resolutions.clone(), rows, metadata }
}
