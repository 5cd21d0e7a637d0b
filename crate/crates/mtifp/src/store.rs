//! On-disk store of fine-resolution reference solutions.
//!
//! One file per scenario. Layout, all little-endian:
//!
//! ```text
//! magic "MTIFPREF" | version u32 | convention u32 | initial u32 | phi2 u32
//! | filter u32 | dealias u32 | n u64 | steps u64 | a b eps tau T lambda (f64)
//! | ũ (n × re,im f64) | ũ̇ (n × re,im f64) | sha256 of everything before
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use mtifp_core::fft::TransformFactory;
use mtifp_core::mdf::Filter;
use mtifp_core::solver::{propagate, InitialData, Phi2Convention, SolverConfig, SolverState};
use mtifp_core::spectral::FieldHat;
use mtifp_core::C64;
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 8] = b"MTIFPREF";
pub const VERSION: u32 = 1;
/// Forward transform scaled by 1/N, basis `e^{iμ_l(x-a)}`, FFT slot order.
pub const CONVENTION: u32 = 1;
/// Overrides the store directory.
pub const ENV_DIR: &str = "MTIFP_REFERENCE_DIR";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("reference store I/O at {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt reference file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("reference scenario cannot be stored: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Solver(#[from] mtifp_core::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub config: SolverConfig,
    pub state: SolverState,
    pub hash: [u8; 32],
}

impl Reference {
    pub fn hash_hex(&self) -> String {
        self.hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn initial_tag(i: &InitialData) -> Result<u32, StoreError> {
    match i {
        InitialData::ComplexGaussian => Ok(0),
        InitialData::RealGaussian => Ok(1),
        InitialData::Tabulated { .. } => Err(StoreError::Unsupported("tabulated initial data")),
    }
}

/// File name of a scenario: `ref_eps<ε>_N<n>.bin` for the standard table
/// reference, with a header digest appended for anything else.
pub fn key(c: &SolverConfig) -> Result<String, StoreError> {
    let standard = mtifp_core::oracle::reference_config(c.eps);
    let base = format!("ref_eps{}_N{}", c.eps, c.n);
    if (SolverConfig { n: c.n, ..standard }) == *c {
        return Ok(format!("{base}.bin"));
    }
    let digest = Sha256::digest(header(c, 0)?);
    let tag: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    Ok(format!("{base}_{tag}.bin"))
}

fn header(c: &SolverConfig, steps: u64) -> Result<Vec<u8>, StoreError> {
    let mut h = Vec::with_capacity(96);
    h.extend_from_slice(MAGIC);
    for v in [
        VERSION,
        CONVENTION,
        initial_tag(&c.initial)?,
        match c.phi2 {
            Phi2Convention::EpsIndependent => 0,
            Phi2Convention::PaperSection5Literal => 1,
        },
        match c.filter {
            Filter::Sin => 0,
            Filter::Unfiltered => 1,
        },
        c.dealias as u32,
    ] {
        h.extend_from_slice(&v.to_le_bytes());
    }
    h.extend_from_slice(&(c.n as u64).to_le_bytes());
    h.extend_from_slice(&steps.to_le_bytes());
    for v in [c.a, c.b, c.eps, c.tau, c.t_final, c.lambda] {
        h.extend_from_slice(&v.to_le_bytes());
    }
    Ok(h)
}

pub fn encode(c: &SolverConfig, state: &SolverState) -> Result<Vec<u8>, StoreError> {
    let mut out = header(c, state.step_index)?;
    for f in [&state.u, &state.u_dot] {
        for z in f.slots() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const K: usize>(&mut self) -> Option<[u8; K]> {
        let s = self.buf.get(self.at..self.at + K)?;
        self.at += K;
        s.try_into().ok()
    }
    fn u32(&mut self) -> Option<u32> {
        self.take().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> Option<u64> {
        self.take().map(u64::from_le_bytes)
    }
    fn f64(&mut self) -> Option<f64> {
        self.take().map(f64::from_le_bytes)
    }
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Reference, StoreError> {
    let corrupt = |reason: &str| StoreError::Corrupt { path: path.to_owned(), reason: reason.to_owned() };
    if bytes.len() < 32 + MAGIC.len() {
        return Err(corrupt("truncated"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != trailer {
        return Err(corrupt("content hash mismatch"));
    }
    let mut r = Reader { buf: body, at: 0 };
    if r.take::<8>().as_ref() != Some(MAGIC) {
        return Err(corrupt("bad magic"));
    }
    let short = || corrupt("truncated header");
    let version = r.u32().ok_or_else(short)?;
    if version != VERSION {
        return Err(corrupt("unsupported format version"));
    }
    if r.u32().ok_or_else(short)? != CONVENTION {
        return Err(corrupt("unknown transform convention"));
    }
    let initial = match r.u32().ok_or_else(short)? {
        0 => InitialData::ComplexGaussian,
        1 => InitialData::RealGaussian,
        _ => return Err(corrupt("unknown initial data tag")),
    };
    let phi2 = match r.u32().ok_or_else(short)? {
        0 => Phi2Convention::EpsIndependent,
        1 => Phi2Convention::PaperSection5Literal,
        _ => return Err(corrupt("unknown phi2 tag")),
    };
    let filter = match r.u32().ok_or_else(short)? {
        0 => Filter::Sin,
        1 => Filter::Unfiltered,
        _ => return Err(corrupt("unknown filter tag")),
    };
    let dealias = r.u32().ok_or_else(short)? != 0;
    let n = r.u64().ok_or_else(short)? as usize;
    let steps = r.u64().ok_or_else(short)?;
    let mut v = [0.0; 6];
    for x in v.iter_mut() {
        *x = r.f64().ok_or_else(short)?;
    }
    let [a, b, eps, tau, t_final, lambda] = v;
    let config = SolverConfig { a, b, n, eps, tau, t_final, lambda, initial, phi2, filter, dealias, real_fast_path: false };
    if body.len() != r.at + 32 * n {
        return Err(corrupt("payload length does not match the grid"));
    }
    let grid = config.grid()?;
    let mut field = || -> Result<FieldHat, StoreError> {
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            let re = r.f64().ok_or_else(short)?;
            let im = r.f64().ok_or_else(short)?;
            z.push(C64::new(re, im));
        }
        Ok(FieldHat::from_slots(grid, z)?)
    };
    let u = field()?;
    let u_dot = field()?;
    let mut hash = [0u8; 32];
    hash.copy_from_slice(trailer);
    Ok(Reference { config, state: SolverState { u, u_dot, step_index: steps, tau }, hash })
}

/// A directory of reference files. Concurrent requests for one key compute
/// it once; files are written under a temporary name and renamed.
pub struct ReferenceStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl ReferenceStore {
    pub fn new(dir: impl Into<PathBuf>) -> ReferenceStore {
        ReferenceStore { dir: dir.into(), locks: Mutex::new(HashMap::new()) }
    }

    /// `$MTIFP_REFERENCE_DIR` if set, `fallback` otherwise.
    pub fn from_env(fallback: impl Into<PathBuf>) -> ReferenceStore {
        match std::env::var_os(ENV_DIR) {
            Some(d) if !d.is_empty() => ReferenceStore::new(d),
            _ => ReferenceStore::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, c: &SolverConfig) -> Result<PathBuf, StoreError> {
        Ok(self.dir.join(key(c)?))
    }

    pub fn load(&self, c: &SolverConfig) -> Result<Option<Reference>, StoreError> {
        let path = self.path(c)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(source) => return Err(StoreError::Io { path, source }),
        };
        let r = decode(&bytes, &path)?;
        if r.config != (SolverConfig { real_fast_path: false, ..c.clone() }) {
            return Err(StoreError::Corrupt { path, reason: "header does not match the scenario".into() });
        }
        Ok(Some(r))
    }

    pub fn save(&self, c: &SolverConfig, state: &SolverState) -> Result<PathBuf, StoreError> {
        let path = self.path(c)?;
        let io = |source| StoreError::Io { path: path.clone(), source };
        fs::create_dir_all(&self.dir).map_err(io)?;
        let bytes = encode(c, state)?;
        let tmp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            key(c)?,
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, &bytes).map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)?;
        Ok(path)
    }

    /// Loads the scenario, running and storing it first if absent.
    pub fn get_or_create<F: TransformFactory>(&self, c: &SolverConfig, factory: &F) -> Result<Reference, StoreError> {
        let k = key(c)?;
        let lock = self.locks.lock().expect("store lock poisoned").entry(k).or_default().clone();
        let _guard = lock.lock().expect("scenario lock poisoned");
        if let Some(r) = self.load(c)? {
            return Ok(r);
        }
        let state = propagate(c, factory, &mut [])?;
        self.save(c, &state)?;
        self.load(c)?.ok_or(StoreError::Unsupported("reference vanished after writing"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::RustFftFactory;

    fn small() -> SolverConfig {
        SolverConfig { n: 32, eps: 0.5, tau: 0.05, t_final: 0.2, ..SolverConfig::default() }
    }

    #[test]
    fn keys() {
        let std_ref = mtifp_core::oracle::reference_config(0.5);
        assert_eq!(key(&std_ref).unwrap(), "ref_eps0.5_N1024.bin");
        let k = key(&small()).unwrap();
        assert!(k.starts_with("ref_eps0.5_N32_") && k.ends_with(".bin"));
        assert_ne!(k, key(&SolverConfig { lambda: -1.0, ..small() }).unwrap());
    }

    #[test]
    fn round_trip_is_bit_exact_and_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let store = ReferenceStore::new(dir.path());
        let f = RustFftFactory::default();
        let a = store.get_or_create(&small(), &f).unwrap();
        let bytes = fs::read(store.path(&small()).unwrap()).unwrap();
        let b = store.get_or_create(&small(), &f).unwrap();
        assert_eq!(a, b);
        assert_eq!(bytes, fs::read(store.path(&small()).unwrap()).unwrap());
        assert_eq!(encode(&a.config, &a.state).unwrap(), bytes);
        assert_eq!(a.state.step_index, 4);
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let store = ReferenceStore::new(dir.path());
        store.get_or_create(&small(), &RustFftFactory::default()).unwrap();
        let path = store.path(&small()).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[200] ^= 1;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(store.load(&small()), Err(StoreError::Corrupt { .. })));
        assert!(decode(&bytes[..20], &path).is_err());
    }
}
