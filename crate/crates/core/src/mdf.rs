//! Multiscale decomposition by frequency: the well-prepared local data
//! `(z±, ż±, r = 0, ṙ)` built from `(uⁿ, u̇ⁿ)` at the start of a step, and
//! the reconstruction of `(u, u̇)` from the advanced local unknowns.
//!
//! With `E = e^{is/ε²}`:
//!
//! ```text
//! u = E z₊ + conj(E) conj(z₋) + r
//! u̇ = E (ż₊ + i z₊/ε²) + conj(E) (conj(ż₋) - i conj(z₋)/ε²) + ṙ
//! ```

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fft::Transform;
use crate::math::{sin, C64, I};
use crate::nonlinearity::{carrier, f_pm, CubicParams};
use crate::spectral::{conj_field_slots, dealias_slots, FieldHat, Fourier, SpectralGrid};

/// Multiplier standing in for `μ²` in the local initial velocity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Filter {
    /// `(2/τ) sin(μ²τ/2)`, bounded by `2/τ`.
    #[default]
    Sin,
    /// Plain `μ²`; loses two orders of spatial accuracy. For ablation runs.
    Unfiltered,
}

/// `(2/τ) sin(μ²τ/2)`.
pub fn velocity_filter(mu: f64, tau: f64) -> f64 {
    2.0 / tau * sin(0.5 * mu * mu * tau)
}

impl Filter {
    pub fn multiplier(self, mu: f64, tau: f64) -> f64 {
        match self {
            Filter::Sin => velocity_filter(mu, tau),
            Filter::Unfiltered => mu * mu,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stage {
    /// Local time `s = 0`, right after [`decompose`].
    Initial,
    /// Advanced to local time `s = tau`.
    Advanced { tau: f64 },
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Initial => "initial",
            Stage::Advanced { .. } => "advanced",
        }
    }
}

/// Local unknowns of one step, all spectral on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionState {
    pub zp: FieldHat,
    pub zm: FieldHat,
    pub zp_dot: FieldHat,
    pub zm_dot: FieldHat,
    pub r: FieldHat,
    pub r_dot: FieldHat,
    pub eps: f64,
    pub stage: Stage,
}

/// Buffers for the decomposition inside a step. Spectral arrays carry a
/// `_hat` suffix, the others hold nodal values.
pub(crate) struct MdfWork {
    pub zp_hat: Vec<C64>,
    pub zm_hat: Vec<C64>,
    pub zp: Vec<C64>,
    pub zm: Vec<C64>,
    pub fp_hat: Vec<C64>,
    pub fm_hat: Vec<C64>,
    pub zpd_hat: Vec<C64>,
    pub zmd_hat: Vec<C64>,
    pub zpd: Vec<C64>,
    pub zmd: Vec<C64>,
    scratch: Vec<C64>,
    filter: Vec<f64>,
}

impl MdfWork {
    pub fn new(grid: &SpectralGrid, tau: f64, filter: Filter) -> MdfWork {
        let n = grid.n();
        let z = || vec![C64::new(0.0, 0.0); n];
        MdfWork {
            zp_hat: z(),
            zm_hat: z(),
            zp: z(),
            zm: z(),
            fp_hat: z(),
            fm_hat: z(),
            zpd_hat: z(),
            zmd_hat: z(),
            zpd: z(),
            zmd: z(),
            scratch: z(),
            filter: grid.mu_slots().iter().map(|&mu| filter.multiplier(mu, tau)).collect(),
        }
    }

    /// Fills every buffer from spectral `(u, u̇)`. With `real` set, the minus
    /// side is a copy of the plus side (z₊ = z₋ nodally for real `u`, `ε²u̇`).
    #[allow(clippy::too_many_arguments)]
    pub fn decompose<T: Transform>(
        &mut self,
        fourier: &mut Fourier<T>,
        u_hat: &[C64],
        u_dot_hat: &[C64],
        eps: f64,
        params: &CubicParams,
        real: bool,
        dealias: bool,
    ) {
        let e2 = eps * eps;
        let half_i = 0.5 * I;
        for k in 0..u_hat.len() {
            self.zp_hat[k] = 0.5 * u_hat[k] - half_i * e2 * u_dot_hat[k];
        }
        if real {
            self.zm_hat.copy_from_slice(&self.zp_hat);
        } else {
            conj_field_slots(u_hat, &mut self.zm_hat);
            conj_field_slots(u_dot_hat, &mut self.scratch);
            for k in 0..u_hat.len() {
                self.zm_hat[k] = 0.5 * self.zm_hat[k] - half_i * e2 * self.scratch[k];
            }
        }

        self.zp.copy_from_slice(&self.zp_hat);
        fourier.inverse_in_place(&mut self.zp);
        if real {
            self.zm.copy_from_slice(&self.zp);
        } else {
            self.zm.copy_from_slice(&self.zm_hat);
            fourier.inverse_in_place(&mut self.zm);
        }

        for j in 0..self.zp.len() {
            let (fp, fm) = f_pm(self.zp[j], self.zm[j], params);
            self.fp_hat[j] = fp;
            self.fm_hat[j] = fm;
        }
        fourier.forward_in_place(&mut self.fp_hat);
        if dealias {
            dealias_slots(fourier.grid(), &mut self.fp_hat);
        }
        if real {
            self.fm_hat.copy_from_slice(&self.fp_hat);
        } else {
            fourier.forward_in_place(&mut self.fm_hat);
            if dealias {
                dealias_slots(fourier.grid(), &mut self.fm_hat);
            }
        }

        for k in 0..u_hat.len() {
            self.zpd_hat[k] = half_i * (self.filter[k] * self.zp_hat[k] + self.fp_hat[k]);
        }
        self.zpd.copy_from_slice(&self.zpd_hat);
        fourier.inverse_in_place(&mut self.zpd);
        if real {
            self.zmd_hat.copy_from_slice(&self.zpd_hat);
            self.zmd.copy_from_slice(&self.zpd);
        } else {
            for k in 0..u_hat.len() {
                self.zmd_hat[k] = half_i * (self.filter[k] * self.zm_hat[k] + self.fm_hat[k]);
            }
            self.zmd.copy_from_slice(&self.zmd_hat);
            fourier.inverse_in_place(&mut self.zmd);
        }
    }

    /// `ṙ⁰ = -ż₊ - conj-field(ż₋)`.
    pub fn r_dot_initial(&self, out: &mut [C64]) {
        conj_field_slots(&self.zmd_hat, out);
        for (o, zp) in out.iter_mut().zip(&self.zpd_hat) {
            *o = -*zp - *o;
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::EpsOutOfRange(eps))
    }
}

/// Well-prepared local data at `s = 0` for the step of length `tau`.
pub fn decompose<T: Transform>(
    fourier: &mut Fourier<T>,
    u: &FieldHat,
    u_dot: &FieldHat,
    eps: f64,
    tau: f64,
    params: &CubicParams,
    filter: Filter,
) -> Result<DecompositionState> {
    check_eps(eps)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("tau must be positive"));
    }
    let grid = *fourier.grid();
    if *u.grid() != grid || *u_dot.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let mut w = MdfWork::new(&grid, tau, filter);
    w.decompose(fourier, u.slots(), u_dot.slots(), eps, params, false, false);
    let mut r_dot = vec![C64::new(0.0, 0.0); grid.n()];
    w.r_dot_initial(&mut r_dot);
    let wrap = |v: Vec<C64>| FieldHat::from_slots(grid, v);
    Ok(DecompositionState {
        zp: wrap(w.zp_hat)?,
        zm: wrap(w.zm_hat)?,
        zp_dot: wrap(w.zpd_hat)?,
        zm_dot: wrap(w.zmd_hat)?,
        r: FieldHat::zeros(grid),
        r_dot: wrap(r_dot)?,
        eps,
        stage: Stage::Initial,
    })
}

/// `(u, u̇)` at local time `tau`: `0` for a fresh decomposition, the step
/// length for an advanced one.
pub fn reconstruct(state: &DecompositionState, tau: f64) -> Result<(FieldHat, FieldHat)> {
    match state.stage {
        Stage::Initial if tau != 0.0 => {
            return Err(Error::StageMismatch { expected: "advanced", found: state.stage.name() })
        }
        Stage::Advanced { tau: t } if t != tau => {
            return Err(Error::InvalidParameter("state was advanced by a different step"))
        }
        _ => {}
    }
    let grid = *state.zp.grid();
    for f in [&state.zm, &state.zp_dot, &state.zm_dot, &state.r, &state.r_dot] {
        if *f.grid() != grid {
            return Err(Error::GridMismatch);
        }
    }
    let n = grid.n();
    let e = carrier(tau, state.eps);
    let iv = I / (state.eps * state.eps);
    let mut czm = vec![C64::new(0.0, 0.0); n];
    let mut czmd = vec![C64::new(0.0, 0.0); n];
    conj_field_slots(state.zm.slots(), &mut czm);
    conj_field_slots(state.zm_dot.slots(), &mut czmd);
    let (zp, zpd) = (state.zp.slots(), state.zp_dot.slots());
    let (r, rd) = (state.r.slots(), state.r_dot.slots());
    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut ud = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        u[k] = e * zp[k] + e.conj() * czm[k] + r[k];
        ud[k] = e * (zpd[k] + iv * zp[k]) + e.conj() * (czmd[k] - iv * czm[k]) + rd[k];
    }
    Ok((FieldHat::from_slots(grid, u)?, FieldHat::from_slots(grid, ud)?))
}
