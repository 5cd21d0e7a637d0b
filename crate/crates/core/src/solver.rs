//! The MTI-FP time step, propagation to a final time and the energy.
//!
//! One step decomposes `(uⁿ, u̇ⁿ)` into the local unknowns, advances them
//! with the exponential-wave-integrator coefficients and reassembles
//! `(uⁿ⁺¹, u̇ⁿ⁺¹)`. The remainder's velocity picks up `-(τ/2ε²) w̃ⁿ⁺¹`,
//! which needs `uⁿ⁺¹`, so `u` is assembled before `u̇`.

use alloc::vec;
use alloc::vec::Vec;

use crate::coeffs::{ModeCoefficients, StepCoefficients};
use crate::error::{Error, Result};
use crate::fft::{Transform, TransformFactory};
use crate::math::{cis, exp, round, C64, I};
use crate::mdf::{DecompositionState, Filter, MdfWork, Stage};
use crate::nonlinearity::{carrier, fdot_pm, g_pm, gdot_pm, w_from_parts, CubicParams};
use crate::spectral::{
    conj_field_slots, dealias_slots, sobolev_norm, spectral_derivative, FieldHat, Fourier, SpectralGrid,
};

/// Built-in and user-supplied initial data `(φ₁, φ₂)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum InitialData {
    /// `φ₁ = (1+i)e^{-x²/2}`, `φ₂ = (3/2)e^{-x²/2}`.
    #[default]
    ComplexGaussian,
    /// `φ₁ = e^{-x²/2}`, `φ₂ = (3/2)φ₁`.
    RealGaussian,
    /// Nodal values on the configured grid.
    Tabulated { phi1: Vec<C64>, phi2: Vec<C64> },
}

/// How `φ₂` enters the initial velocity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Phi2Convention {
    /// `u̇(0) = φ₂/ε²` with an ε-free profile `φ₂`.
    #[default]
    EpsIndependent,
    /// The profile itself carries a further `1/ε²`: `u̇(0) = φ₂/ε⁴`.
    PaperSection5Literal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub eps: f64,
    pub tau: f64,
    pub t_final: f64,
    pub lambda: f64,
    pub initial: InitialData,
    pub phi2: Phi2Convention,
    /// Exploit `z₊ = z₋` for real data; about half the transforms.
    pub real_fast_path: bool,
    pub filter: Filter,
    /// 2/3-rule truncation of every transformed nonlinear term.
    pub dealias: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            a: -16.0,
            b: 16.0,
            n: 256,
            eps: 0.5,
            tau: 1e-3,
            t_final: 1.0,
            lambda: 1.0,
            initial: InitialData::ComplexGaussian,
            phi2: Phi2Convention::EpsIndependent,
            real_fast_path: false,
            filter: Filter::Sin,
            dealias: false,
        }
    }
}

/// Largest number of steps a configuration may ask for.
pub const MAX_STEPS: u64 = 1 << 32;

impl SolverConfig {
    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.a, self.b, self.n)
    }

    pub fn params(&self) -> CubicParams {
        CubicParams::new(self.lambda)
    }

    /// `round(T/τ)`, provided `T` is that many steps to within `1e-9 τ`.
    pub fn step_count(&self) -> Result<u64> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter("tau must be positive"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter("final time must be positive"));
        }
        let ratio = self.t_final / self.tau;
        let m = round(ratio);
        if (self.t_final - m * self.tau).abs() > 1e-9 * self.tau || m < 1.0 {
            return Err(Error::StepCount { ratio });
        }
        if m > MAX_STEPS as f64 {
            return Err(Error::InvalidParameter("step count exceeds the budget"));
        }
        Ok(m as u64)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::EpsOutOfRange(self.eps));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite"));
        }
        self.step_count()?;
        if let InitialData::Tabulated { phi1, phi2 } = &self.initial {
            for t in [phi1, phi2] {
                if t.len() != self.n {
                    return Err(Error::LengthMismatch { expected: self.n, got: t.len() });
                }
            }
        }
        Ok(())
    }
}

/// `(uⁿ, u̇ⁿ)` in spectral form.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub u: FieldHat,
    pub u_dot: FieldHat,
    pub step_index: u64,
    pub tau: f64,
}

impl SolverState {
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.tau
    }

    /// Trigonometric interpolant of `u` at `x`.
    pub fn u_at(&self, x: f64) -> C64 {
        let g = self.u.grid();
        let mut acc = C64::new(0.0, 0.0);
        for (l, v) in self.u.modes() {
            acc += v * cis(g.mu(l) * (x - g.a()));
        }
        acc
    }
}

/// Initial state from the configured data, on the configured grid.
pub fn init<T: Transform>(config: &SolverConfig, fourier: &mut Fourier<T>) -> Result<SolverState> {
    config.validate()?;
    let grid = config.grid()?;
    if *fourier.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let x = grid.nodes();
    let gauss: Vec<f64> = x.iter().map(|x| exp(-0.5 * x * x)).collect();
    let (phi1, phi2): (Vec<C64>, Vec<C64>) = match &config.initial {
        InitialData::ComplexGaussian => (
            gauss.iter().map(|&g| C64::new(g, g)).collect(),
            gauss.iter().map(|&g| C64::new(1.5 * g, 0.0)).collect(),
        ),
        InitialData::RealGaussian => (
            gauss.iter().map(|&g| C64::new(g, 0.0)).collect(),
            gauss.iter().map(|&g| C64::new(1.5 * g, 0.0)).collect(),
        ),
        InitialData::Tabulated { phi1, phi2 } => (phi1.clone(), phi2.clone()),
    };
    let e2 = config.eps * config.eps;
    let s = match config.phi2 {
        Phi2Convention::EpsIndependent => 1.0 / e2,
        Phi2Convention::PaperSection5Literal => 1.0 / (e2 * e2),
    };
    let u_dot: Vec<C64> = phi2.iter().map(|v| v * s).collect();
    Ok(SolverState {
        u: fourier.to_spectral(&phi1)?,
        u_dot: fourier.to_spectral(&u_dot)?,
        step_index: 0,
        tau: config.tau,
    })
}

/// Largest `|ṽ_l - conj(ṽ_{-l})|`: zero exactly when the nodal field is real.
fn imaginary_defect(f: &[C64]) -> f64 {
    let n = f.len();
    let mut worst = (f[0] - f[0].conj()).norm();
    for k in 1..n {
        worst = worst.max((f[k] - f[n - k].conj()).norm());
    }
    worst
}

fn sup(f: &[C64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.norm()))
}

/// Advances a [`SolverState`] by one fixed `τ`, reusing every buffer.
pub struct Stepper<T> {
    fourier: Fourier<T>,
    coeffs: Vec<ModeCoefficients>,
    eps: f64,
    tau: f64,
    params: CubicParams,
    real: bool,
    dealias: bool,
    carrier: C64,
    mdf: MdfWork,
    // nodal kernels, transformed in place
    fdp: Vec<C64>,
    fdm: Vec<C64>,
    gp: Vec<C64>,
    gm: Vec<C64>,
    gdp: Vec<C64>,
    gdm: Vec<C64>,
    // conj-field images of the minus-side kernels
    cgm: Vec<C64>,
    cgdm: Vec<C64>,
    rd0: Vec<C64>,
    // advanced local unknowns
    zp: Vec<C64>,
    zm: Vec<C64>,
    zpd: Vec<C64>,
    zmd: Vec<C64>,
    r: Vec<C64>,
    rd: Vec<C64>,
    czm: Vec<C64>,
    czmd: Vec<C64>,
    v_hat: Vec<C64>,
    nodal_v: Vec<C64>,
    nodal_r: Vec<C64>,
    w: Vec<C64>,
}

impl<T: Transform> Stepper<T> {
    pub fn new(config: &SolverConfig, plan: T) -> Result<Stepper<T>> {
        config.validate()?;
        let grid = config.grid()?;
        let coeffs = StepCoefficients::new(&grid, config.eps, config.tau)?;
        Stepper::with_coefficients(config, &coeffs, plan)
    }

    /// Reuses a coefficient table built for the same `(grid, ε, τ)`.
    pub fn with_coefficients(config: &SolverConfig, coeffs: &StepCoefficients, plan: T) -> Result<Stepper<T>> {
        config.validate()?;
        let grid = config.grid()?;
        if *coeffs.grid() != grid || coeffs.eps() != config.eps || coeffs.tau() != config.tau {
            return Err(Error::InvalidParameter("coefficients were built for another (grid, eps, tau)"));
        }
        let n = grid.n();
        let z = || vec![C64::new(0.0, 0.0); n];
        Ok(Stepper {
            fourier: Fourier::new(grid, plan)?,
            coeffs: coeffs.slot_table(),
            eps: config.eps,
            tau: config.tau,
            params: config.params(),
            real: config.real_fast_path,
            dealias: config.dealias,
            carrier: carrier(config.tau, config.eps),
            mdf: MdfWork::new(&grid, config.tau, config.filter),
            fdp: z(),
            fdm: z(),
            gp: z(),
            gm: z(),
            gdp: z(),
            gdm: z(),
            cgm: z(),
            cgdm: z(),
            rd0: z(),
            zp: z(),
            zm: z(),
            zpd: z(),
            zmd: z(),
            r: z(),
            rd: z(),
            czm: z(),
            czmd: z(),
            v_hat: z(),
            nodal_v: z(),
            nodal_r: z(),
            w: z(),
        })
    }

    pub fn fourier(&mut self) -> &mut Fourier<T> {
        &mut self.fourier
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.fourier.grid()
    }

    fn forward(&mut self, which: fn(&mut Self) -> &mut Vec<C64>) {
        let mut buf = core::mem::take(which(self));
        self.fourier.forward_in_place(&mut buf);
        if self.dealias {
            dealias_slots(self.fourier.grid(), &mut buf);
        }
        *which(self) = buf;
    }

    /// One step, in place.
    pub fn step(&mut self, state: &mut SolverState) -> Result<()> {
        let grid = *self.fourier.grid();
        if *state.u.grid() != grid || *state.u_dot.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let n = grid.n();
        let (eps, tau) = (self.eps, self.tau);
        let e2 = eps * eps;
        let real = self.real;
        if real {
            // z₊ = z₋ needs real u and ε²u̇
            let u = state.u.slots();
            let ud = state.u_dot.slots();
            let defect = imaginary_defect(u).max(e2 * imaginary_defect(ud));
            let scale = sup(u).max(e2 * sup(ud)).max(f64::MIN_POSITIVE);
            if defect > 1e-12 * scale {
                return Err(Error::NotReal { imag: defect });
            }
        }

        // (1) local data at s = 0
        self.mdf.decompose(
            &mut self.fourier,
            state.u.slots(),
            state.u_dot.slots(),
            eps,
            &self.params,
            real,
            self.dealias,
        );
        self.mdf.r_dot_initial(&mut self.rd0);

        // (2) remaining kernels
        {
            let m = &self.mdf;
            let p = &self.params;
            for j in 0..n {
                let (zp, zm, zpd, zmd) = (m.zp[j], m.zm[j], m.zpd[j], m.zmd[j]);
                let (a, b) = fdot_pm(zp, zm, zpd, zmd, p);
                self.fdp[j] = a;
                self.fdm[j] = b;
                let (a, b) = g_pm(zp, zm, p);
                self.gp[j] = a;
                self.gm[j] = b;
                let (a, b) = gdot_pm(zp, zm, zpd, zmd, p);
                self.gdp[j] = a;
                self.gdm[j] = b;
            }
        }
        self.forward(|s| &mut s.fdp);
        self.forward(|s| &mut s.gp);
        self.forward(|s| &mut s.gdp);
        if real {
            self.fdm.copy_from_slice(&self.fdp);
            self.gm.copy_from_slice(&self.gp);
            self.gdm.copy_from_slice(&self.gdp);
        } else {
            self.forward(|s| &mut s.fdm);
            self.forward(|s| &mut s.gm);
            self.forward(|s| &mut s.gdm);
        }
        conj_field_slots(&self.gm, &mut self.cgm);
        conj_field_slots(&self.gdm, &mut self.cgdm);

        // (3) per-mode updates
        let m = &self.mdf;
        for k in 0..n {
            let c = &self.coeffs[k];
            self.zp[k] = c.a * m.zp_hat[k] + e2 * c.b * m.zpd_hat[k] - c.c * m.fp_hat[k] - c.d * self.fdp[k];
            self.zpd[k] =
                c.a_dot * m.zp_hat[k] + e2 * c.b_dot * m.zpd_hat[k] - c.c_dot * m.fp_hat[k] - c.d_dot * self.fdp[k];
            self.r[k] = c.sin_over_omega * self.rd0[k]
                - c.p * self.gp[k]
                - c.q * self.gdp[k]
                - c.p.conj() * self.cgm[k]
                - c.q.conj() * self.cgdm[k];
            self.rd[k] = c.cos_omega_tau * self.rd0[k]
                - c.p_dot * self.gp[k]
                - c.q_dot * self.gdp[k]
                - c.p_dot.conj() * self.cgm[k]
                - c.q_dot.conj() * self.cgdm[k];
        }
        if real {
            self.zm.copy_from_slice(&self.zp);
            self.zmd.copy_from_slice(&self.zpd);
        } else {
            for k in 0..n {
                let c = &self.coeffs[k];
                self.zm[k] =
                    c.a * m.zm_hat[k] + e2 * c.b * m.zmd_hat[k] - c.c * m.fm_hat[k] - c.d * self.fdm[k];
                self.zmd[k] = c.a_dot * m.zm_hat[k] + e2 * c.b_dot * m.zmd_hat[k]
                    - c.c_dot * m.fm_hat[k]
                    - c.d_dot * self.fdm[k];
            }
        }
        conj_field_slots(&self.zm, &mut self.czm);
        conj_field_slots(&self.zmd, &mut self.czmd);

        // (4) uⁿ⁺¹ = v + r, v the carrier part
        let e = self.carrier;
        for k in 0..n {
            self.v_hat[k] = e * self.zp[k] + e.conj() * self.czm[k];
        }

        // (5) wⁿ⁺¹ = f(v + r) - f(v)
        if real {
            // v and r are real: one transform of v + i r
            for k in 0..n {
                self.nodal_v[k] = self.v_hat[k] + I * self.r[k];
            }
            self.fourier.inverse_in_place(&mut self.nodal_v);
            for j in 0..n {
                let (v, r) = (self.nodal_v[j].re, self.nodal_v[j].im);
                self.w[j] = w_from_parts(C64::new(v, 0.0), C64::new(r, 0.0), &self.params);
            }
        } else {
            self.nodal_v.copy_from_slice(&self.v_hat);
            self.fourier.inverse_in_place(&mut self.nodal_v);
            self.nodal_r.copy_from_slice(&self.r);
            self.fourier.inverse_in_place(&mut self.nodal_r);
            for j in 0..n {
                self.w[j] = w_from_parts(self.nodal_v[j], self.nodal_r[j], &self.params);
            }
        }
        self.forward(|s| &mut s.w);

        // (6) the trapezoidal remainder term
        let kw = tau / (2.0 * e2);
        for k in 0..n {
            self.rd[k] -= kw * self.w[k];
        }

        // (7) assemble
        let iv = I / e2;
        let u = state.u.slots_mut();
        for k in 0..n {
            u[k] = self.v_hat[k] + self.r[k];
        }
        let ud = state.u_dot.slots_mut();
        for k in 0..n {
            ud[k] = e * (self.zpd[k] + iv * self.zp[k]) + e.conj() * (self.czmd[k] - iv * self.czm[k]) + self.rd[k];
        }
        state.step_index += 1;
        state.tau = tau;

        if !(state.u.is_finite() && state.u_dot.is_finite()) {
            let norm = sobolev_norm(&state.u, 2).unwrap_or(f64::NAN);
            return Err(Error::Divergence { step: state.step_index as usize, norm });
        }
        Ok(())
    }

    /// Local unknowns at `s = τ` of the last step taken.
    pub fn local_state(&self) -> DecompositionState {
        let grid = *self.fourier.grid();
        let wrap = |v: &Vec<C64>| FieldHat::from_slots(grid, v.clone()).expect("buffer length matches grid");
        DecompositionState {
            zp: wrap(&self.zp),
            zm: wrap(&self.zm),
            zp_dot: wrap(&self.zpd),
            zm_dot: wrap(&self.zmd),
            r: wrap(&self.r),
            r_dot: wrap(&self.rd),
            eps: self.eps,
            stage: Stage::Advanced { tau: self.tau },
        }
    }
}

/// Receives the state at step indices that are multiples of
/// [`stride`](Observer::stride), at step 0 and at the final step.
pub trait Observer {
    fn stride(&self) -> u64 {
        1
    }
    fn observe(&mut self, state: &SolverState);
}

/// Records `u(x, tₙ)` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTrace {
    pub x: f64,
    pub stride: u64,
    pub samples: Vec<(f64, C64)>,
}

impl PointTrace {
    pub fn new(x: f64, stride: u64) -> PointTrace {
        PointTrace { x, stride: stride.max(1), samples: Vec::new() }
    }
}

impl Observer for PointTrace {
    fn stride(&self) -> u64 {
        self.stride
    }
    fn observe(&mut self, state: &SolverState) {
        self.samples.push((state.time(), state.u_at(self.x)));
    }
}

/// Records the energy along a run.
pub struct EnergyLog<T> {
    fourier: Fourier<T>,
    eps: f64,
    params: CubicParams,
    pub stride: u64,
    pub samples: Vec<(f64, f64)>,
}

impl<T: Transform> EnergyLog<T> {
    pub fn new(config: &SolverConfig, plan: T, stride: u64) -> Result<EnergyLog<T>> {
        Ok(EnergyLog {
            fourier: Fourier::new(config.grid()?, plan)?,
            eps: config.eps,
            params: config.params(),
            stride: stride.max(1),
            samples: Vec::new(),
        })
    }

    /// `max |E(t) - E(0)| / E(0)` over the recorded samples.
    pub fn relative_drift(&self) -> f64 {
        let Some(&(_, e0)) = self.samples.first() else { return 0.0 };
        self.samples.iter().fold(0.0, |m, &(_, e)| m.max((e - e0).abs() / e0))
    }
}

impl<T: Transform> Observer for EnergyLog<T> {
    fn stride(&self) -> u64 {
        self.stride
    }
    fn observe(&mut self, state: &SolverState) {
        let e = energy(&mut self.fourier, state, self.eps, &self.params).unwrap_or(f64::NAN);
        self.samples.push((state.time(), e));
    }
}

/// Runs `round(T/τ)` steps from the configured initial data.
pub fn propagate<F: TransformFactory>(
    config: &SolverConfig,
    factory: &F,
    observers: &mut [&mut dyn Observer],
) -> Result<SolverState> {
    let mut stepper = Stepper::new(config, factory.plan(config.n))?;
    run(&mut stepper, config, observers)
}

/// As [`propagate`], with a prepared stepper.
pub fn run<T: Transform>(
    stepper: &mut Stepper<T>,
    config: &SolverConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<SolverState> {
    let steps = config.step_count()?;
    let mut state = init(config, stepper.fourier())?;
    let notify = |state: &SolverState, observers: &mut [&mut dyn Observer], last: bool| {
        for o in observers.iter_mut() {
            if state.step_index % o.stride().max(1) == 0 || last {
                o.observe(state);
            }
        }
    };
    notify(&state, observers, false);
    for n in 1..=steps {
        stepper.step(&mut state)?;
        notify(&state, observers, n == steps);
    }
    Ok(state)
}

/// `∫ ε²|u̇|² + |∂ₓu|² + |u|²/ε² + λ|u|⁴/2 dx` by the nodal trapezoid rule.
pub fn energy<T: Transform>(
    fourier: &mut Fourier<T>,
    state: &SolverState,
    eps: f64,
    params: &CubicParams,
) -> Result<f64> {
    let grid = *fourier.grid();
    let u = fourier.from_spectral(&state.u)?;
    let ux = fourier.from_spectral(&spectral_derivative(&state.u, 1))?;
    let ud = fourier.from_spectral(&state.u_dot)?;
    let e2 = eps * eps;
    let mut acc = 0.0;
    for j in 0..grid.n() {
        let m2 = u[j].norm_sqr();
        acc += e2 * ud[j].norm_sqr() + ux[j].norm_sqr() + m2 / e2 + 0.5 * params.lambda * m2 * m2;
    }
    Ok(acc * grid.h())
}
