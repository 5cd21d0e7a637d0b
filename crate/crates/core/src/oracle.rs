//! Independent reference solutions.
//!
//! [`mode_ode_solve`] integrates the truncated Fourier system
//! `ε² û″ + (μ² + 1/ε²) û + f̂(u) = 0` with Dormand–Prince, the nonlinearity
//! evaluated pseudospectrally. It shares no code with the stepper beyond the
//! transforms, so agreement between the two is a real check. Stiffness grows
//! like `1/ε²`; the oracle is meant for `ε ≳ 0.05` and modest `N`.

use alloc::vec;
use alloc::vec::Vec;

use crate::coeffs::ModeFrequencies;
use crate::error::{Error, Result};
use crate::fft::Transform;
use crate::math::C64;
use crate::nonlinearity::CubicParams;
use crate::ode::{dopri5, OdeOptions};
use crate::solver::{InitialData, Phi2Convention, SolverConfig, SolverState};
use crate::spectral::{FieldHat, Fourier, SpectralGrid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub eps: f64,
    pub t_final: f64,
    pub lambda: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OracleConfig {
    /// Same grid, ε, `T` and `λ` as a solver configuration.
    pub fn matching(c: &SolverConfig, tol: f64) -> OracleConfig {
        OracleConfig {
            a: c.a,
            b: c.b,
            n: c.n,
            eps: c.eps,
            t_final: c.t_final,
            lambda: c.lambda,
            rtol: tol,
            atol: tol,
            max_steps: 50_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        SpectralGrid::new(self.a, self.b, self.n)?;
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::EpsOutOfRange(self.eps));
        }
        for t in [self.rtol, self.atol] {
            if !(1e-13..=1e-6).contains(&t) {
                return Err(Error::InvalidParameter("oracle tolerances must lie in [1e-13, 1e-6]"));
            }
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter("final time must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    /// State at `T`; `time()` reports `T`.
    pub state: SolverState,
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates the mode system from `(u₀, u̇₀)` to `T`.
pub fn mode_ode_solve<T: Transform>(
    config: &OracleConfig,
    plan: T,
    u0: &FieldHat,
    u_dot0: &FieldHat,
) -> Result<OracleSolution> {
    config.validate()?;
    let grid = SpectralGrid::new(config.a, config.b, config.n)?;
    if *u0.grid() != grid || *u_dot0.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let n = grid.n();
    let mut fourier = Fourier::new(grid, plan)?;
    let nu = 1.0 / (config.eps * config.eps);
    let stiff: Vec<f64> = grid.mu_slots().iter().map(|mu| mu * mu + nu).collect();
    let params = CubicParams::new(config.lambda);
    let mut nodal = vec![C64::new(0.0, 0.0); n];

    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        let (u, v) = y.split_at(n);
        nodal.copy_from_slice(u);
        fourier.inverse_in_place(&mut nodal);
        for z in nodal.iter_mut() {
            *z = params.f(*z);
        }
        fourier.forward_in_place(&mut nodal);
        let (du, dv) = dy.split_at_mut(n);
        du.copy_from_slice(v);
        for k in 0..n {
            dv[k] = -(u[k] * stiff[k] + nodal[k]) * nu;
        }
    };

    let mut y0 = u0.slots().to_vec();
    y0.extend_from_slice(u_dot0.slots());
    let opts = OdeOptions { rtol: config.rtol, atol: config.atol, max_steps: config.max_steps, h0: None };
    let sol = dopri5(rhs, 0.0, &y0, config.t_final, &opts)?;
    let (u, v) = sol.y.split_at(n);
    Ok(OracleSolution {
        state: SolverState {
            u: FieldHat::from_slots(grid, u.to_vec())?,
            u_dot: FieldHat::from_slots(grid, v.to_vec())?,
            step_index: 1,
            tau: config.t_final,
        },
        accepted: sol.accepted,
        rejected: sol.rejected,
    })
}

/// `(a, b, a', b')` at `τ` from `ε² y″ + 2i y′ + μ² y = 0`, started at
/// `(1, 0)` and `(0, 1/ε²)`. Practical for `ε ≳ 0.1`.
pub fn ab_by_ode(f: &ModeFrequencies, tau: f64, opts: &OdeOptions) -> Result<[C64; 4]> {
    let nu = f.nu;
    let m2 = f.mu * f.mu;
    let i = C64::new(0.0, 1.0);
    // two copies of the scalar system, one per initial condition
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        for s in 0..2 {
            let (z, zd) = (y[2 * s], y[2 * s + 1]);
            dy[2 * s] = zd;
            dy[2 * s + 1] = -(zd * (2.0 * i) + z * m2) * nu;
        }
    };
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let sol = dopri5(rhs, 0.0, &[one, zero, zero, C64::new(nu, 0.0)], tau, opts)?;
    Ok([sol.y[0], sol.y[2], sol.y[1], sol.y[3]])
}

/// The fine-resolution reference run of the convergence tables:
/// `h = 1/32` on `[-16, 16]`, `τ = 5e-6`, `T = 1`, cubic, Gaussian data.
pub fn reference_config(eps: f64) -> SolverConfig {
    SolverConfig {
        a: -16.0,
        b: 16.0,
        n: 1024,
        eps,
        tau: 5e-6,
        t_final: 1.0,
        lambda: 1.0,
        initial: InitialData::ComplexGaussian,
        phi2: Phi2Convention::EpsIndependent,
        ..SolverConfig::default()
    }
}
