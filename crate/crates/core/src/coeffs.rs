//! Per-mode frequencies and the exponential-wave-integrator step coefficients.
//!
//! All phases derive from one frequency set: `ν = 1/ε²` and the slow
//! frequency `λ⁻ = μ²/(1+s)`, `s = sqrt(1+μ²ε²)`. Then `ω = ν + λ⁻` and
//! `λ⁺ = -2ν - λ⁻` are carried in double-double so that relations such as
//! `λ⁺ = -ν - ω` hold exactly when forming phases of size up to `τ/ε² ~ 1e8`.
//!
//! The forcing coefficients reduce to
//! `J_k(A, B) = ∫₀^τ e^{iA(τ-θ)} e^{iBθ} θ^k dθ = τ^{k+1} F_k(Aτ, Bτ)` with
//! `F_k(x, y) = ∫₀¹ e^{ix(1-t)} e^{iyt} t^k dt`:
//!
//! ```text
//! c  = [J₀(λ⁻,0) − J₀(λ⁺,0)] / (2iε²ω)        d  = same with J₁
//! c' = [λ⁻J₀(λ⁻,0) − λ⁺J₀(λ⁺,0)] / (2ε²ω)     d' = same with J₁
//! p  = [J₀(ω,3ν) − J₀(−ω,3ν)] / (2iε²ω)       q  = same with J₁
//! p' = [J₀(ω,3ν) + J₀(−ω,3ν)] / (2ε²)         q' = same with J₁
//! ```
//!
//! Differences of nearby `F_k` are summed as divided-difference series when
//! both arguments are O(1) or smaller, so nothing cancels.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, cabs, hypot, Dd, C64, I};
use crate::spectral::SpectralGrid;

/// Frequencies of one Fourier mode at a given ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeFrequencies {
    pub mu: f64,
    pub eps: f64,
    /// `ω = sqrt(1+μ²ε²)/ε²`
    pub omega: f64,
    /// `λ⁺ = -(1+sqrt(1+μ²ε²))/ε²`
    pub lambda_plus: f64,
    /// `λ⁻ = (sqrt(1+μ²ε²)-1)/ε² ≥ 0`
    pub lambda_minus: f64,
    /// `ν = 1/ε²`
    pub nu: f64,
    /// `ε²ω = sqrt(1+μ²ε²)`
    pub eps2_omega: f64,
}

pub fn mode_frequencies(eps: f64, mu: f64) -> Result<ModeFrequencies> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    if !mu.is_finite() {
        return Err(Error::InvalidParameter("mu must be finite"));
    }
    let nu = 1.0 / (eps * eps);
    let s = hypot(1.0, mu * eps);
    let lm = mu * mu / (1.0 + s);
    Ok(ModeFrequencies {
        mu,
        eps,
        omega: Dd::sum(nu, lm).value(),
        lambda_plus: Dd::sum(2.0 * nu, lm).neg().value(),
        lambda_minus: lm,
        nu,
        eps2_omega: s,
    })
}

impl ModeFrequencies {
    pub fn omega_dd(&self) -> Dd {
        Dd::sum(self.nu, self.lambda_minus)
    }
    pub fn lambda_plus_dd(&self) -> Dd {
        Dd::sum(2.0 * self.nu, self.lambda_minus).neg()
    }
    pub fn lambda_minus_dd(&self) -> Dd {
        Dd::from(self.lambda_minus)
    }
    pub fn nu_dd(&self) -> Dd {
        Dd::from(self.nu)
    }
    /// `3ν - ω = 2ν - λ⁻`, small near the resonance `μ²ε² = 8`.
    pub fn detuning_dd(&self) -> Dd {
        Dd::sum(2.0 * self.nu, -self.lambda_minus)
    }
    /// `3ν + ω = 4ν + λ⁻`
    pub fn three_nu_plus_omega_dd(&self) -> Dd {
        Dd::sum(4.0 * self.nu, self.lambda_minus)
    }
    pub fn eps2(&self) -> f64 {
        self.eps * self.eps
    }
}

/// The per-mode numbers one step needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoefficients {
    pub a: C64,
    pub b: C64,
    pub a_dot: C64,
    pub b_dot: C64,
    pub c: C64,
    pub d: C64,
    pub c_dot: C64,
    pub d_dot: C64,
    pub p: C64,
    pub q: C64,
    pub p_dot: C64,
    pub q_dot: C64,
    pub sin_over_omega: f64,
    pub cos_omega_tau: f64,
}

/// `(a, b, a', b')` in the modulated form
/// `a = e^{-iντ}(cos ωτ + i sin ωτ/(ε²ω))`, `b = e^{-iντ} sin ωτ/(ε²ω)`,
/// `a' = -μ² e^{-iντ} sin ωτ/(ε²ω)`, `b' = e^{-iντ}(ω cos ωτ - iν sin ωτ)/(ε²ω)`.
pub fn ab_coefficients(f: &ModeFrequencies, tau: f64) -> (C64, C64, C64, C64) {
    let carrier = Dd::prod(f.nu, tau).neg().cis();
    let w = f.omega_dd().mul_f64(tau).cis();
    let (c, s) = (w.re, w.im);
    let s_over = s / f.eps2_omega;
    let a = carrier * C64::new(c, s_over);
    let b = carrier * s_over;
    let a_dot = carrier * (-f.mu * f.mu * s_over);
    let b_dot = carrier * C64::new(f.omega * c, -f.nu * s) / f.eps2_omega;
    (a, b, a_dot, b_dot)
}

/// `(c, d, c', d', p, q, p', q')`.
pub fn forcing_coefficients(f: &ModeFrequencies, tau: f64) -> [C64; 8] {
    forcing_with(f, tau, Branch::Auto)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum Branch {
    Auto,
    Series,
    Direct,
}

const SERIES_X: f64 = 1.0;
const SERIES_Y: f64 = 4.0;

pub(crate) fn forcing_with(f: &ModeFrequencies, tau: f64, branch: Branch) -> [C64; 8] {
    let eps2_omega = f.eps2_omega;
    let eps2 = f.eps2();
    let x_minus = f.lambda_minus_dd().mul_f64(tau);
    let x_plus = f.lambda_plus_dd().mul_f64(tau);
    let two_omega_tau = f.omega_dd().mul_f64(2.0 * tau).value();

    // c family: differences over x ∈ {λ⁻τ, λ⁺τ} at y = 0
    let small_c = abs(x_plus.value()) <= SERIES_X;
    let use_series_c = match branch {
        Branch::Auto => small_c,
        Branch::Series => true,
        Branch::Direct => false,
    };
    let (df0, df1, dh0, dh1) = if use_series_c {
        let (x1, x2) = (x_minus.value(), x_plus.value());
        (
            delta_f_series(x1, x2, two_omega_tau, 0.0, 0),
            delta_f_series(x1, x2, two_omega_tau, 0.0, 1),
            delta_h_series(x1, x2, two_omega_tau, 0),
            delta_h_series(x1, x2, two_omega_tau, 1),
        )
    } else {
        let (f0m, f1m) = f_at_zero(x_minus);
        let (f0p, f1p) = f_at_zero(x_plus);
        let (xm, xp) = (x_minus.value(), x_plus.value());
        (f0m - f0p, f1m - f1p, h0(x_minus) - h0(x_plus), f1m * xm - f1p * xp)
    };
    let inv_c = 1.0 / (2.0 * eps2_omega);
    let c = df0 * tau * inv_c / I;
    let d = df1 * tau * tau * inv_c / I;
    let c_dot = dh0 * inv_c;
    let d_dot = dh1 * tau * inv_c;

    // p family: J_k(±ω, 3ν), with detunings (3ν ∓ ω)τ
    let omega_tau = f.omega_dd().mul_f64(tau);
    let y = f.nu_dd().mul_f64(3.0 * tau);
    let small_p = abs(omega_tau.value()) <= SERIES_X && abs(y.value()) <= SERIES_Y;
    let use_series_p = match branch {
        Branch::Auto => small_p,
        Branch::Series => true,
        Branch::Direct => false,
    };
    let (jp0, jp1) = {
        let z = f.detuning_dd().mul_f64(tau);
        let e = omega_tau.cis();
        let (g0, g1) = g_pair(z);
        (e * g0, e * g1)
    };
    let (jm0, jm1) = {
        let z = f.three_nu_plus_omega_dd().mul_f64(tau);
        let e = omega_tau.neg().cis();
        let (g0, g1) = g_pair(z);
        (e * g0, e * g1)
    };
    let (diff0, diff1) = if use_series_p {
        let (x1, x2, yy) = (omega_tau.value(), -omega_tau.value(), y.value());
        (delta_f_series(x1, x2, two_omega_tau, yy, 0), delta_f_series(x1, x2, two_omega_tau, yy, 1))
    } else {
        (jp0 - jm0, jp1 - jm1)
    };
    let inv_p = 1.0 / (2.0 * eps2_omega);
    let p = diff0 * tau * inv_p / I;
    let q = diff1 * tau * tau * inv_p / I;
    let inv_pd = 1.0 / (2.0 * eps2);
    let p_dot = (jp0 + jm0) * tau * inv_pd;
    let q_dot = (jp1 + jm1) * tau * tau * inv_pd;

    [c, d, c_dot, d_dot, p, q, p_dot, q_dot]
}

pub fn mode_coefficients(f: &ModeFrequencies, tau: f64) -> ModeCoefficients {
    let (a, b, a_dot, b_dot) = ab_coefficients(f, tau);
    let [c, d, c_dot, d_dot, p, q, p_dot, q_dot] = forcing_coefficients(f, tau);
    let w = f.omega_dd().mul_f64(tau).cis();
    ModeCoefficients {
        a,
        b,
        a_dot,
        b_dot,
        c,
        d,
        c_dot,
        d_dot,
        p,
        q,
        p_dot,
        q_dot,
        sin_over_omega: w.im / f.omega,
        cos_omega_tau: w.re,
    }
}

/// `G₀(z) = ∫₀¹ e^{izt} dt` and `G₁(z) = ∫₀¹ t e^{izt} dt`.
fn g_pair(z: Dd) -> (C64, C64) {
    let zv = z.value();
    if abs(zv) < 1.0 {
        let iz = C64::new(0.0, zv);
        let mut g0 = C64::new(0.0, 0.0);
        let mut g1 = C64::new(0.0, 0.0);
        // (iz)^n / n!
        let mut pw = C64::new(1.0, 0.0);
        for n in 0..24 {
            let nf = n as f64;
            g0 += pw / (nf + 1.0);
            g1 += pw / (nf + 2.0);
            pw = pw * iz / (nf + 1.0);
        }
        (g0, g1)
    } else {
        let m1 = z.cis_m1();
        let e = m1 + 1.0;
        let iz = C64::new(0.0, zv);
        (m1 / iz, e / iz + m1 / (zv * zv))
    }
}

/// `F₀(x, 0)` and `F₁(x, 0)`.
fn f_at_zero(x: Dd) -> (C64, C64) {
    let (g0, g1) = g_pair(x);
    (g0, g0 - g1)
}

/// `x·F₀(x, 0) = (e^{ix} - 1)/i`.
fn h0(x: Dd) -> C64 {
    x.cis_m1() / I
}

/// `F_k(x1, y) - F_k(x2, y)` summed as a power series, with `dx = x1 - x2`
/// supplied by the caller to full relative accuracy.
fn delta_f_series(x1: f64, x2: f64, dx: f64, y: f64, k: u32) -> C64 {
    let iy = C64::new(0.0, y);
    let kf = k as f64;
    let mut total = C64::new(0.0, 0.0);
    // q = (x1^m - x2^m)/(x1 - x2), p2 = x2^{m-1}
    let mut q = 1.0;
    let mut p2 = 1.0;
    let mut im = I;
    // lead = k!/(m+k+1)!
    let mut lead = {
        let mut v = 1.0;
        for j in (k + 1)..=(k + 2) {
            v /= j as f64;
        }
        v
    };
    // Odd/even terms can vanish (x2 = -x1), so no early exit; with |x| ≤ 1.5
    // the tail after 36 terms is below 1e-30.
    for m in 1..=36u32 {
        let mf = m as f64;
        let mut s = C64::new(0.0, 0.0);
        let mut t = C64::new(lead, 0.0);
        for n in 0..80u32 {
            s += t;
            if cabs(t) <= 1e-19 * cabs(s) {
                break;
            }
            let nf = n as f64;
            t = t * iy * (nf + kf + 1.0) / ((nf + 1.0) * (mf + nf + kf + 2.0));
        }
        total += im * q * s;
        p2 *= x2;
        q = x1 * q + p2;
        im *= I;
        lead /= mf + kf + 2.0;
    }
    total * dx
}

/// `x1·F_k(x1, 0) - x2·F_k(x2, 0)` as a power series, `dx = x1 - x2`.
fn delta_h_series(x1: f64, x2: f64, dx: f64, k: u32) -> C64 {
    let mut fact_k = 1.0;
    for j in 1..=k {
        fact_k *= j as f64;
    }
    // Σ_{m≥0} i^m (x1^{m+1} - x2^{m+1}) k!/(m+k+1)!
    let mut total = C64::new(0.0, 0.0);
    let mut q = 1.0;
    let mut p2 = 1.0;
    let mut im = C64::new(1.0, 0.0);
    let mut lead = fact_k;
    for j in 1..=(k + 1) {
        lead /= j as f64;
    }
    for m in 0..36u32 {
        total += im * (q * lead);
        p2 *= x2;
        q = x1 * q + p2;
        im *= I;
        lead /= (m + k + 2) as f64;
    }
    total * dx
}

/// Step coefficients for every mode of a grid at fixed `(ε, τ)`.
#[derive(Clone, Debug)]
pub struct StepCoefficients {
    eps: f64,
    tau: f64,
    grid: SpectralGrid,
    // indexed by |l| for l = 0..=N/2
    by_abs_mode: Vec<ModeCoefficients>,
}

impl StepCoefficients {
    pub fn new(grid: &SpectralGrid, eps: f64, tau: f64) -> Result<StepCoefficients> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter("tau must be positive"));
        }
        let half = grid.n() / 2;
        let by_abs_mode = (0..=half)
            .map(|l| mode_frequencies(eps, grid.mu(l as i64)).map(|f| mode_coefficients(&f, tau)))
            .collect::<Result<Vec<_>>>()?;
        Ok(StepCoefficients { eps, tau, grid: *grid, by_abs_mode })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn mode(&self, l: i64) -> &ModeCoefficients {
        &self.by_abs_mode[l.unsigned_abs() as usize]
    }

    /// Coefficients for storage slot `k`.
    pub fn slot(&self, k: usize) -> &ModeCoefficients {
        self.mode(self.grid.mode(k))
    }

    /// Per-slot table, for the inner loops of the stepper.
    pub fn slot_table(&self) -> Vec<ModeCoefficients> {
        (0..self.grid.n()).map(|k| *self.slot(k)).collect()
    }
}
