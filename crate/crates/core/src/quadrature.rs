//! Numerical quadrature oracle for the step coefficients.
//!
//! Integrands are evaluated in their defining exponential form, with
//! `b(σ) = i(e^{iσλ⁺} - e^{iσλ⁻})/(ε²(λ⁻-λ⁺))` and friends. `a`, `b`, `a'`, `b'`
//! are obtained by integrating their own σ-derivatives from the initial
//! values `a(0)=1, b(0)=0, a'(0)=0, b'(0)=1/ε²`.
//!
//! The rule is composite Gauss-Legendre with equal panels. For an integrand
//! `θ^k Σ_j A_j e^{iκ_jθ}` the 2n-th derivative is bounded by
//! `Σ|A_j| κ^{2n} (τ + 2n/κ)^k`, which gives an a-priori error bound for
//! each panel; the panel count is the smallest meeting the requested
//! tolerance. Panels are long (hundreds of radians of the fastest phase),
//! so phasors come from a per-node offset table times an accurately
//! computed panel-origin phasor.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::coeffs::ModeFrequencies;
use crate::error::{Error, Result};
use crate::math::{abs, cos, ln, pow, Dd, DdC, KahanC, C64, I};

/// Which coefficient to return from [`quadrature_reference`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coefficient {
    A,
    B,
    ADot,
    BDot,
    C,
    D,
    CDot,
    DDot,
    P,
    Q,
    PDot,
    QDot,
    /// `p` with the carrier `e^{3iθ/ε²}` replaced by 1.
    PUnitCarrier,
    /// `q` with the carrier replaced by 1.
    QUnitCarrier,
}

impl Coefficient {
    pub const STEP: [Coefficient; 12] = [
        Coefficient::A,
        Coefficient::B,
        Coefficient::ADot,
        Coefficient::BDot,
        Coefficient::C,
        Coefficient::D,
        Coefficient::CDot,
        Coefficient::DDot,
        Coefficient::P,
        Coefficient::Q,
        Coefficient::PDot,
        Coefficient::QDot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Coefficient::A => "a",
            Coefficient::B => "b",
            Coefficient::ADot => "a_dot",
            Coefficient::BDot => "b_dot",
            Coefficient::C => "c",
            Coefficient::D => "d",
            Coefficient::CDot => "c_dot",
            Coefficient::DDot => "d_dot",
            Coefficient::P => "p",
            Coefficient::Q => "q",
            Coefficient::PDot => "p_dot",
            Coefficient::QDot => "q_dot",
            Coefficient::PUnitCarrier => "p_unit_carrier",
            Coefficient::QUnitCarrier => "q_unit_carrier",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    /// Absolute bound on the Gauss-Legendre truncation error of each integral.
    pub abs_tol: f64,
    /// Refuse to run with more panels than this.
    pub max_panels: u64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { abs_tol: 1e-20, max_panels: 20_000_000 }
    }
}

/// Every coefficient from one pass over each integrand family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSet {
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
    pub p_unit: C64,
    pub q_unit: C64,
    /// Gauss-Legendre evaluations used.
    pub nodes: u64,
}

impl QuadratureSet {
    pub fn get(&self, which: Coefficient) -> C64 {
        match which {
            Coefficient::A => self.a,
            Coefficient::B => self.b,
            Coefficient::ADot => self.a_dot,
            Coefficient::BDot => self.b_dot,
            Coefficient::C => self.c,
            Coefficient::D => self.d,
            Coefficient::CDot => self.c_dot,
            Coefficient::DDot => self.d_dot,
            Coefficient::P => self.p,
            Coefficient::Q => self.q,
            Coefficient::PDot => self.p_dot,
            Coefficient::QDot => self.q_dot,
            Coefficient::PUnitCarrier => self.p_unit,
            Coefficient::QUnitCarrier => self.q_unit,
        }
    }
}

pub fn quadrature_reference(f: &ModeFrequencies, tau: f64, which: Coefficient, opts: &QuadratureOptions) -> Result<C64> {
    Ok(quadrature_all(f, tau, opts)?.get(which))
}

/// Worst coefficient of one mode under `|closed - oracle| / max(rel·|oracle|, abs)`;
/// values up to 1 meet the tolerance.
pub fn closed_form_discrepancy(
    f: &ModeFrequencies,
    tau: f64,
    rel: f64,
    abs_floor: f64,
    opts: &QuadratureOptions,
) -> Result<(Coefficient, f64)> {
    let m = crate::coeffs::mode_coefficients(f, tau);
    let q = quadrature_all(f, tau, opts)?;
    let closed = [m.a, m.b, m.a_dot, m.b_dot, m.c, m.d, m.c_dot, m.d_dot, m.p, m.q, m.p_dot, m.q_dot];
    let mut worst = (Coefficient::A, 0.0);
    for (which, x) in Coefficient::STEP.iter().zip(closed) {
        let y = q.get(*which);
        let score = (x - y).norm() / (rel * y.norm()).max(abs_floor);
        if score.is_nan() {
            return Ok((*which, score));
        }
        if score > worst.1 {
            worst = (*which, score);
        }
    }
    Ok(worst)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// The same rule polished to double-double accuracy.
    pub nodes_dd: Vec<Dd>,
    pub weights_dd: Vec<Dd>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> GaussLegendre {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if abs(dx) < 1e-17 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * d * d);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        let mut nodes_dd = vec![Dd::ZERO; n];
        let mut weights_dd = vec![Dd::ZERO; n];
        for i in (n / 2)..n {
            let mut x = Dd::from(nodes[i]);
            for _ in 0..2 {
                let (p, d) = legendre_dd(n, x);
                x = x.sub(p.div(d));
            }
            let (_, d) = legendre_dd(n, x);
            let w = Dd::from(2.0).div(Dd::from(1.0).sub(x.mul(x)).mul(d.mul(d)));
            nodes_dd[i] = x;
            nodes_dd[n - 1 - i] = x.neg();
            weights_dd[i] = w;
            weights_dd[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights, nodes_dd, weights_dd }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// log10 of `(n!)^4 / ((2n+1)((2n)!)^3)`, the constant in the error term
    /// `E = L^{2n+1} C_n f^{(2n)}(ξ)` on a panel of length `L`.
    fn log10_error_constant(&self) -> f64 {
        let n = self.len();
        let lf = |m: usize| (1..=m).map(|j| ln(j as f64)).sum::<f64>();
        (4.0 * lf(n) - 3.0 * lf(2 * n) - ln((2 * n + 1) as f64)) / ln(10.0)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn legendre_dd(n: usize, x: Dd) -> (Dd, Dd) {
    let (mut p0, mut p1) = (Dd::from(1.0), x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = x.mul(p1).mul_f64(2.0 * kf - 1.0).sub(p0.mul_f64(kf - 1.0)).div_f64(kf);
        p0 = p1;
        p1 = p2;
    }
    let d = x.mul(p1).sub(p0).mul_f64(n as f64).div(x.mul(x).sub(Dd::from(1.0)));
    (p1, d)
}

const ORDER: usize = 128;

/// Panels for `[0, τ]` such that `τ C_n (κL)^{2n} M_eff ≤ tol`, where the
/// θ-weighted integrands contribute the factor `τ + 2n/κ` to `M_eff`.
fn panel_count(gl: &GaussLegendre, tau: f64, kappa: f64, amplitude: f64, opts: &QuadratureOptions) -> Result<u64> {
    let n2 = 2.0 * gl.len() as f64;
    let eff = amplitude * (1.0 + tau + n2 / kappa);
    let log_budget = ln(opts.abs_tol / (tau * eff)) / ln(10.0) - gl.log10_error_constant();
    let max_rad = pow(10.0, log_budget / n2);
    let needed = (kappa * tau / max_rad).ceil().max(1.0);
    if needed > opts.max_panels as f64 {
        return Err(Error::QuadratureBudget { needed: needed as u64, budget: opts.max_panels });
    }
    Ok(needed as u64)
}

/// Phasors `e^{iκ s_k}` for the node offsets `s_k` of a panel of length `len`.
/// The offsets use the double-double length: a panel that is short by even
/// 1e-22 leaves gaps whose sum is visible against integrands of size 1e16.
fn offsets(gl: &GaussLegendre, kappa: Dd, len: Dd) -> Vec<C64> {
    gl.nodes.iter().map(|x| kappa.mul(len.mul_f64(0.5 * (1.0 + x))).cis()).collect()
}

pub fn quadrature_all(f: &ModeFrequencies, tau: f64, opts: &QuadratureOptions) -> Result<QuadratureSet> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter("tau must be positive"));
    }
    let gl = GaussLegendre::new(ORDER);
    let mut set = QuadratureSet {
        a: C64::new(0.0, 0.0),
        b: C64::new(0.0, 0.0),
        a_dot: C64::new(0.0, 0.0),
        b_dot: C64::new(0.0, 0.0),
        c: C64::new(0.0, 0.0),
        d: C64::new(0.0, 0.0),
        c_dot: C64::new(0.0, 0.0),
        d_dot: C64::new(0.0, 0.0),
        p: C64::new(0.0, 0.0),
        q: C64::new(0.0, 0.0),
        p_dot: C64::new(0.0, 0.0),
        q_dot: C64::new(0.0, 0.0),
        p_unit: C64::new(0.0, 0.0),
        q_unit: C64::new(0.0, 0.0),
        nodes: 0,
    };
    homogeneous_family(f, tau, &gl, opts, &mut set)?;
    carrier_family(f, tau, &gl, opts, &mut set)?;
    Ok(set)
}

/// `(∫₀^τ e^{iκσ} dσ, ∫₀^τ (τ-σ) e^{iκσ} dσ)` by the composite rule, with
/// the error budget `tol/amp`.
///
/// Callers multiply these moments by amplitudes up to `amp` (1e16 and more
/// for small ε), far beyond what f64 node sums can carry. For an exponential
/// the composite sum factors exactly,
/// `Σ_p Σ_k w_k e^{iκ(o_p+s_k)} = (Σ_p e^{iκo_p})(Σ_k w_k e^{iκs_k})`,
/// so it is evaluated in double-double at O(panels + order) cost.
fn exp_moments(
    kappa: Dd,
    tau: f64,
    amp: f64,
    gl: &GaussLegendre,
    opts: &QuadratureOptions,
) -> Result<(C64, C64, u64)> {
    let k_abs = abs(kappa.value()).max(1.0 / tau);
    let panels = panel_count(gl, tau, k_abs, amp, opts)?;
    let len = Dd::ratio(tau, panels);
    let half = len.mul_f64(0.5);
    // one panel: Σ w_k e^{iκs_k} and Σ w_k s_k e^{iκs_k}
    let (mut i0, mut i1) = (DdC::ZERO, DdC::ZERO);
    for (x, w) in gl.nodes_dd.iter().zip(&gl.weights_dd) {
        let s_k = half.mul(x.add(Dd::from(1.0)));
        let e = DdC::cis(kappa.mul(s_k)).scale(w.mul(half));
        i0 = i0.add(e);
        i1 = i1.add(e.scale(s_k));
    }
    // panel origins: Σ e^{iκo_p} and Σ (τ - o_p) e^{iκo_p}
    let (mut g0, mut g1) = (DdC::ZERO, DdC::ZERO);
    for pidx in 0..panels {
        let origin = len.mul_f64(pidx as f64);
        let e = DdC::cis(kappa.mul(origin));
        g0 = g0.add(e);
        g1 = g1.add(e.scale(Dd::from(tau).sub(origin)));
    }
    let m0 = g0.mul(i0);
    let m1 = g1.mul(i0).sub(g0.mul(i1));
    Ok((m0.value(), m1.value(), panels * gl.len() as u64))
}

/// c, d, c', d' and a, b, a', b' over σ ∈ [0, τ] with phasors `e^{iλ±σ}`.
///
/// Every integrand is a combination of `e^{iλ₊σ}` and `e^{iλ₋σ}`. The two
/// are integrated separately and combined afterwards: inside `e⁺λ₊² - e⁻λ₋²`
/// the second term (~1) would be absorbed by the first (~1e16) at almost
/// every node.
fn homogeneous_family(
    f: &ModeFrequencies,
    tau: f64,
    gl: &GaussLegendre,
    opts: &QuadratureOptions,
    set: &mut QuadratureSet,
) -> Result<()> {
    let (lp, lm) = (f.lambda_plus, f.lambda_minus);
    let e2 = f.eps2();
    let gap = lp - lm;
    // largest multiplier applied to a moment
    let amp = {
        let g = abs(gap);
        let big = abs(lp).max(abs(lm));
        (1.0 / (e2 * g)) * big.max(1.0) * big.max(1.0) + abs(lp * lm) * big.max(1.0) / g
    };
    let (p0, p1, np) = exp_moments(f.lambda_plus_dd(), tau, amp, gl, opts)?;
    let (m0, m1, nm) = exp_moments(f.lambda_minus_dd(), tau, amp, gl, opts)?;
    // b(σ) = i(e⁺ - e⁻)/(ε²(λ₋-λ₊)), b' = (λ₊e⁺ - λ₋e⁻)/(ε²(λ₊-λ₋)),
    // a' = iλ₊λ₋(e⁻ - e⁺)/(λ₊-λ₋), and their σ-derivatives
    let inv_b = 1.0 / (e2 * (lm - lp));
    let inv_bd = 1.0 / (e2 * gap);
    let ad_k = lp * lm / gap;
    set.c = I * (p0 - m0) * inv_b;
    set.d = I * (p1 - m1) * inv_b;
    set.c_dot = (p0 * lp - m0 * lm) * inv_bd;
    set.d_dot = (p1 * lp - m1 * lm) * inv_bd;
    set.b = set.c_dot;
    set.a = I * (m0 - p0) * ad_k + 1.0;
    set.a_dot = -(m0 * lm - p0 * lp) * ad_k;
    set.b_dot = I * (p0 * (lp * lp) - m0 * (lm * lm)) * inv_bd + f.nu;
    set.nodes += np + nm;
    Ok(())
}

/// p, q, p', q' (and the unit-carrier variants) over θ ∈ [0, τ].
fn carrier_family(
    f: &ModeFrequencies,
    tau: f64,
    gl: &GaussLegendre,
    opts: &QuadratureOptions,
    set: &mut QuadratureSet,
) -> Result<()> {
    let e2 = f.eps2();
    let omega = f.omega;
    let kappa = 3.0 * f.nu + omega;
    let amp = 1.0 / (e2 * omega) + 1.0 / e2;
    let panels = panel_count(gl, tau, kappa, amp, opts)?;
    let len_dd = Dd::ratio(tau, panels);
    let len = len_dd.hi;
    let omega_dd = f.omega_dd();
    let three_nu = f.nu_dd().mul_f64(3.0);
    let off_w = offsets(gl, omega_dd.neg(), len_dd);
    let off_c = offsets(gl, three_nu, len_dd);
    let half = 0.5 * len;
    let w: Vec<f64> = gl.weights.iter().map(|w| w * half).collect();
    let t_off: Vec<f64> = gl.nodes.iter().map(|x| half * (1.0 + x)).collect();
    // e^{iω(τ-θ)} = e^{iωτ} e^{-iωθ}
    let w_tau = omega_dd.mul_f64(tau).cis();
    let inv_p = 1.0 / (e2 * omega);
    let inv_pd = 1.0 / e2;

    let mut acc = [KahanC::default(); 6];
    for pidx in 0..panels {
        let origin_dd = len_dd.mul_f64(pidx as f64);
        let origin = origin_dd.value();
        let o_w = w_tau * omega_dd.neg().mul(origin_dd).cis();
        let o_c = three_nu.mul(origin_dd).cis();
        let mut s = [C64::new(0.0, 0.0); 6];
        for k in 0..gl.len() {
            let wave = o_w * off_w[k];
            let carrier = o_c * off_c[k];
            let theta = origin + t_off[k];
            let wk = w[k];
            let sin_part = wave.im * inv_p;
            let cos_part = wave.re * inv_pd;
            let ps = carrier * (sin_part * wk);
            let pc = carrier * (cos_part * wk);
            s[0] += ps;
            s[1] += ps * theta;
            s[2] += pc;
            s[3] += pc * theta;
            s[4] += C64::new(sin_part * wk, 0.0);
            s[5] += C64::new(sin_part * wk * theta, 0.0);
        }
        for (a, v) in acc.iter_mut().zip(s) {
            a.add(v);
        }
    }
    set.p = acc[0].value();
    set.q = acc[1].value();
    set.p_dot = acc[2].value();
    set.q_dot = acc[3].value();
    set.p_unit = acc[4].value();
    set.q_unit = acc[5].value();
    set.nodes += panels * gl.len() as u64;
    Ok(())
}
