//! Pointwise cubic kernels of the decomposed system, `f(u) = λ|u|²u`.
//!
//! Substituting `u = e^{is/ε²}z₊ + e^{-is/ε²}conj(z₋) + r` splits `f(u)` into
//! the two carrier harmonics (`f±`), the third harmonics (`g±`) and a
//! remainder `w` that vanishes with `r`. Callers apply the kernels node by
//! node and transform the results themselves.

use crate::math::{C64, Dd};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicParams {
    pub lambda: f64,
}

impl CubicParams {
    pub fn new(lambda: f64) -> CubicParams {
        CubicParams { lambda }
    }

    /// `f(u) = λ|u|²u`.
    #[inline]
    pub fn f(&self, u: C64) -> C64 {
        u * (self.lambda * u.norm_sqr())
    }
}

/// `f± = λ(|z±|² + 2|z∓|²) z±`.
#[inline]
pub fn f_pm(zp: C64, zm: C64, params: &CubicParams) -> (C64, C64) {
    let (ap, am) = (zp.norm_sqr(), zm.norm_sqr());
    let l = params.lambda;
    (zp * (l * (ap + 2.0 * am)), zm * (l * (am + 2.0 * ap)))
}

/// s-derivative of [`f_pm`] along `(ż₊, ż₋)`.
#[inline]
pub fn fdot_pm(zp: C64, zm: C64, zp_dot: C64, zm_dot: C64, params: &CubicParams) -> (C64, C64) {
    let l = params.lambda;
    let (ap, am) = (zp.norm_sqr(), zm.norm_sqr());
    let rp = (zp.conj() * zp_dot).re;
    let rm = (zm.conj() * zm_dot).re;
    let plus = zp * (2.0 * l * (rp + 2.0 * rm)) + zp_dot * (l * (ap + 2.0 * am));
    let minus = zm * (2.0 * l * (rm + 2.0 * rp)) + zm_dot * (l * (am + 2.0 * ap));
    (plus, minus)
}

/// `g± = λ z±² z∓`.
#[inline]
pub fn g_pm(zp: C64, zm: C64, params: &CubicParams) -> (C64, C64) {
    let l = params.lambda;
    (zp * zp * zm * l, zm * zm * zp * l)
}

/// s-derivative of [`g_pm`].
#[inline]
pub fn gdot_pm(zp: C64, zm: C64, zp_dot: C64, zm_dot: C64, params: &CubicParams) -> (C64, C64) {
    let l = params.lambda;
    let plus = (zp * zm * zp_dot * 2.0 + zp * zp * zm_dot) * l;
    let minus = (zm * zp * zm_dot * 2.0 + zm * zm * zp_dot) * l;
    (plus, minus)
}

/// `e^{is/ε²}`, with the phase formed in double-double.
pub fn carrier(s: f64, eps: f64) -> C64 {
    Dd::prod(s, 1.0 / (eps * eps)).cis()
}

/// `f(v + r) - f(v)` with `v = e^{is/ε²}z₊ + e^{-is/ε²}conj(z₋)`.
pub fn w_remainder(zp: C64, zm: C64, r: C64, s: f64, eps: f64, params: &CubicParams) -> C64 {
    let e = carrier(s, eps);
    let v = e * zp + e.conj() * zm.conj();
    w_from_parts(v, r, params)
}

/// `f(v + r) - f(v)`, expanded so that the result is exactly zero for `r = 0`.
#[inline]
pub fn w_from_parts(v: C64, r: C64, params: &CubicParams) -> C64 {
    // |v+r|²(v+r) - |v|²v = |v|²r + (2Re(v̄r) + |r|²)(v + r)
    let cross = 2.0 * (v.conj() * r).re + r.norm_sqr();
    (r * v.norm_sqr() + (v + r) * cross) * params.lambda
}

/// The five-term split of `f(u)`; a test oracle for the kernels above.
pub fn reconstruct_f(zp: C64, zm: C64, r: C64, s: f64, eps: f64, params: &CubicParams) -> C64 {
    let e = carrier(s, eps);
    let e3 = e * e * e;
    let (fp, fm) = f_pm(zp, zm, params);
    let (gp, gm) = g_pm(zp, zm, params);
    e * fp + e.conj() * fm.conj() + e3 * gp + e3.conj() * gm.conj() + w_remainder(zp, zm, r, s, eps, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cis, rel_diff};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cx() -> impl Strategy<Value = C64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn examples() {
        let p = CubicParams::new(1.0);
        assert_eq!(f_pm(c(1.0, 0.0), c(0.0, 0.0), &p), (c(1.0, 0.0), c(0.0, 0.0)));
        assert_eq!(f_pm(c(0.0, 0.0), c(0.0, 0.0), &CubicParams::new(-3.0)), (c(0.0, 0.0), c(0.0, 0.0)));
        assert_eq!(g_pm(c(1.0, 0.0), c(0.0, 0.0), &p), (c(0.0, 0.0), c(0.0, 0.0)));
        assert_eq!(g_pm(c(1.0, 1.0), c(2.0, 0.0), &p).0, c(0.0, 4.0));
        let (gp, _) = gdot_pm(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), &p);
        assert_eq!(gp, c(2.0, 0.0));
        // real chain rule: d/ds z³ = 3z²ż
        let (fp, _) = fdot_pm(c(0.7, 0.0), c(0.0, 0.0), c(1.3, 0.0), c(0.0, 0.0), &p);
        assert!((fp - c(3.0 * 0.49 * 1.3, 0.0)).norm() < 1e-15);
        let z = c(0.0, 0.0);
        assert_eq!(fdot_pm(c(1.0, 2.0), c(0.5, -1.0), z, z, &p), (z, z));
        assert_eq!(gdot_pm(c(1.0, 2.0), c(0.5, -1.0), z, z, &p), (z, z));
        assert_eq!(w_remainder(c(1.0, 2.0), c(0.5, -1.0), z, 0.3, 0.5, &p), z);
        let r = c(0.3, -0.4);
        assert!((w_remainder(z, z, r, 0.3, 0.5, &p) - r * r.norm_sqr()).norm() < 1e-16);
        let zp = c(0.8, -0.3);
        assert!((reconstruct_f(zp, z, z, 0.0, 0.5, &p) - zp * zp.norm_sqr()).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn f_pm_is_the_theta_average(zp in cx(), zm in cx(), lam in -2.0..2.0f64) {
            let p = CubicParams::new(lam);
            // (1/2π)∫ f(z₊ + e^{iθ}conj(z₋)) dθ by the 64-point trapezoid rule,
            // exact for the trigonometric polynomial of degree 2 in θ
            let m = 64;
            let mut acc = c(0.0, 0.0);
            for k in 0..m {
                let th = 2.0 * PI * k as f64 / m as f64;
                acc += p.f(zp + cis(th) * zm.conj());
            }
            acc /= m as f64;
            prop_assert!(close(f_pm(zp, zm, &p).0, acc, 1e-12));
            // f₋ is the same average with z₊ and z₋ swapped
            let mut acc = c(0.0, 0.0);
            for k in 0..m {
                let th = 2.0 * PI * k as f64 / m as f64;
                acc += p.f(zm + cis(th) * zp.conj());
            }
            acc /= m as f64;
            prop_assert!(close(f_pm(zp, zm, &p).1, acc, 1e-12));
        }

        #[test]
        fn derivatives_match_finite_differences(
            zp in cx(), zm in cx(), dp in cx(), dm in cx(), lam in -2.0..2.0f64
        ) {
            let p = CubicParams::new(lam);
            let d = 1e-6;
            let fd = |f: &dyn Fn(C64, C64) -> (C64, C64)| {
                let (a1, b1) = f(zp + dp * d, zm + dm * d);
                let (a0, b0) = f(zp - dp * d, zm - dm * d);
                ((a1 - a0) / (2.0 * d), (b1 - b0) / (2.0 * d))
            };
            let (fp, fm) = fdot_pm(zp, zm, dp, dm, &p);
            let (ep, em) = fd(&|a, b| f_pm(a, b, &p));
            prop_assert!(close(fp, ep, 1e-6) && close(fm, em, 1e-6));
            let (gp, gm) = gdot_pm(zp, zm, dp, dm, &p);
            let (ep, em) = fd(&|a, b| g_pm(a, b, &p));
            prop_assert!(close(gp, ep, 1e-6) && close(gm, em, 1e-6));
        }

        #[test]
        fn five_term_split_is_complete(
            zp in cx(), zm in cx(), r in cx(), s in 0.0..1.0f64, eps in 0.01..1.0f64, lam in -2.0..2.0f64
        ) {
            let p = CubicParams::new(lam);
            let e = carrier(s, eps);
            let u = e * zp + e.conj() * zm.conj() + r;
            let want = p.f(u);
            let got = reconstruct_f(zp, zm, r, s, eps, &p);
            prop_assert!(rel_diff(got, want, 1.0) < 1e-12, "{} vs {}", got, want);
        }

        #[test]
        fn kernels_are_gauge_covariant(
            zp in cx(), zm in cx(), r in cx(), dp in cx(), dm in cx(), alpha in 0.0..6.3f64
        ) {
            // z₊ ↦ e^{iα}z₊ while conj(z₋) ↦ e^{iα}conj(z₋), i.e. z₋ ↦ e^{-iα}z₋
            let p = CubicParams::new(1.5);
            let g = cis(alpha);
            let (fp, fm) = f_pm(zp, zm, &p);
            let (hp, hm) = f_pm(g * zp, g.conj() * zm, &p);
            prop_assert!(close(hp, g * fp, 1e-13) && close(hm, g.conj() * fm, 1e-13));
            let (fp, fm) = fdot_pm(zp, zm, dp, dm, &p);
            let (hp, hm) = fdot_pm(g * zp, g.conj() * zm, g * dp, g.conj() * dm, &p);
            prop_assert!(close(hp, g * fp, 1e-13) && close(hm, g.conj() * fm, 1e-13));
            // g₊ = λz₊²z₋ and conj(g₋) = λ conj(z₋)² conj(z₊) both pick up e^{iα}
            let (gp, gm) = g_pm(zp, zm, &p);
            let (kp, km) = g_pm(g * zp, g.conj() * zm, &p);
            prop_assert!(close(kp, g * gp, 1e-13) && close(km.conj(), g * gm.conj(), 1e-13));
            let w0 = w_remainder(zp, zm, r, 0.4, 0.3, &p);
            let w1 = w_remainder(g * zp, g.conj() * zm, g * r, 0.4, 0.3, &p);
            prop_assert!(close(w1, g * w0, 1e-13));
            let f0 = reconstruct_f(zp, zm, r, 0.4, 0.3, &p);
            let f1 = reconstruct_f(g * zp, g.conj() * zm, g * r, 0.4, 0.3, &p);
            prop_assert!(close(f1, g * f0, 1e-12));
        }

        #[test]
        fn swapping_signs_swaps_outputs(zp in cx(), zm in cx(), dp in cx(), dm in cx()) {
            let p = CubicParams::new(-0.7);
            let (a, b) = f_pm(zp, zm, &p);
            prop_assert_eq!(f_pm(zm, zp, &p), (b, a));
            let (a, b) = g_pm(zp, zm, &p);
            prop_assert_eq!(g_pm(zm, zp, &p), (b, a));
            let (a, b) = fdot_pm(zp, zm, dp, dm, &p);
            prop_assert_eq!(fdot_pm(zm, zp, dm, dp, &p), (b, a));
            let (a, b) = gdot_pm(zp, zm, dp, dm, &p);
            prop_assert_eq!(gdot_pm(zm, zp, dm, dp, &p), (b, a));
        }
    }

    #[test]
    fn g_is_the_third_harmonic() {
        // e^{3iθ} harmonic of f(e^{iθ}z₊ + e^{-iθ}conj(z₋))
        let p = CubicParams::new(1.0);
        let (zp, zm) = (c(0.4, 1.1), c(-0.9, 0.2));
        let m = 64;
        let mut acc = c(0.0, 0.0);
        for k in 0..m {
            let th = 2.0 * PI * k as f64 / m as f64;
            let e = cis(th);
            acc += p.f(e * zp + e.conj() * zm.conj()) * cis(-3.0 * th);
        }
        acc /= m as f64;
        assert!(close(acc, g_pm(zp, zm, &p).0, 1e-14));
    }
}
