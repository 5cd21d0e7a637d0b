//! Dormand–Prince 5(4) with standard step-size control, for complex states.
//!
//! Used by the oracles only; nothing on the solver's hot path depends on it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, pow, sqrt, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// First trial step; chosen automatically when `None`.
    pub h0: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_steps: 10_000_000, h0: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    pub y: Vec<C64>,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[C64], t1: f64, opts: &OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if !(t1 > t0) {
        return Err(Error::InvalidParameter("need t1 > t0"));
    }
    if !(opts.rtol > 0.0 && opts.atol >= 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive"));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let z = || vec![C64::new(0.0, 0.0); n];
    let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (z(), z(), z(), z(), z(), z(), z());
    let mut tmp = z();
    let mut y_new = z();
    let mut evals = 0;

    let scale = |a: &[C64], b: &[C64], i: usize| opts.atol + opts.rtol * a[i].norm().max(b[i].norm());
    let rms = |v: &[C64], a: &[C64], b: &[C64]| {
        if n == 0 {
            return 0.0;
        }
        let s: f64 = (0..n)
            .map(|i| {
                let q = v[i].norm() / scale(a, b, i);
                q * q
            })
            .sum();
        sqrt(s / n as f64)
    };

    f(t0, &y, &mut k1);
    evals += 1;
    let mut h = match opts.h0 {
        Some(h) => h,
        None => {
            // Hairer–Wanner starting step
            let d0 = rms(&y, &y, &y);
            let d1 = rms(&k1, &y, &y);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            for i in 0..n {
                tmp[i] = y[i] + k1[i] * h0;
            }
            f(t0 + h0, &tmp, &mut k2);
            evals += 1;
            for i in 0..n {
                k2[i] -= k1[i];
            }
            let d2 = rms(&k2, &y, &y) / h0;
            let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { pow(0.01 / d1.max(d2), 0.2) };
            (100.0 * h0).min(h1)
        }
    };
    h = h.min(t1 - t0);

    let mut t = t0;
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut last_rejected = false;
    while t < t1 {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::StepBudget { t, steps: accepted + rejected });
        }
        if h < 1e-14 * abs(t).max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h * A21);
        }
        f(t + C2 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        f(t + C3 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        f(t + C4 * h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        f(t + C5 * h, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        f(t + h, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * h;
        }
        let t_new = if last { t1 } else { t + h };
        f(t_new, &y_new, &mut k7);
        evals += 6;
        for i in 0..n {
            tmp[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        }
        let err = rms(&tmp, &y, &y_new);
        if !err.is_finite() {
            h *= 0.1;
            rejected += 1;
            last_rejected = true;
            continue;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * pow(err, -0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = t_new;
            core::mem::swap(&mut y, &mut y_new);
            core::mem::swap(&mut k1, &mut k7);
            accepted += 1;
            h *= if last_rejected { fac.min(1.0) } else { fac };
            last_rejected = false;
        } else {
            rejected += 1;
            last_rejected = true;
            h *= fac.min(1.0);
        }
    }
    Ok(OdeSolution { y, accepted, rejected, evaluations: evals })
}
