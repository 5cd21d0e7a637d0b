//! Periodic Fourier grid, coefficient fields and the operations on them.
//!
//! Coefficients follow `ṽ_l = (1/N) Σ_j v_j e^{-iμ_l (x_j - a)}` for
//! `l = -N/2..N/2-1`. Storage is FFT slot order (see [`crate::fft`]); the
//! public accessors take the logical mode index `l`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::Transform;
use crate::math::{sqrt, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralGrid {
    a: f64,
    b: f64,
    n: usize,
}

impl SpectralGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<SpectralGrid> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid("need finite a < b"));
        }
        if n < 4 {
            return Err(Error::InvalidGrid("need at least 4 nodes"));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid("node count must be even"));
        }
        Ok(SpectralGrid { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn length(&self) -> f64 {
        self.b - self.a
    }
    pub fn h(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.a + j as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// `μ_l = 2πl/(b-a)`.
    pub fn mu(&self, l: i64) -> f64 {
        2.0 * PI * l as f64 / self.length()
    }

    /// Storage slot of mode `l`, for `l` in `-N/2..N/2`.
    pub fn slot(&self, l: i64) -> usize {
        let n = self.n as i64;
        debug_assert!(-n / 2 <= l && l < n / 2, "mode {l} out of range");
        l.rem_euclid(n) as usize
    }

    /// Mode index stored at slot `k`.
    pub fn mode(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        let h = (self.n / 2) as i64;
        -h..h
    }

    /// `μ` for every storage slot.
    pub fn mu_slots(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.mu(self.mode(k))).collect()
    }

    /// Same interval with `m` nodes.
    pub fn with_nodes(&self, m: usize) -> Result<SpectralGrid> {
        SpectralGrid::new(self.a, self.b, m)
    }
}

/// Discrete Fourier coefficients of one field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldHat {
    grid: SpectralGrid,
    coeffs: Vec<C64>,
}

impl FieldHat {
    pub fn zeros(grid: SpectralGrid) -> FieldHat {
        FieldHat { grid, coeffs: vec![C64::new(0.0, 0.0); grid.n()] }
    }

    /// Wraps coefficients already in storage slot order.
    pub fn from_slots(grid: SpectralGrid, coeffs: Vec<C64>) -> Result<FieldHat> {
        if coeffs.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: coeffs.len() });
        }
        Ok(FieldHat { grid, coeffs })
    }

    /// Builds a field from `(l, ṽ_l)` pairs; modes not listed are zero.
    pub fn from_modes(grid: SpectralGrid, modes: &[(i64, C64)]) -> FieldHat {
        let mut f = FieldHat::zeros(grid);
        for &(l, v) in modes {
            f.set(l, v);
        }
        f
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn get(&self, l: i64) -> C64 {
        self.coeffs[self.grid.slot(l)]
    }

    pub fn set(&mut self, l: i64, v: C64) {
        let k = self.grid.slot(l);
        self.coeffs[k] = v;
    }

    pub fn slots(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn slots_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_slots(self) -> Vec<C64> {
        self.coeffs
    }

    /// `(l, ṽ_l)` in increasing `l`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.grid.modes().map(move |l| (l, self.get(l)))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same(&self, other: &FieldHat) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn sub(&self, other: &FieldHat) -> Result<FieldHat> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x - y).collect();
        Ok(FieldHat { grid: self.grid, coeffs })
    }

    pub fn scale(&self, s: C64) -> FieldHat {
        FieldHat { grid: self.grid, coeffs: self.coeffs.iter().map(|x| x * s).collect() }
    }
}

/// `ṽ_l ↦ conj(ṽ_{-l})`: the coefficients of the pointwise conjugate field.
/// The Nyquist slot maps to its own conjugate.
pub fn conj_field_slots(src: &[C64], dst: &mut [C64]) {
    let n = src.len();
    debug_assert_eq!(dst.len(), n);
    dst[0] = src[0].conj();
    for k in 1..n {
        dst[k] = src[n - k].conj();
    }
}

pub fn conj_field(f: &FieldHat) -> FieldHat {
    let mut out = FieldHat::zeros(f.grid);
    conj_field_slots(&f.coeffs, &mut out.coeffs);
    out
}

/// A grid paired with a transform plan of matching length.
pub struct Fourier<T> {
    grid: SpectralGrid,
    plan: T,
}

impl<T: Transform> Fourier<T> {
    pub fn new(grid: SpectralGrid, plan: T) -> Result<Fourier<T>> {
        if plan.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: plan.len() });
        }
        Ok(Fourier { grid, plan })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Nodal values to normalized coefficients, in place.
    pub fn forward_in_place(&mut self, data: &mut [C64]) {
        self.plan.forward(data);
        let s = 1.0 / self.grid.n() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    /// Normalized coefficients to nodal values, in place.
    pub fn inverse_in_place(&mut self, data: &mut [C64]) {
        self.plan.inverse(data);
    }

    pub fn to_spectral(&mut self, values: &[C64]) -> Result<FieldHat> {
        if values.len() != self.grid.n() {
            return Err(Error::LengthMismatch { expected: self.grid.n(), got: values.len() });
        }
        let mut coeffs = values.to_vec();
        self.forward_in_place(&mut coeffs);
        Ok(FieldHat { grid: self.grid, coeffs })
    }

    pub fn from_spectral(&mut self, f: &FieldHat) -> Result<Vec<C64>> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut v = f.coeffs.clone();
        self.inverse_in_place(&mut v);
        Ok(v)
    }
}

/// Zero-pads (`m > N`) or truncates (`m < N`) to the `m`-node grid on the
/// same interval.
pub fn resample(f: &FieldHat, m: usize) -> Result<FieldHat> {
    let target = f.grid.with_nodes(m)?;
    let mut out = FieldHat::zeros(target);
    let keep = (f.grid.n().min(m) / 2) as i64;
    for l in -keep..keep {
        out.set(l, f.get(l));
    }
    Ok(out)
}

/// Multiplies mode `l` by `(iμ_l)^order`.
pub fn spectral_derivative(f: &FieldHat, order: u32) -> FieldHat {
    let mut out = f.clone();
    for (k, v) in out.coeffs.iter_mut().enumerate() {
        let ik = C64::new(0.0, f.grid.mu(f.grid.mode(k)));
        *v *= ik.powu(order);
    }
    out
}

/// `sqrt(Σ_l w_l |ṽ_l|²)` with `w_l = Σ_{m ≤ order} μ_l^{2m}`.
pub fn sobolev_norm(f: &FieldHat, order: u32) -> Result<f64> {
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut acc = 0.0;
    for (k, v) in f.coeffs.iter().enumerate() {
        let mu2 = {
            let mu = f.grid.mu(f.grid.mode(k));
            mu * mu
        };
        let w = match order {
            0 => 1.0,
            1 => 1.0 + mu2,
            _ => 1.0 + mu2 + mu2 * mu2,
        };
        acc += w * v.norm_sqr();
    }
    Ok(sqrt(acc))
}

/// Interpolant of `f` sampled at the nodes of the `n`-node grid, `n`
/// dividing `f`'s node count. Modes fold onto their aliases mod `n`.
pub fn sample_onto(f: &FieldHat, n: usize) -> Result<FieldHat> {
    if n == 0 || f.grid.n() % n != 0 {
        return Err(Error::GridMismatch);
    }
    let mut out = FieldHat::zeros(f.grid.with_nodes(n)?);
    for (k, v) in f.coeffs.iter().enumerate() {
        out.coeffs[k % n] += *v;
    }
    Ok(out)
}

/// H² distance on the run's grid, against the reference sampled at the
/// run's nodes. Under-resolved runs are judged by their grid values only.
pub fn h2_distance(run: &FieldHat, reference: &FieldHat) -> Result<f64> {
    if run.grid.a != reference.grid.a || run.grid.b != reference.grid.b {
        return Err(Error::GridMismatch);
    }
    if run.grid.n() > reference.grid.n() {
        return Err(Error::GridMismatch);
    }
    let sampled = sample_onto(reference, run.grid.n())?;
    sobolev_norm(&run.sub(&sampled)?, 2)
}

/// H² norm of the trigonometric interpolant as a function on `(a, b)`:
/// `sqrt(b - a)` times the coefficient norm [`sobolev_norm`]`(f, 2)`.
pub fn h2_norm_continuous(f: &FieldHat) -> Result<f64> {
    Ok(sqrt(f.grid.length()) * sobolev_norm(f, 2)?)
}

/// [`h2_distance`] in the norm of [`h2_norm_continuous`]; the error measure
/// of the convergence tables.
pub fn h2_error(run: &FieldHat, reference: &FieldHat) -> Result<f64> {
    Ok(sqrt(reference.grid.length()) * h2_distance(run, reference)?)
}

/// Zeroes the upper third of the spectrum (the 2/3 rule).
pub fn dealias_slots(grid: &SpectralGrid, data: &mut [C64]) {
    let cut = (grid.n() / 3) as i64;
    for (k, v) in data.iter_mut().enumerate() {
        let l = grid.mode(k);
        if l.abs() > cut || l == -(grid.n() as i64) / 2 {
            *v = C64::new(0.0, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::Fft;
    use crate::math::{cis, exp};
    use proptest::prelude::*;

    fn fourier(a: f64, b: f64, n: usize) -> Fourier<Fft> {
        Fourier::new(SpectralGrid::new(a, b, n).unwrap(), Fft::new(n)).unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = SpectralGrid::new(-16.0, 16.0, 32).unwrap();
        assert_eq!(g.h(), 1.0);
        assert!((g.mu(1) - PI / 16.0).abs() < 1e-15);
        assert_eq!(SpectralGrid::new(-16.0, 16.0, 256).unwrap().h(), 0.125);
        let g = SpectralGrid::new(0.0, 2.0 * PI, 4).unwrap();
        let mut mus: Vec<f64> = g.mu_slots();
        mus.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (m, want) in mus.iter().zip([-2.0, -1.0, 0.0, 1.0]) {
            assert!((m - want).abs() < 1e-15);
        }
        for l in g.modes() {
            assert_eq!(g.mode(g.slot(l)), l);
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(SpectralGrid::new(0.0, 1.0, 5).is_err());
        assert!(SpectralGrid::new(0.0, 1.0, 2).is_err());
        assert!(SpectralGrid::new(1.0, 1.0, 8).is_err());
        assert!(SpectralGrid::new(f64::NAN, 1.0, 8).is_err());
    }

    #[test]
    fn constant_and_pure_modes() {
        let mut f = fourier(-16.0, 16.0, 32);
        let c = C64::new(0.3, -1.2);
        let hat = f.to_spectral(&vec![c; 32]).unwrap();
        for (l, v) in hat.modes() {
            let want = if l == 0 { c } else { C64::new(0.0, 0.0) };
            assert!((v - want).norm() < 1e-15);
        }
        let g = *f.grid();
        let pure: Vec<C64> = (0..32).map(|j| cis(g.mu(1) * (g.node(j) - g.a()))).collect();
        let hat = f.to_spectral(&pure).unwrap();
        for (l, v) in hat.modes() {
            let want = if l == 1 { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-14);
        }
        let nyq = FieldHat::from_modes(g, &[(-16, C64::new(1.0, 0.0))]);
        let vals = f.from_spectral(&nyq).unwrap();
        for (j, v) in vals.iter().enumerate() {
            assert!((v - cis(g.mu(-16) * (g.node(j) - g.a()))).norm() < 1e-13);
        }
        let ones = f.from_spectral(&FieldHat::from_modes(g, &[(0, C64::new(1.0, 0.0))])).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).norm() < 1e-15));
    }

    #[test]
    fn derivatives_and_norms() {
        let mut f = fourier(-16.0, 16.0, 64);
        let g = *f.grid();
        let s: Vec<C64> = g.nodes().iter().map(|x| C64::new(crate::math::sin(PI * x / 16.0), 0.0)).collect();
        let d2 = spectral_derivative(&f.to_spectral(&s).unwrap(), 2);
        let back = f.from_spectral(&d2).unwrap();
        let k2 = (PI / 16.0) * (PI / 16.0);
        for (x, v) in g.nodes().iter().zip(&back) {
            assert!((v.re + k2 * crate::math::sin(PI * x / 16.0)).abs() < 1e-14);
            assert!(v.im.abs() < 1e-14);
        }
        let zero = spectral_derivative(&FieldHat::from_modes(g, &[(0, C64::new(2.0, 1.0))]), 1);
        assert!(zero.slots().iter().all(|v| v.norm() == 0.0));

        let one = FieldHat::from_modes(g, &[(1, C64::new(1.0, 0.0))]);
        let m = PI / 16.0;
        assert!((sobolev_norm(&one, 2).unwrap() - sqrt(1.0 + m * m + m * m * m * m)).abs() < 1e-15);
        let dc = FieldHat::from_modes(g, &[(0, C64::new(1.0, 0.0))]);
        for o in 0..=2 {
            assert_eq!(sobolev_norm(&dc, o).unwrap(), 1.0);
        }
        assert_eq!(sobolev_norm(&FieldHat::zeros(g), 2).unwrap(), 0.0);
        assert_eq!(sobolev_norm(&dc, 3), Err(Error::UnsupportedOrder(3)));
    }

    #[test]
    fn resample_up_reproduces_samples_and_down_projects() {
        let mut coarse = fourier(-16.0, 16.0, 32);
        let mut fine = fourier(-16.0, 16.0, 128);
        let g = *coarse.grid();
        let v: Vec<C64> = g.nodes().iter().map(|x| C64::new(exp(-x * x / 8.0), crate::math::sin(*x))).collect();
        let hat = coarse.to_spectral(&v).unwrap();
        let up = resample(&hat, 128).unwrap();
        let vals = fine.from_spectral(&up).unwrap();
        for j in 0..32 {
            assert!((vals[4 * j] - v[j]).norm() < 1e-13);
        }
        let down = resample(&up, 32).unwrap();
        assert_eq!(down, hat);
        // resample of a derivative equals derivative of the resample
        let a = resample(&spectral_derivative(&hat, 3), 128).unwrap();
        let b = spectral_derivative(&up, 3);
        assert_eq!(a, b);
        assert!(resample(&hat, 31).is_err());
    }

    #[test]
    fn downsample_is_the_least_squares_projection() {
        // Compare against every alternative that perturbs one retained mode:
        // the discrete L² distance to the fine field can only grow.
        let mut fine = fourier(0.0, 2.0 * PI, 32);
        let v: Vec<C64> = (0..32).map(|j| C64::new(crate::math::cos(j as f64 * 1.7), crate::math::sin(j as f64 * j as f64))).collect();
        let hat = fine.to_spectral(&v).unwrap();
        let proj = resample(&hat, 8).unwrap();
        let dist = |c: &FieldHat| sobolev_norm(&resample(c, 32).unwrap().sub(&hat).unwrap(), 0).unwrap();
        let best = dist(&proj);
        for l in -4..4 {
            for d in [C64::new(1e-3, 0.0), C64::new(0.0, -1e-3)] {
                let mut alt = proj.clone();
                alt.set(l, alt.get(l) + d);
                assert!(dist(&alt) > best);
            }
        }
    }

    #[test]
    fn conj_field_matches_pointwise_conjugate() {
        let mut f = fourier(-3.0, 5.0, 16);
        let v: Vec<C64> = (0..16).map(|j| C64::new(j as f64 * 0.3 - 1.0, crate::math::cos(j as f64))).collect();
        let hat = f.to_spectral(&v).unwrap();
        let cv: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        let want = f.to_spectral(&cv).unwrap();
        let got = conj_field(&hat);
        for (a, b) in got.slots().iter().zip(want.slots()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn h2_distance_of_lifted_self_is_zero() {
        let g = SpectralGrid::new(-16.0, 16.0, 64).unwrap();
        let f = FieldHat::from_modes(g, &[(3, C64::new(1.0, 2.0)), (-5, C64::new(0.5, 0.0))]);
        let fine = resample(&f, 256).unwrap();
        assert!(h2_distance(&f, &fine).unwrap() <= 1e-12);
        assert!(h2_distance(&fine, &f).is_err());
    }

    #[test]
    fn sample_onto_matches_values_at_coarse_nodes() {
        let mut fine = fourier(-2.0, 6.0, 64);
        let v: Vec<C64> = (0..64).map(|j| C64::new(crate::math::sin(j as f64 * 0.9), j as f64 * 0.01)).collect();
        let hat = fine.to_spectral(&v).unwrap();
        let mut coarse = fourier(-2.0, 6.0, 16);
        let got = coarse.from_spectral(&sample_onto(&hat, 16).unwrap()).unwrap();
        for (j, z) in got.iter().enumerate() {
            assert!((z - v[4 * j]).norm() < 1e-13);
        }
        assert!(sample_onto(&hat, 24).is_err());
    }

    #[test]
    fn continuous_norm_integrates_over_the_interval() {
        // ∫ |u|² + |u'|² + |u''|² over (-16, 16) for u = e^{iμ₂(x+16)}
        let g = SpectralGrid::new(-16.0, 16.0, 32).unwrap();
        let f = FieldHat::from_modes(g, &[(2, C64::new(1.0, 0.0))]);
        let m2 = g.mu(2) * g.mu(2);
        let want = sqrt(32.0 * (1.0 + m2 + m2 * m2));
        assert!((h2_norm_continuous(&f).unwrap() - want).abs() < 1e-14 * want);
        assert_eq!(h2_error(&f, &f).unwrap(), 0.0);
    }

    fn field(n: usize) -> impl Strategy<Value = Vec<C64>> {
        proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| C64::new(a, b)), n)
    }

    proptest! {
        #[test]
        fn parseval_and_round_trip(v in field(64)) {
            let mut f = fourier(-16.0, 16.0, 64);
            let hat = f.to_spectral(&v).unwrap();
            let nodal: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
            let spec: f64 = hat.slots().iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((nodal - spec).abs() <= 100.0 * f64::EPSILON * nodal.max(1e-300));
            let back = f.from_spectral(&hat).unwrap();
            let norm = sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
            let err = sqrt(back.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>());
            prop_assert!(err <= 100.0 * f64::EPSILON * norm);
            let again = f.to_spectral(&back).unwrap();
            let herr = sobolev_norm(&again.sub(&hat).unwrap(), 0).unwrap();
            prop_assert!(herr <= 100.0 * f64::EPSILON * sobolev_norm(&hat, 0).unwrap());
        }

        #[test]
        fn norms_are_ordered(v in field(32)) {
            let mut f = fourier(-16.0, 16.0, 32);
            let hat = f.to_spectral(&v).unwrap();
            let n0 = sobolev_norm(&hat, 0).unwrap();
            let n1 = sobolev_norm(&hat, 1).unwrap();
            let n2 = sobolev_norm(&hat, 2).unwrap();
            prop_assert!(n0 <= n1 && n1 <= n2);
        }

        #[test]
        fn real_fields_are_conjugate_symmetric(re in proptest::collection::vec(-5.0..5.0f64, 32)) {
            let mut f = fourier(-16.0, 16.0, 32);
            let v: Vec<C64> = re.iter().map(|&x| C64::new(x, 0.0)).collect();
            let hat = f.to_spectral(&v).unwrap();
            for l in -15..16i64 {
                prop_assert!((hat.get(-l) - hat.get(l).conj()).norm() <= 1e-14);
            }
        }
    }
}
