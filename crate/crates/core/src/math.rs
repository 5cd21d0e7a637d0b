//! Scalar helpers on top of `libm`, plus double-double phase products.
//!
//! Step coefficients for small ε involve phases like `τ/ε²` of order 1e8 rad.
//! A plain f64 product `κ·τ` carries an absolute error of ~1e-8 rad there,
//! which would be visible at the 1e-10 relative level. [`Dd`] keeps the
//! rounding residue of the product so that `e^{iκτ}` is exact up to the
//! rounding of κ itself.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// `|z|` without the overflow-prone naive formula.
#[inline]
pub fn cabs(z: C64) -> f64 {
    hypot(z.re, z.im)
}

/// `e^{ix}`.
#[inline]
pub fn cis(x: f64) -> C64 {
    let (s, c) = libm::sincos(x);
    C64::new(c, s)
}

/// `e^{ix} - 1` without cancellation near zero.
#[inline]
pub fn cis_m1(x: f64) -> C64 {
    let (s, _) = libm::sincos(0.5 * x);
    C64::new(-2.0 * s * s, sin(x))
}

/// Error-free sum: `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free product: `a * b = p + e` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    /// Exact `a + b` (up to double-double precision).
    #[inline]
    pub fn sum(a: f64, b: f64) -> Dd {
        let (s, e) = two_sum(a, b);
        Dd { hi: s, lo: e }
    }

    /// Exact `a * b`.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::renorm(s, e + self.lo + o.lo)
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn mul_f64(self, t: f64) -> Dd {
        let (p, e) = two_prod(self.hi, t);
        Dd::renorm(p, e + self.lo * t)
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    /// `a / n` for a positive integer `n`, to double-double accuracy.
    #[inline]
    pub fn ratio(a: f64, n: u64) -> Dd {
        let nf = n as f64;
        let hi = a / nf;
        let lo = libm::fma(-hi, nf, a) / nf;
        Dd { hi, lo }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.sub(Dd::prod(q1, d));
        Dd::sum(q1, r.hi / d)
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        Dd::sum(q1, q2).add(Dd::from(q3))
    }

    /// `(sin, cos)` to double-double accuracy for `|x| ≲ 1e9`.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let n = round(self.hi / TWO_PI.hi);
        let r = self.sub(TWO_PI.mul_f64(n));
        let m = round(r.hi / HALF_PI.hi);
        let r = r.sub(HALF_PI.mul_f64(m));
        // Taylor on |r| ≤ π/4: the 27th power term is below 1e-31
        let r2 = r.mul(r);
        let (mut s, mut c) = (Dd::ZERO, Dd::ZERO);
        let mut term_s = r;
        let mut term_c = Dd::from(1.0);
        for k in 0..14 {
            s = s.add(term_s);
            c = c.add(term_c);
            let k = k as f64;
            term_s = term_s.mul(r2).div_f64(-(2.0 * k + 2.0) * (2.0 * k + 3.0));
            term_c = term_c.mul(r2).div_f64(-(2.0 * k + 1.0) * (2.0 * k + 2.0));
        }
        match (m as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, s.neg()),
            2 => (s.neg(), c.neg()),
            _ => (c.neg(), s),
        }
    }

    /// `e^{i(hi+lo)}`. The split keeps the large part's argument reduction exact.
    #[inline]
    pub fn cis(self) -> C64 {
        cis(self.hi) * cis(self.lo)
    }

    /// `e^{i(hi+lo)} - 1`.
    #[inline]
    pub fn cis_m1(self) -> C64 {
        let a = cis_m1(self.hi);
        let b = cis_m1(self.lo);
        // (1+a)(1+b) - 1
        a + b + a * b
    }
}

pub const TWO_PI: Dd = Dd { hi: 6.283185307179586, lo: 2.4492935982947064e-16 };
pub const HALF_PI: Dd = Dd { hi: 1.5707963267948966, lo: 6.123233995736766e-17 };

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DdC {
    pub re: Dd,
    pub im: Dd,
}

impl DdC {
    pub const ZERO: DdC = DdC { re: Dd::ZERO, im: Dd::ZERO };

    /// `e^{ix}` to double-double accuracy.
    pub fn cis(x: Dd) -> DdC {
        let (s, c) = x.sin_cos();
        DdC { re: c, im: s }
    }

    #[inline]
    pub fn add(self, o: DdC) -> DdC {
        DdC { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    #[inline]
    pub fn sub(self, o: DdC) -> DdC {
        DdC { re: self.re.sub(o.re), im: self.im.sub(o.im) }
    }

    #[inline]
    pub fn mul(self, o: DdC) -> DdC {
        DdC {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    #[inline]
    pub fn scale(self, t: Dd) -> DdC {
        DdC { re: self.re.mul(t), im: self.im.mul(t) }
    }

    #[inline]
    pub fn value(self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanC {
    sum: C64,
    comp: C64,
}

impl KahanC {
    #[inline]
    pub fn add(&mut self, x: C64) {
        let (re, ere) = two_sum(self.sum.re, x.re);
        let (im, eim) = two_sum(self.sum.im, x.im);
        self.sum = C64::new(re, im);
        self.comp += C64::new(ere, eim);
    }

    #[inline]
    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

/// Relative difference with an absolute floor: `|a-b| / max(|b|, floor)`.
pub fn rel_diff(a: C64, b: C64, floor: f64) -> f64 {
    let d = cabs(a - b);
    let s = cabs(b);
    d / if s > floor { s } else { floor }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_prod_is_exact_for_representable_case() {
        let (p, e) = two_prod(1.0 + f64::EPSILON, 1.0 + f64::EPSILON);
        assert_eq!(p, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(e, f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn dd_cis_is_additive_in_frequency() {
        // (k1 + k2)·τ with k1 + k2 exact: the split and joint phasors must agree
        // far below the ~1e-9 rad rounding error of a plain f64 product.
        let (k1, k2, tau) = (1.0e8, 0.25, 0.2);
        let joint = Dd::prod(k1 + k2, tau).cis();
        let split = Dd::prod(k1, tau).cis() * Dd::prod(k2, tau).cis();
        assert!(cabs(joint - split) < 1e-13);
    }

    #[test]
    fn cis_m1_small() {
        let z = cis_m1(1e-12);
        assert!((z.im - 1e-12).abs() < 1e-28);
        assert!((z.re + 0.5e-24).abs() < 1e-38);
        let d = Dd { hi: 1e-9, lo: 1e-26 }.cis_m1();
        assert!((d.im - (1e-9 + 1e-26)).abs() < 1e-30);
    }

    #[test]
    fn dd_sin_cos_against_known_values() {
        // sin(1) and cos(1) to 32 digits
        let (s, c) = Dd::from(1.0).sin_cos();
        assert!(s.sub(Dd { hi: 0.8414709848078965, lo: 1.776845092935536e-18 }).value().abs() < 1e-30);
        assert!(c.sub(Dd { hi: 0.5403023058681398, lo: -4.760954612604417e-17 }).value().abs() < 1e-30);
        // sin² + cos² = 1 and agreement with libm far from the origin
        for x in [3.0, -7.5, 1234.5678, 4.0e7 + 0.3] {
            let (s, c) = Dd::from(x).sin_cos();
            assert!(s.mul(s).add(c.mul(c)).sub(Dd::from(1.0)).value().abs() < 1e-29);
            assert!((s.value() - sin(x)).abs() < 2e-16 && (c.value() - cos(x)).abs() < 2e-16);
        }
    }

    #[test]
    fn dd_division() {
        let q = Dd::from(1.0).div(Dd::from(3.0));
        assert!(q.mul_f64(3.0).sub(Dd::from(1.0)).value().abs() < 1e-31);
        let q = Dd::from(2.0).div_f64(7.0);
        assert!(q.mul_f64(7.0).sub(Dd::from(2.0)).value().abs() < 1e-31);
    }

    #[test]
    fn kahan_sum_recovers_small_terms() {
        let mut acc = KahanC::default();
        acc.add(C64::new(1e16, 0.0));
        for _ in 0..10 {
            acc.add(C64::new(1.0, 0.0));
        }
        acc.add(C64::new(-1e16, 0.0));
        assert_eq!(acc.value().re, 10.0);
    }
}
