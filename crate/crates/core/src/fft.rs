//! Length-N discrete Fourier transforms in FFT slot order.
//!
//! Slot `k` holds mode `l = k` for `k < N/2` and `l = k - N` otherwise.
//! Both passes are unnormalized; callers apply the `1/N`.

use alloc::vec::Vec;

use crate::math::{cis, C64};

/// A pair of unnormalized DFT passes of fixed length.
///
/// `forward`: `X_k = Σ_j x_j e^{-2πi jk/N}`; `inverse`: `x_j = Σ_k X_k e^{+2πi jk/N}`.
/// Implementations may keep internal scratch, hence `&mut self`.
pub trait Transform {
    fn len(&self) -> usize;
    fn forward(&mut self, data: &mut [C64]);
    fn inverse(&mut self, data: &mut [C64]);
}

/// Builds transforms of a requested length; lets generic code allocate
/// plans for resampled grids.
pub trait TransformFactory {
    type Plan: Transform;
    fn plan(&self, n: usize) -> Self::Plan;
}

/// Iterative radix-2 FFT for power-of-two lengths, direct DFT otherwise.
#[derive(Clone, Debug)]
pub struct Fft {
    n: usize,
    // e^{-2πi k/N}, k < N/2 (radix-2) or k < N (direct)
    twiddles: Vec<C64>,
    scratch: Vec<C64>,
    radix2: bool,
}

impl Fft {
    pub fn new(n: usize) -> Fft {
        assert!(n > 0, "transform length must be positive");
        let radix2 = n.is_power_of_two();
        let m = if radix2 { n / 2 } else { n };
        let twiddles = (0..m)
            .map(|k| cis(-2.0 * core::f64::consts::PI * (k as f64) / (n as f64)))
            .collect();
        let scratch = if radix2 { Vec::new() } else { alloc::vec![C64::new(0.0, 0.0); n] };
        Fft { n, twiddles, scratch, radix2 }
    }

    fn radix2_pass(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        if n == 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    fn direct_pass(&mut self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (j, x) in data.iter().enumerate() {
                let w = self.twiddles[(j * k) % n];
                acc += x * if inverse { w.conj() } else { w };
            }
            self.scratch[k] = acc;
        }
        data.copy_from_slice(&self.scratch);
    }
}

impl Transform for Fft {
    fn len(&self) -> usize {
        self.n
    }

    fn forward(&mut self, data: &mut [C64]) {
        assert_eq!(data.len(), self.n, "transform length mismatch");
        if self.radix2 {
            self.radix2_pass(data, false);
        } else {
            self.direct_pass(data, false);
        }
    }

    fn inverse(&mut self, data: &mut [C64]) {
        assert_eq!(data.len(), self.n, "transform length mismatch");
        if self.radix2 {
            self.radix2_pass(data, true);
        } else {
            self.direct_pass(data, true);
        }
    }
}

/// Factory for the built-in [`Fft`].
#[derive(Clone, Copy, Debug, Default)]
pub struct BuiltinFft;

impl TransformFactory for BuiltinFft {
    type Plan = Fft;
    fn plan(&self, n: usize) -> Fft {
        Fft::new(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive(x: &[C64], sign: f64) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * cis(sign * 2.0 * core::f64::consts::PI * ((j * k) % n) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<C64> {
        (0..n)
            .map(|j| C64::new(crate::math::sin(1.3 * j as f64 + 0.2), crate::math::cos(0.7 * (j * j) as f64)))
            .collect()
    }

    #[test]
    fn radix2_matches_naive_dft() {
        for n in [1usize, 2, 4, 8, 64] {
            let x = sample(n);
            let mut y = x.clone();
            Fft::new(n).forward(&mut y);
            let want = naive(&x, -1.0);
            for (a, b) in y.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12 * n as f64);
            }
            let mut z = x.clone();
            Fft::new(n).inverse(&mut z);
            let want = naive(&x, 1.0);
            for (a, b) in z.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12 * n as f64);
            }
        }
    }

    #[test]
    fn direct_fallback_for_non_power_of_two() {
        let n = 12;
        let x = sample(n);
        let mut y = x.clone();
        let mut plan = Fft::new(n);
        plan.forward(&mut y);
        plan.inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a / n as f64 - b).norm() < 1e-14);
        }
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn wrong_length_panics() {
        let mut v = vec![C64::new(0.0, 0.0); 3];
        Fft::new(4).forward(&mut v);
    }
}
