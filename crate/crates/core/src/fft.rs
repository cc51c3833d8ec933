//! In-place iterative radix-2 FFT.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

/// Precomputed plan for power-of-two transforms.
///
/// `forward` uses the `e^{-2 pi i jk/n}` kernel without scaling; `inverse`
/// applies the conjugate kernel and divides by `n`, so the pair round-trips.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<C64>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Config(alloc::format!(
                "FFT length {n} is not a power of two"
            )));
        }
        let twiddles = (0..n / 2)
            .map(|j| C64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Ok(Self {
            n,
            twiddles,
            bitrev,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, false);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, true);
        let scale = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        assert_eq!(data.len(), self.n, "FFT length mismatch");
        for (i, &j) in self.bitrev.iter().enumerate() {
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let stride = self.n / len;
            for start in (0..self.n).step_by(len) {
                for j in 0..half {
                    let w = self.twiddles[j * stride];
                    let w = if inverse { w.conj() } else { w };
                    let u = data[start + j];
                    let v = data[start + j + half] * w;
                    data[start + j] = u + v;
                    data[start + j + half] = u - v;
                }
            }
            len <<= 1;
        }
    }
}
