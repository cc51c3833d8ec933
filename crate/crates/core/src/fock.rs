//! Truncated energy-eigenbasis oracle for the harmonic oscillator.
//!
//! Dense `N x N` matrices for `q`, `p`, `H` built from the ladder operators.
//! `H` is diagonal, so Heisenberg evolution is an exact phase conjugation and
//! correlations are plain matrix-vector products. This path shares no code
//! with the grid pipeline and serves as its reference.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::oscillator::OscillatorParams;
use crate::C64;

/// Empty top levels required so that `q(s) q(t)` never reaches the
/// truncation edge.
pub const TRUNCATION_MARGIN: usize = 2;

/// Dense row-major complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Position,
    Momentum,
}

#[derive(Debug, Clone)]
pub struct FockOperators {
    params: OscillatorParams,
    q: Matrix,
    p: Matrix,
    h: Matrix,
}

/// `q = sqrt(hbar/2m omega) (a + a^dag)`, `p = i sqrt(hbar m omega/2) (a^dag - a)`,
/// `H = diag(hbar omega (n + 1/2))`.
pub fn build_fock_operators(dimension: usize, params: &OscillatorParams) -> Result<FockOperators> {
    if dimension < 2 {
        return Err(Error::Config(format!(
            "Fock dimension must be at least 2 (got {dimension})"
        )));
    }
    let mut a = Matrix::zeros(dimension);
    for n in 1..dimension {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    let (m, w, hbar) = (params.mass(), params.omega(), params.hbar());
    let q = (&a + &a_dag).scale(C64::new((hbar / (2.0 * m * w)).sqrt(), 0.0));
    let p = (&a_dag - &a).scale(C64::new(0.0, (hbar * m * w / 2.0).sqrt()));
    let mut h = Matrix::zeros(dimension);
    for n in 0..dimension {
        h[(n, n)] = C64::new(params.energy(n), 0.0);
    }
    Ok(FockOperators {
        params: *params,
        q,
        p,
        h,
    })
}

impl FockOperators {
    pub fn dimension(&self) -> usize {
        self.q.dim
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    fn schrodinger(&self, which: Quadrature) -> &Matrix {
        match which {
            Quadrature::Position => &self.q,
            Quadrature::Momentum => &self.p,
        }
    }

    /// `e^{iHt/hbar} A e^{-iHt/hbar}`: element `(m, n)` picks up
    /// `e^{i omega (m - n) t}`.
    pub fn heisenberg(&self, which: Quadrature, t: f64) -> Matrix {
        let base = self.schrodinger(which);
        let mut out = base.clone();
        let w = self.params.omega();
        for m in 0..base.dim {
            for n in 0..base.dim {
                if base[(m, n)] != C64::new(0.0, 0.0) {
                    let levels = m as f64 - n as f64;
                    out[(m, n)] = base[(m, n)] * C64::from_polar(1.0, levels * w * t);
                }
            }
        }
        out
    }

    fn check_state(&self, coefficients: &[C64]) -> Result<()> {
        let usable = self.dimension().saturating_sub(TRUNCATION_MARGIN);
        if let Some(level) = coefficients
            .iter()
            .enumerate()
            .skip(usable)
            .find(|(_, c)| **c != C64::new(0.0, 0.0))
            .map(|(n, _)| n)
        {
            return Err(Error::Truncation {
                level,
                dimension: self.dimension(),
            });
        }
        Ok(())
    }

    fn padded(&self, coefficients: &[C64]) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dimension()];
        for (slot, c) in v.iter_mut().zip(coefficients) {
            *slot = *c;
        }
        v
    }

    /// `c^dag A c`
    pub fn expectation(&self, coefficients: &[C64], op: &Matrix) -> Result<C64> {
        self.check_state(coefficients)?;
        let c = self.padded(coefficients);
        let ac = op.mul_vec(&c);
        Ok(c.iter().zip(&ac).map(|(a, b)| a.conj() * b).sum())
    }

    /// `<q(s) q(t)> = c^dag q(s) q(t) c`
    pub fn two_time_correlation(&self, coefficients: &[C64], s: f64, t: f64) -> Result<C64> {
        self.check_state(coefficients)?;
        let c = self.padded(coefficients);
        let qt_c = self.heisenberg(Quadrature::Position, t).mul_vec(&c);
        let qs_qt_c = self.heisenberg(Quadrature::Position, s).mul_vec(&qt_c);
        Ok(c.iter().zip(&qs_qt_c).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Free-function form of [`FockOperators::heisenberg`].
pub fn heisenberg_operator(which: Quadrature, t: f64, ops: &FockOperators) -> Matrix {
    ops.heisenberg(which, t)
}

/// Free-function form of [`FockOperators::two_time_correlation`].
pub fn oracle_two_time_correlation(
    coefficients: &[C64],
    s: f64,
    t: f64,
    ops: &FockOperators,
) -> Result<C64> {
    ops.two_time_correlation(coefficients, s, t)
}
