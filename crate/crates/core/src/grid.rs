//! Uniform periodic lattice, wavefunctions on it, and the primitive
//! position/momentum/energy operators with density and current.
//!
//! Spectral derivatives assume periodic boundaries; states are expected to
//! be negligible at the domain edges.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::C64;

struct Lattice {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
    fft: Fft,
    wavenumbers: Vec<f64>,
}

/// Uniform grid `x_k = x_min + k dx`, `k = 0..n_points`, with periodic
/// identification of `x_max` and `x_min`.
///
/// Cheap to clone; clones share the FFT plan.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<Lattice>,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::Config(format!(
                "grid bounds must satisfy x_min < x_max (got [{x_min}, {x_max}])"
            )));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_points must be a power of two >= 8 (got {n_points})"
            )));
        }
        let dx = (x_max - x_min) / n_points as f64;
        let dk = 2.0 * PI / (n_points as f64 * dx);
        let wavenumbers = (0..n_points)
            .map(|j| {
                if j < n_points / 2 {
                    j as f64 * dk
                } else {
                    (j as f64 - n_points as f64) * dk
                }
            })
            .collect();
        Ok(Self {
            inner: Arc::new(Lattice {
                x_min,
                x_max,
                n_points,
                dx,
                fft: Fft::new(n_points)?,
                wavenumbers,
            }),
        })
    }

    pub fn x_min(&self) -> f64 {
        self.inner.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.inner.x_max
    }

    pub fn n_points(&self) -> usize {
        self.inner.n_points
    }

    pub fn dx(&self) -> f64 {
        self.inner.dx
    }

    pub fn point(&self, k: usize) -> f64 {
        self.inner.x_min + k as f64 * self.inner.dx
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points()).map(move |k| self.point(k))
    }

    /// Angular wavenumbers in FFT order: `0, dk, ..., (n/2-1) dk, -n/2 dk, ..., -dk`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    pub fn fft(&self) -> &Fft {
        &self.inner.fft
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min() && x <= self.x_max()
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "grid mismatch: {self:?} vs {other:?}"
            )))
        }
    }

    /// Applies a Fourier multiplier `m(kappa)` to `data`.
    pub fn spectral_multiply(&self, data: &[C64], multiplier: impl Fn(f64) -> C64) -> Vec<C64> {
        let mut buf = data.to_vec();
        self.fft().forward(&mut buf);
        for (z, &k) in buf.iter_mut().zip(self.wavenumbers()) {
            *z *= multiplier(k);
        }
        self.fft().inverse(&mut buf);
        buf
    }

    /// Spectral first derivative. The Nyquist mode is dropped so real input
    /// stays real.
    pub fn derivative(&self, data: &[C64]) -> Vec<C64> {
        let nyquist = self.n_points() / 2;
        let mut buf = data.to_vec();
        self.fft().forward(&mut buf);
        for (j, (z, &k)) in buf.iter_mut().zip(self.wavenumbers()).enumerate() {
            *z = if j == nyquist {
                C64::new(0.0, 0.0)
            } else {
                *z * C64::new(0.0, k)
            };
        }
        self.fft().inverse(&mut buf);
        buf
    }

    pub fn derivative_real(&self, values: &[f64]) -> Vec<f64> {
        let data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.derivative(&data).into_iter().map(|z| z.re).collect()
    }

    pub fn second_derivative_real(&self, values: &[f64]) -> Vec<f64> {
        let data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.spectral_multiply(&data, |k| C64::new(-k * k, 0.0))
            .into_iter()
            .map(|z| z.re)
            .collect()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.x_min() == other.x_min()
                && self.x_max() == other.x_max()
                && self.n_points() == other.n_points())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("x_min", &self.x_min())
            .field("x_max", &self.x_max())
            .field("n_points", &self.n_points())
            .field("dx", &self.dx())
            .finish()
    }
}

/// Mass and reduced Planck constant, the two constants every kinetic term needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub mass: f64,
    pub hbar: f64,
}

impl Units {
    pub const NATURAL: Units = Units {
        mass: 1.0,
        hbar: 1.0,
    };

    pub fn new(mass: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite() && hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Config(format!(
                "mass and hbar must be positive and finite (got m = {mass}, hbar = {hbar})"
            )));
        }
        Ok(Self { mass, hbar })
    }
}

/// Complex amplitudes on a grid at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: Grid,
    amplitudes: Vec<C64>,
    time: f64,
}

impl Wavefunction {
    /// Wraps raw amplitudes without normalizing.
    pub fn from_amplitudes(grid: &Grid, amplitudes: Vec<C64>, time: f64) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::Shape(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            amplitudes,
            time,
        })
    }

    /// Samples `f` on the grid and normalizes.
    pub fn from_fn(grid: &Grid, time: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        let amplitudes = grid.points().map(f).collect();
        Self::from_amplitudes(grid, amplitudes, time)?.normalized()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// `sum |psi_k|^2 dx`
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_squared().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain(format!(
                "cannot normalize state with norm {norm}"
            )));
        }
        for z in self.amplitudes.iter_mut() {
            *z /= norm;
        }
        Ok(self)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            amplitudes: self.amplitudes.iter().map(|&z| z * factor).collect(),
            time: self.time,
        }
    }

    /// Sup-norm distance between amplitude vectors.
    pub fn max_abs_diff(&self, other: &Wavefunction) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn derivative(&self) -> Vec<C64> {
        self.grid.derivative(&self.amplitudes)
    }
}

/// Real-valued field on a grid, e.g. a density, current or potential.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
    time: f64,
}

impl RealField {
    pub fn new(grid: &Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Shape(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            time,
        })
    }

    pub fn from_fn(grid: &Grid, time: f64, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.points().map(f).collect(),
            time,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum f_k dx`
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// Cubic interpolation at `x`.
    pub fn at(&self, x: f64) -> f64 {
        crate::interp::cubic(&self.grid, &self.values, x)
    }
}

/// The primitive operators of the position representation.
#[derive(Debug, Clone, Copy)]
pub enum Operator<'a> {
    /// Multiplication by `x`.
    Position,
    /// `(hbar / i) d/dx`, spectrally.
    Momentum,
    /// `p^2 / 2m`, as the Fourier multiplier `hbar^2 kappa^2 / 2m`.
    Kinetic,
    Potential(&'a RealField),
    Hamiltonian(&'a RealField),
}

/// Applies `op` to `psi`. The result keeps the timestamp and is not renormalized.
pub fn apply_operator(op: Operator<'_>, psi: &Wavefunction, units: Units) -> Result<Wavefunction> {
    let grid = psi.grid();
    let amps = psi.amplitudes();
    let out: Vec<C64> = match op {
        Operator::Position => amps
            .iter()
            .zip(grid.points())
            .map(|(&z, x)| z * x)
            .collect(),
        Operator::Momentum => psi
            .derivative()
            .into_iter()
            .map(|d| d * C64::new(0.0, -units.hbar))
            .collect(),
        Operator::Kinetic => kinetic(grid, amps, units),
        Operator::Potential(v) => {
            grid.check_same(v.grid())?;
            amps.iter()
                .zip(v.values())
                .map(|(&z, &vk)| z * vk)
                .collect()
        }
        Operator::Hamiltonian(v) => {
            grid.check_same(v.grid())?;
            kinetic(grid, amps, units)
                .into_iter()
                .zip(amps.iter().zip(v.values()))
                .map(|(t, (&z, &vk))| t + z * vk)
                .collect()
        }
    };
    Wavefunction::from_amplitudes(grid, out, psi.time())
}

fn kinetic(grid: &Grid, amps: &[C64], units: Units) -> Vec<C64> {
    let c = units.hbar * units.hbar / (2.0 * units.mass);
    grid.spectral_multiply(amps, |k| C64::new(c * k * k, 0.0))
}

/// `sum conj(phi_k) psi_k dx`
pub fn inner_product(phi: &Wavefunction, psi: &Wavefunction) -> Result<C64> {
    phi.grid().check_same(psi.grid())?;
    let sum: C64 = phi
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * phi.grid().dx())
}

/// `<psi, A psi>`; the real part for Hermitian `A`.
pub fn expectation(op: Operator<'_>, psi: &Wavefunction, units: Units) -> Result<C64> {
    inner_product(psi, &apply_operator(op, psi, units)?)
}

/// `P_k = |psi_k|^2`
pub fn probability_density(psi: &Wavefunction) -> RealField {
    RealField {
        grid: psi.grid().clone(),
        values: psi.amplitudes().iter().map(|z| z.norm_sqr()).collect(),
        time: psi.time(),
    }
}

/// `J = Re[conj(psi) (hbar / i m) dpsi/dx] = (hbar/m) Im[conj(psi) dpsi/dx]`
pub fn probability_current(psi: &Wavefunction, units: Units) -> RealField {
    let c = units.hbar / units.mass;
    let values = psi
        .amplitudes()
        .iter()
        .zip(psi.derivative())
        .map(|(z, d)| c * (z.conj() * d).im)
        .collect();
    RealField {
        grid: psi.grid().clone(),
        values,
        time: psi.time(),
    }
}

/// Discrete continuity residual `(P_after - P_before)/dt + d/dx (J_before + J_after)/2`.
pub fn continuity_residual(
    psi_before: &Wavefunction,
    psi_after: &Wavefunction,
    units: Units,
) -> Result<RealField> {
    psi_before.grid().check_same(psi_after.grid())?;
    let dt = psi_after.time() - psi_before.time();
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::Config(format!(
            "continuity residual needs a nonzero time step (got {dt})"
        )));
    }
    let grid = psi_before.grid();
    let (p0, p1) = (
        probability_density(psi_before),
        probability_density(psi_after),
    );
    let (j0, j1) = (
        probability_current(psi_before, units),
        probability_current(psi_after, units),
    );
    let mid: Vec<f64> = j0
        .values
        .iter()
        .zip(&j1.values)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let div = grid.derivative_real(&mid);
    let values = p0
        .values
        .iter()
        .zip(&p1.values)
        .zip(div)
        .map(|((a, b), d)| (b - a) / dt + d)
        .collect();
    Ok(RealField {
        grid: grid.clone(),
        values,
        time: 0.5 * (psi_before.time() + psi_after.time()),
    })
}
