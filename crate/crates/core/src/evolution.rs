//! Time-dependent Schrödinger evolution.
//!
//! [`SplitStepper`] is the second-order Strang splitting
//! `e^{-iV dt/2hbar} e^{-iT dt/hbar} e^{-iV dt/2hbar}` with the kinetic factor
//! applied in Fourier space. Negative `dt` runs the exact inverse step.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{apply_operator, Grid, Operator, RealField, Units, Wavefunction};
use crate::C64;

/// Residual allowed by [`evolve_eigenstate_checked`].
pub const EIGENRELATION_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct SplitStepper {
    grid: Grid,
    dt: f64,
    half_kick: Vec<C64>,
    drift: Vec<C64>,
}

impl SplitStepper {
    pub fn new(potential: &RealField, units: Units, dt: f64) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::Config(format!(
                "time step must be finite and nonzero (got {dt})"
            )));
        }
        let grid = potential.grid().clone();
        let half_kick = potential
            .values()
            .iter()
            .map(|&v| C64::from_polar(1.0, -0.5 * v * dt / units.hbar))
            .collect();
        let drift = grid
            .wavenumbers()
            .iter()
            .map(|&k| C64::from_polar(1.0, -units.hbar * k * k * dt / (2.0 * units.mass)))
            .collect();
        Ok(Self {
            grid,
            dt,
            half_kick,
            drift,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// One Strang step on raw amplitudes.
    pub fn step_in_place(&self, amps: &mut [C64]) {
        for (z, k) in amps.iter_mut().zip(&self.half_kick) {
            *z *= k;
        }
        self.grid.fft().forward(amps);
        for (z, d) in amps.iter_mut().zip(&self.drift) {
            *z *= d;
        }
        self.grid.fft().inverse(amps);
        for (z, k) in amps.iter_mut().zip(&self.half_kick) {
            *z *= k;
        }
    }

    /// Returns `psi` advanced by `n_steps` steps; `psi` is untouched.
    pub fn advance(&self, psi: &Wavefunction, n_steps: usize) -> Result<Wavefunction> {
        if psi.grid() != &self.grid {
            return Err(Error::Shape(format!(
                "state grid {:?} differs from stepper grid {:?}",
                psi.grid(),
                self.grid
            )));
        }
        let mut amps = psi.amplitudes().to_vec();
        for _ in 0..n_steps {
            self.step_in_place(&mut amps);
        }
        Wavefunction::from_amplitudes(&self.grid, amps, psi.time() + n_steps as f64 * self.dt)
    }
}

/// `n_steps` Strang steps of size `dt`.
pub fn evolve(
    psi: &Wavefunction,
    potential: &RealField,
    units: Units,
    dt: f64,
    n_steps: usize,
) -> Result<Wavefunction> {
    if n_steps == 0 {
        return Ok(psi.clone());
    }
    SplitStepper::new(potential, units, dt)?.advance(psi, n_steps)
}

/// Number of equal steps no longer than `max_dt` that cover `duration`,
/// and the resulting signed step.
pub fn step_plan(duration: f64, max_dt: f64) -> Result<(usize, f64)> {
    if !(max_dt > 0.0 && max_dt.is_finite()) || !duration.is_finite() {
        return Err(Error::Config(format!(
            "invalid step plan: duration {duration}, max step {max_dt}"
        )));
    }
    if duration == 0.0 {
        return Ok((0, max_dt));
    }
    let n = (duration.abs() / max_dt - 1e-9).ceil().max(1.0) as usize;
    Ok((n, duration / n as f64))
}

/// Evolves from `psi.time()` to `t_target` with steps no longer than `max_dt`
/// (backwards if `t_target` is earlier).
pub fn evolve_to(
    psi: &Wavefunction,
    potential: &RealField,
    units: Units,
    t_target: f64,
    max_dt: f64,
) -> Result<Wavefunction> {
    let (n, dt) = step_plan(t_target - psi.time(), max_dt)?;
    Ok(evolve(psi, potential, units, dt, n)?.with_time(t_target))
}

/// Exact evolution of an energy eigenstate: multiplies by
/// `e^{-i E (t - t0) / hbar}` and stamps time `t`.
pub fn evolve_eigenstate_analytic(
    psi: &Wavefunction,
    energy: f64,
    units: Units,
    t: f64,
) -> Wavefunction {
    let phase = C64::from_polar(1.0, -energy * (t - psi.time()) / units.hbar);
    psi.scaled(phase).with_time(t)
}

/// Like [`evolve_eigenstate_analytic`] but first checks
/// `max |H psi - E psi| <= 1e-5`.
pub fn evolve_eigenstate_checked(
    psi: &Wavefunction,
    energy: f64,
    potential: &RealField,
    units: Units,
    t: f64,
) -> Result<Wavefunction> {
    let h = apply_operator(Operator::Hamiltonian(potential), psi, units)?;
    let residual = h
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(hz, z)| (hz - z * energy).norm())
        .fold(0.0, f64::max);
    if residual > EIGENRELATION_TOLERANCE {
        return Err(Error::Eigenrelation {
            residual,
            tolerance: EIGENRELATION_TOLERANCE,
        });
    }
    Ok(evolve_eigenstate_analytic(psi, energy, units, t))
}
