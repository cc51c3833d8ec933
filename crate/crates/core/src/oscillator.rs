//! Harmonic-oscillator parameters, potential and state constructors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField, Units, Wavefunction};
use crate::C64;

/// Largest Fock level a coherent-state expansion may reach.
pub const MAX_EXPANSION_LEVEL: usize = 200;
/// Coherent expansions stop once the discarded probability is below this.
pub const COHERENT_TAIL: f64 = 1e-14;
/// Edge amplitude above which an eigenstate does not fit the domain.
pub const EDGE_AMPLITUDE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    mass: f64,
    omega: f64,
    hbar: f64,
    period: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("omega", omega), ("hbar", hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite (got {v})"
                )));
            }
        }
        Ok(Self {
            mass,
            omega,
            hbar,
            period: TAU / omega,
        })
    }

    /// `hbar = m = omega = 1`
    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            hbar: 1.0,
            period: TAU,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn units(&self) -> Units {
        Units {
            mass: self.mass,
            hbar: self.hbar,
        }
    }

    /// `E_n = hbar omega (n + 1/2)`
    pub fn energy(&self, n: usize) -> f64 {
        self.hbar * self.omega * (n as f64 + 0.5)
    }

    /// Oscillator length `sqrt(hbar / m omega)`.
    pub fn length(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }

    /// Ground-state `<q^2> = hbar / 2 m omega`.
    pub fn ground_q2(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.omega)
    }
}

/// `V(x) = m omega^2 x^2 / 2`
pub fn oscillator_potential(params: &OscillatorParams, grid: &Grid) -> RealField {
    let c = 0.5 * params.mass * params.omega * params.omega;
    RealField::from_fn(grid, 0.0, |x| c * x * x)
}

/// Normalized Hermite functions `phi_0..=phi_{n_max}` at `x`, via the
/// three-term recurrence on the normalized functions.
pub fn hermite_functions_at(params: &OscillatorParams, x: f64, n_max: usize) -> Vec<f64> {
    let xi = x / params.length();
    let mut out = Vec::with_capacity(n_max + 1);
    let phi0 = (params.length() * PI.sqrt()).powf(-0.5) * (-0.5 * xi * xi).exp();
    out.push(phi0);
    if n_max >= 1 {
        out.push(2f64.sqrt() * xi * phi0);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Hermite functions on every grid point: `table[n][k] = phi_n(x_k)`.
pub fn hermite_table(params: &OscillatorParams, grid: &Grid, n_max: usize) -> Vec<Vec<f64>> {
    let mut table = vec![Vec::with_capacity(grid.n_points()); n_max + 1];
    for x in grid.points() {
        for (n, v) in hermite_functions_at(params, x, n_max)
            .into_iter()
            .enumerate()
        {
            table[n].push(v);
        }
    }
    table
}

/// Real eigenstate `n`, normalized on the grid, at time 0.
pub fn eigenstate(n: usize, params: &OscillatorParams, grid: &Grid) -> Result<Wavefunction> {
    for edge in [grid.x_min(), grid.x_max()] {
        let amp = hermite_functions_at(params, edge, n)[n].abs();
        if amp >= EDGE_AMPLITUDE {
            return Err(Error::Domain(format!(
                "eigenstate {n} has amplitude {amp:e} at the domain edge x = {edge}"
            )));
        }
    }
    let amps = hermite_table(params, grid, n)
        .pop()
        .expect("table has n + 1 rows")
        .into_iter()
        .map(|v| C64::new(v, 0.0))
        .collect();
    Wavefunction::from_amplitudes(grid, amps, 0.0)?.normalized()
}

/// Which oscillator state to prepare.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Eigenstate(usize),
    /// Glauber coherent state `|alpha>`.
    Coherent(C64),
    /// Coefficients on the eigenbasis, index = level.
    Superposition(Vec<C64>),
}

impl StateSpec {
    /// Checked superposition; coefficients must have unit norm within 1e-12.
    pub fn superposition(coefficients: Vec<C64>) -> Result<Self> {
        let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if coefficients.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "superposition coefficients must have unit norm (sum |c|^2 = {norm})"
            )));
        }
        Ok(Self::Superposition(coefficients))
    }

    pub fn is_ground_state(&self) -> bool {
        match self {
            StateSpec::Eigenstate(n) => *n == 0,
            StateSpec::Coherent(a) => *a == C64::new(0.0, 0.0),
            StateSpec::Superposition(c) => c.iter().skip(1).all(|z| *z == C64::new(0.0, 0.0)),
        }
    }

    /// Expansion coefficients in the energy eigenbasis.
    pub fn fock_coefficients(&self) -> Result<Vec<C64>> {
        match self {
            StateSpec::Eigenstate(n) => {
                let mut c = vec![C64::new(0.0, 0.0); n + 1];
                c[*n] = C64::new(1.0, 0.0);
                Ok(c)
            }
            StateSpec::Coherent(alpha) => coherent_coefficients(*alpha),
            StateSpec::Superposition(c) => Ok(c.clone()),
        }
    }
}

/// `c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!)`, truncated once the Poisson
/// tail bound drops below [`COHERENT_TAIL`].
pub fn coherent_coefficients(alpha: C64) -> Result<Vec<C64>> {
    let mean = alpha.norm_sqr();
    let mut c = C64::new((-0.5 * mean).exp(), 0.0);
    let mut out = vec![c];
    for n in 0..MAX_EXPANSION_LEVEL {
        // remaining weight sum_{k>n} |c_k|^2 <= |c_{n+1}|^2 / (1 - mean/(n+2))
        let next = c * alpha / ((n + 1) as f64).sqrt();
        let ratio = mean / (n as f64 + 2.0);
        if ratio < 1.0 && next.norm_sqr() / (1.0 - ratio) < COHERENT_TAIL {
            return Ok(out);
        }
        out.push(next);
        c = next;
    }
    Err(Error::Domain(format!(
        "coherent state alpha = {alpha} needs more than {MAX_EXPANSION_LEVEL} levels"
    )))
}

/// Builds the state on the grid from its eigenbasis expansion and
/// normalizes it.
pub fn build_state(
    spec: &StateSpec,
    params: &OscillatorParams,
    grid: &Grid,
) -> Result<Wavefunction> {
    match spec {
        StateSpec::Eigenstate(n) => eigenstate(*n, params, grid),
        StateSpec::Coherent(alpha) => {
            if alpha.norm() > 3.0 {
                return Err(Error::Domain(format!(
                    "coherent amplitude |alpha| = {} exceeds 3",
                    alpha.norm()
                )));
            }
            from_coefficients(&coherent_coefficients(*alpha)?, params, grid)
        }
        StateSpec::Superposition(c) => {
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!("superposition norm {norm} is not 1")));
            }
            if c.len() > MAX_EXPANSION_LEVEL {
                return Err(Error::Domain(format!(
                    "superposition uses {} levels",
                    c.len()
                )));
            }
            for (n, z) in c.iter().enumerate() {
                if *z != C64::new(0.0, 0.0) {
                    eigenstate(n, params, grid)?;
                }
            }
            from_coefficients(c, params, grid)
        }
    }
}

fn from_coefficients(c: &[C64], params: &OscillatorParams, grid: &Grid) -> Result<Wavefunction> {
    let table = hermite_table(params, grid, c.len() - 1);
    let amps = (0..grid.n_points())
        .map(|k| c.iter().zip(&table).map(|(&cn, row)| cn * row[k]).sum())
        .collect();
    Wavefunction::from_amplitudes(grid, amps, 0.0)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{apply_operator, expectation, inner_product, Operator};
    use approx::assert_relative_eq;
    use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn setup() -> (OscillatorParams, Grid) {
        (
            OscillatorParams::natural(),
            Grid::new(-10.0, 10.0, 1024).unwrap(),
        )
    }

    #[test]
    fn params_invariants() {
        let p = OscillatorParams::new(2.0, 3.0, 1.0).unwrap();
        assert!((p.period() * p.omega() - TAU).abs() <= 2.0 * f64::EPSILON * TAU);
        assert!(OscillatorParams::new(0.0, 1.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, f64::NAN, 1.0).is_err());
        assert_eq!(
            OscillatorParams::new(1.0, 1.0, 1.0).unwrap(),
            OscillatorParams::natural()
        );
    }

    #[test]
    fn potential_values() {
        let g = Grid::new(-4.0, 4.0, 16).unwrap();
        let v = oscillator_potential(&OscillatorParams::natural(), &g);
        assert_eq!(v.values()[8], 0.0); // x = 0
        assert_eq!(v.values()[12], 2.0); // x = 2
        let heavy = OscillatorParams::new(2.0, 3.0, 1.0).unwrap();
        assert_eq!(oscillator_potential(&heavy, &g).values()[10], 9.0); // x = 1
    }

    #[test]
    fn ground_state_closed_form() {
        let (p, g) = setup();
        let psi0 = eigenstate(0, &p, &g).unwrap();
        assert_relative_eq!(psi0.amplitudes()[512].re, PI.powf(-0.25), epsilon = 1e-12);
        assert_relative_eq!(psi0.amplitudes()[512].re, 0.751126, epsilon = 1e-6);
        assert!(psi0.amplitudes().iter().all(|z| z.im.abs() <= 1e-15));
        for (x, z) in g.points().zip(psi0.amplitudes()) {
            assert!((z.re - PI.powf(-0.25) * (-0.5 * x * x).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn first_excited_energy() {
        let (p, g) = setup();
        let v = oscillator_potential(&p, &g);
        let psi1 = eigenstate(1, &p, &g).unwrap();
        let e = expectation(Operator::Hamiltonian(&v), &psi1, p.units()).unwrap();
        assert!((e.re - 1.5).abs() < 1e-8);
    }

    #[test]
    fn orthonormal_parity_and_eigenrelation() {
        let (p, g) = setup();
        let v = oscillator_potential(&p, &g);
        let states: Vec<_> = (0..=8).map(|n| eigenstate(n, &p, &g).unwrap()).collect();
        for (m, a) in states.iter().enumerate() {
            for (n, b) in states.iter().enumerate() {
                let ip = inner_product(a, b).unwrap();
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!(
                    (ip - C64::new(expected, 0.0)).norm() < 1e-9,
                    "<{m}|{n}> = {ip}"
                );
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let amps = a.amplitudes();
            for k in 1..g.n_points() / 2 {
                assert!((amps[k] - amps[g.n_points() - k] * sign).norm() <= 1e-12);
            }
            let h = apply_operator(Operator::Hamiltonian(&v), a, p.units()).unwrap();
            let peak = amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let err = h
                .amplitudes()
                .iter()
                .zip(amps)
                .map(|(hz, z)| (hz - z * p.energy(m)).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-6 * p.energy(m) * peak, "n = {m}: {err}");
        }
    }

    #[test]
    fn narrow_domain_is_rejected() {
        let p = OscillatorParams::natural();
        let g = Grid::new(-3.0, 3.0, 256).unwrap();
        assert!(matches!(eigenstate(0, &p, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn coherent_states() {
        let (p, g) = setup();
        let c0 = build_state(&StateSpec::Coherent(C64::new(0.0, 0.0)), &p, &g).unwrap();
        assert!(c0.max_abs_diff(&eigenstate(0, &p, &g).unwrap()) <= 1e-12);

        let c1 = build_state(&StateSpec::Coherent(C64::new(1.0, 0.0)), &p, &g).unwrap();
        let q = expectation(Operator::Position, &c1, p.units()).unwrap();
        assert!((q.re - SQRT_2).abs() < 1e-6);
        // closed form: displaced ground state; a 1e-14 probability tail
        // leaves amplitude errors around 1e-7
        for (x, z) in g.points().zip(c1.amplitudes()) {
            let d = x - SQRT_2;
            assert!((z.re - PI.powf(-0.25) * (-0.5 * d * d).exp()).abs() < 1e-6);
        }

        assert!(build_state(&StateSpec::Coherent(C64::new(3.5, 0.0)), &p, &g).is_err());
        let c3 = build_state(&StateSpec::Coherent(C64::new(0.0, 3.0)), &p, &g).unwrap();
        assert!((c3.norm_squared() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_tail_is_small() {
        let alpha = C64::new(2.0, 1.0);
        let c = coherent_coefficients(alpha).unwrap();
        let kept: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!(1.0 - kept < 1e-13);
    }

    #[test]
    fn superposition_state() {
        let (p, g) = setup();
        let half = C64::new(FRAC_1_SQRT_2, 0.0);
        let spec = StateSpec::superposition(vec![half, half]).unwrap();
        let psi = build_state(&spec, &p, &g).unwrap();
        let q = expectation(Operator::Position, &psi, p.units()).unwrap();
        assert!((q.re - FRAC_1_SQRT_2).abs() < 1e-6);
        assert!(StateSpec::superposition(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
        assert!(StateSpec::superposition(vec![]).is_err());
    }
}
