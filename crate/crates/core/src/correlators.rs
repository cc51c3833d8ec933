//! Two-time position correlations `<q(s) q(t)>` computed three ways
//! (grid quantum mechanics, the Fock oracle, and Bohmian trajectories),
//! plus the lag sweep that compares their signs.

use alloc::format;
use alloc::vec::Vec;

use crate::bohm::{
    integrate_trajectories, local_expectation, sample_initial_positions, LocalKind, SamplingScheme,
    TrajectoryEnsemble, TrajectoryOptions,
};
use crate::error::{Error, Result};
use crate::evolution::evolve_to;
use crate::exec::Executor;
use crate::fock::{build_fock_operators, FockOperators, TRUNCATION_MARGIN};
use crate::grid::{apply_operator, inner_product, Grid, Operator, RealField, Units, Wavefunction};
use crate::oscillator::{build_state, oscillator_potential, OscillatorParams, StateSpec};
use crate::C64;

/// Largest allowed `|<f> - (<Re f> + i <Im f>)|`.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-6;

/// Rows whose symmetrized correlations are smaller than this fraction of
/// `2 <q^2>` get no sign verdict.
pub const INDETERMINATE_FRACTION: f64 = 1e-3;

/// Smallest Fock dimension used by sweeps.
pub const MIN_FOCK_DIMENSION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    GridQm,
    FockQm,
    Bohm,
    Analytic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::GridQm => "grid_qm",
            Method::FockQm => "fock_qm",
            Method::Bohm => "bohm",
            Method::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRecord {
    pub s: f64,
    pub t: f64,
    pub value: C64,
    /// `<q(s)q(t) + q(t)q(s)>`
    pub symmetrized: f64,
    pub method: Method,
}

impl CorrelationRecord {
    /// Quantum record; the symmetrized part is `2 Re value`.
    pub fn quantum(s: f64, t: f64, value: C64, method: Method) -> Self {
        Self {
            s,
            t,
            value,
            symmetrized: 2.0 * value.re,
            method,
        }
    }

    /// Trajectory record; products of numbers commute so it is real.
    pub fn bohm(s: f64, t: f64, value: f64) -> Self {
        Self {
            s,
            t,
            value: C64::new(value, 0.0),
            symmetrized: 2.0 * value,
            method: Method::Bohm,
        }
    }

    pub fn is_consistent(&self) -> bool {
        let sym_ok = (self.symmetrized - 2.0 * self.value.re).abs()
            <= 1e-12 * self.symmetrized.abs().max(1.0);
        sym_ok && (self.method != Method::Bohm || self.value.im == 0.0)
    }
}

/// `<psi0| q(s) q(t) |psi0>` with times measured from `psi0.time()`, as
/// `<q psi(s), U(s - t) q psi(t)>`.
pub fn qm_two_time_correlation(
    psi0: &Wavefunction,
    potential: &RealField,
    units: Units,
    s: f64,
    t: f64,
    dt: f64,
) -> Result<CorrelationRecord> {
    let t0 = psi0.time();
    let psi_t = evolve_to(psi0, potential, units, t0 + t, dt)?;
    let q_psi_t = apply_operator(Operator::Position, &psi_t, units)?;
    let moved = evolve_to(&q_psi_t, potential, units, t0 + s, dt)?;
    let psi_s = if s == t {
        psi_t
    } else {
        evolve_to(psi0, potential, units, t0 + s, dt)?
    };
    let q_psi_s = apply_operator(Operator::Position, &psi_s, units)?;
    let value = inner_product(&q_psi_s, &moved)?;
    Ok(CorrelationRecord::quantum(s, t, value, Method::GridQm))
}

/// Same record; `symmetrized` uses `<q(t)q(s)> = conj <q(s)q(t)>`.
pub fn qm_symmetrized_correlation(
    psi0: &Wavefunction,
    potential: &RealField,
    units: Units,
    s: f64,
    t: f64,
    dt: f64,
) -> Result<CorrelationRecord> {
    qm_two_time_correlation(psi0, potential, units, s, t, dt)
}

/// `<q(s)q(t)>` in the truncated eigenbasis.
pub fn fock_two_time_correlation(
    ops: &FockOperators,
    coefficients: &[C64],
    s: f64,
    t: f64,
) -> Result<CorrelationRecord> {
    let value = ops.two_time_correlation(coefficients, s, t)?;
    Ok(CorrelationRecord::quantum(s, t, value, Method::FockQm))
}

/// Ground-state closed form `(hbar / 2 m omega) e^{-i omega (s - t)}`.
pub fn analytic_ground_correlation(params: &OscillatorParams, s: f64, t: f64) -> CorrelationRecord {
    let value = C64::from_polar(params.ground_q2(), -params.omega() * (s - t));
    CorrelationRecord::quantum(s, t, value, Method::Analytic)
}

/// `sum_j w_j x_j(s) x_j(t)` over recorded paths.
pub fn bohm_two_time_correlation(
    ensemble: &TrajectoryEnsemble,
    s: f64,
    t: f64,
) -> Result<CorrelationRecord> {
    let mut sum = 0.0;
    for p in ensemble.particles() {
        sum += p.weight * p.position_at(s)? * p.position_at(t)?;
    }
    Ok(CorrelationRecord::bohm(s, t, sum))
}

/// `(<Re f>, <Im f>)` for `f = q(s)q(t)`, the expectations of the Hermitian
/// parts `(f + f^dag)/2` and `(f - f^dag)/2i`, assembled from both operator
/// orderings and checked against `record.value`.
pub fn complex_expectation_decomposition(
    record: &CorrelationRecord,
    psi0: &Wavefunction,
    potential: &RealField,
    units: Units,
    s: f64,
    t: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    let forward = qm_two_time_correlation(psi0, potential, units, s, t, dt)?.value;
    let reverse = qm_two_time_correlation(psi0, potential, units, t, s, dt)?.value;
    let re_part = 0.5 * (forward + reverse);
    let im_part = (forward - reverse) / C64::new(0.0, 2.0);
    let rebuilt = C64::new(re_part.re, im_part.re);
    let deviation = [
        (rebuilt - record.value).norm(),
        re_part.im.abs(),
        im_part.im.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if deviation > DECOMPOSITION_TOLERANCE {
        return Err(Error::Consistency {
            deviation,
            tolerance: DECOMPOSITION_TOLERANCE,
        });
    }
    Ok((re_part.re, im_part.re))
}

/// `xi cos(omega s)`, the ground-state local value of `q(s)` at `xi`.
pub fn heisenberg_local_expectation(xi: f64, s: f64, params: &OscillatorParams) -> f64 {
    xi * (params.omega() * s).cos()
}

/// The same quantity through the generic local-expectation machinery.
pub fn heisenberg_local_expectation_from_state(
    xi: f64,
    s: f64,
    params: &OscillatorParams,
    psi0: &Wavefunction,
) -> Result<f64> {
    local_expectation(
        LocalKind::HeisenbergQ { s, params: *params },
        psi0,
        params.units(),
        xi,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flag {
    Agree,
    Contradiction,
    Indeterminate,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Agree => "AGREE",
            Flag::Contradiction => "CONTRADICTION",
            Flag::Indeterminate => "INDETERMINATE",
        }
    }

    /// Sign comparison of two symmetrized correlations, withholding a
    /// verdict when either is below `threshold` in magnitude.
    pub fn compare(qm: f64, bohm: f64, threshold: f64) -> Self {
        if qm.abs() < threshold || bohm.abs() < threshold {
            Flag::Indeterminate
        } else if qm.signum() == bohm.signum() {
            Flag::Agree
        } else {
            Flag::Contradiction
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub params: OscillatorParams,
    pub grid: Grid,
    /// Largest Schrödinger step.
    pub dt: f64,
    pub ensemble_size: usize,
    pub sampling: SamplingScheme,
    pub record_every: usize,
    /// `None` picks `max(len + margin, 16)` from the state's coefficients.
    pub fock_dimension: Option<usize>,
    /// Lags `tau >= 0`; rows use `s = tau`, `t = 0`.
    pub lags: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub grid: CorrelationRecord,
    pub fock: CorrelationRecord,
    pub bohm: CorrelationRecord,
    pub flag: Flag,
}

#[derive(Debug, Clone)]
pub struct CorrelationSweep {
    pub state: StateSpec,
    pub rows: Vec<SweepRow>,
    /// `<q^2>` at `t = 0` by grid quadrature.
    pub q2: f64,
    pub fock_dimension: usize,
    pub ensemble: TrajectoryEnsemble,
}

impl CorrelationSweep {
    pub fn row_at(&self, tau: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| (r.tau - tau).abs() <= 1e-12 * tau.abs().max(1.0))
    }
}

/// Correlations of `q(tau)` with `q(0)` for every lag in `cfg`, by all
/// three methods. Lags are independent and run through `exec`; the
/// trajectory ensemble is integrated once up to the largest lag.
pub fn correlation_sweep<E: Executor>(
    spec: &StateSpec,
    cfg: &SweepConfig,
    exec: &E,
) -> Result<CorrelationSweep> {
    if cfg.lags.iter().any(|&tau| !(tau >= 0.0 && tau.is_finite())) {
        return Err(Error::Config("lags must be finite and nonnegative".into()));
    }
    let units = cfg.params.units();
    let potential = oscillator_potential(&cfg.params, &cfg.grid);
    let psi0 = build_state(spec, &cfg.params, &cfg.grid)?;
    let coefficients = spec.fock_coefficients()?;
    let fock_dimension = cfg
        .fock_dimension
        .unwrap_or_else(|| (coefficients.len() + TRUNCATION_MARGIN).max(MIN_FOCK_DIMENSION));
    let ops = build_fock_operators(fock_dimension, &cfg.params)?;

    let quantum: Vec<Result<(CorrelationRecord, CorrelationRecord)>> =
        exec.map(&cfg.lags, |&tau| {
            let grid = qm_two_time_correlation(&psi0, &potential, units, tau, 0.0, cfg.dt)?;
            let fock = fock_two_time_correlation(&ops, &coefficients, tau, 0.0)?;
            Ok((grid, fock))
        });

    let start =
        sample_initial_positions(&psi0, cfg.ensemble_size, cfg.sampling)?.with_source(spec.clone());
    let horizon = cfg.lags.iter().copied().fold(0.0, f64::max);
    let ensemble = if horizon > 0.0 {
        let options = TrajectoryOptions::new(cfg.dt).record_every(cfg.record_every);
        integrate_trajectories(&start, &psi0, &potential, units, horizon, &options, exec)?.ensemble
    } else {
        start
    };

    let q2: f64 = cfg
        .grid
        .points()
        .zip(psi0.amplitudes())
        .map(|(x, z)| x * x * z.norm_sqr())
        .sum::<f64>()
        * cfg.grid.dx();
    let threshold = INDETERMINATE_FRACTION * 2.0 * q2;
    let mut rows = Vec::with_capacity(cfg.lags.len());
    for (&tau, records) in cfg.lags.iter().zip(quantum) {
        let (grid, fock) = records?;
        let bohm = bohm_two_time_correlation(&ensemble, tau, 0.0)?;
        let flag = Flag::compare(grid.symmetrized, bohm.symmetrized, threshold);
        rows.push(SweepRow {
            tau,
            grid,
            fock,
            bohm,
            flag,
        });
    }
    Ok(CorrelationSweep {
        state: spec.clone(),
        rows,
        q2,
        fock_dimension,
        ensemble,
    })
}

/// The ground-state sweep, where quantum and Bohmian correlations part ways.
pub fn contradiction_report<E: Executor>(cfg: &SweepConfig, exec: &E) -> Result<CorrelationSweep> {
    correlation_sweep(&StateSpec::Eigenstate(0), cfg, exec)
}

/// Largest deviation between grid and Fock values over a sweep.
pub fn max_grid_fock_deviation(sweep: &CorrelationSweep) -> f64 {
    sweep
        .rows
        .iter()
        .map(|r| (r.grid.value - r.fock.value).norm())
        .fold(0.0, f64::max)
}

/// Convenience check that `lags` is sorted and lies within the horizon of
/// an ensemble; used before reusing an ensemble for new lags.
pub fn check_lags(ensemble: &TrajectoryEnsemble, lags: &[f64]) -> Result<()> {
    let horizon = ensemble.horizon();
    match lags.iter().find(|&&tau| tau > horizon) {
        Some(&tau) => Err(Error::Config(format!(
            "lag {tau} exceeds the trajectory horizon {horizon}"
        ))),
        None => Ok(()),
    }
}
