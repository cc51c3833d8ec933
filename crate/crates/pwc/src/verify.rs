//! The self-check suite behind `pwc verify`.
//!
//! Every check reports a measured number, its target and tolerance. Checks
//! that involve coordinates, momenta, energies or correlations scale their
//! tolerances by the oscillator's natural units, so non-natural parameters
//! are judged on the same footing.

use std::f64::consts::FRAC_1_SQRT_2;

use pwc_core::bohm::{
    bohm_expectation, integrate_trajectories, ks_distance, phase_field, quantum_potential,
    sample_initial_positions, LocalField, LocalKind, SamplingScheme, TrajectoryOptions,
};
use pwc_core::correlators::{
    complex_expectation_decomposition, correlation_sweep, heisenberg_local_expectation,
    heisenberg_local_expectation_from_state, qm_two_time_correlation, Flag, SweepConfig,
};
use pwc_core::evolution::{evolve, evolve_eigenstate_analytic, evolve_to};
use pwc_core::fock::{build_fock_operators, Quadrature};
use pwc_core::grid::{
    apply_operator, continuity_residual, expectation, inner_product, probability_density, Operator,
};
use pwc_core::oscillator::{build_state, eigenstate, oscillator_potential};
use pwc_core::{Error, Executor, RealField, StateSpec, Wavefunction, C64};
use serde::Serialize;

use crate::config::Resolved;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `|measured - target| <= tolerance`.
    pub fn near(name: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        let passed = (measured - target).abs() <= tolerance;
        Self {
            name: name.into(),
            measured,
            target,
            tolerance,
            passed,
            note: None,
        }
    }

    /// A nonnegative deviation that must stay below `tolerance`.
    pub fn deviation(name: &str, measured: f64, tolerance: f64) -> Self {
        Self::near(name, measured, 0.0, tolerance)
    }

    pub fn failed(name: &str, note: String) -> Self {
        Self {
            name: name.into(),
            measured: f64::NAN,
            target: 0.0,
            tolerance: 0.0,
            passed: false,
            note: Some(note),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

struct Ctx<'a, E> {
    cfg: &'a Resolved,
    exec: &'a E,
    v: RealField,
    /// `sqrt(hbar / m omega)`
    ell: f64,
    /// `2 <q^2>` in the ground state
    two_q2: f64,
}

impl<E: Executor> Ctx<'_, E> {
    fn state(&self, spec: &StateSpec) -> pwc_core::Result<Wavefunction> {
        build_state(spec, &self.cfg.params, &self.cfg.grid)
    }

    fn coherent(&self) -> StateSpec {
        StateSpec::Coherent(C64::new(1.0, 0.0))
    }

    fn superposition(&self) -> StateSpec {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        StateSpec::Superposition(vec![h, h])
    }

    fn period(&self) -> f64 {
        self.cfg.period()
    }

    fn evolve_to(&self, psi: &Wavefunction, t: f64) -> pwc_core::Result<Wavefunction> {
        evolve_to(psi, &self.v, self.cfg.params.units(), t, self.cfg.dt)
    }

    fn state_at(&self, spec: &StateSpec, t: f64) -> pwc_core::Result<Wavefunction> {
        self.evolve_to(&self.state(spec)?, t)
    }
}

type CheckFn<E> = fn(&Ctx<'_, E>) -> pwc_core::Result<Vec<Check>>;

/// Runs every check; computation errors become failed checks.
pub fn run_suite<E: Executor>(cfg: &Resolved, exec: &E) -> Vec<Check> {
    let ctx = Ctx {
        cfg,
        exec,
        v: oscillator_potential(&cfg.params, &cfg.grid),
        ell: cfg.params.length(),
        two_q2: 2.0 * cfg.params.ground_q2(),
    };
    let groups: [(&str, CheckFn<E>); 16] = [
        ("grid", grid_checks),
        ("states", state_checks),
        ("evolution.period_phase", period_phase),
        ("evolution.unitarity", unitarity),
        ("evolution.energy_drift", energy_drift),
        ("evolution.order_ratio", order_ratio),
        ("evolution.continuity", continuity),
        ("evolution.picture_equivalence", picture_equivalence),
        ("fock", fock_checks),
        ("bohm.stillness", stillness),
        ("bohm.single_time_agreement", single_time_agreement),
        ("bohm.equivariance", equivariance),
        ("bohm.kinetic_identity", kinetic_identity),
        ("correlators.sweep", sweep_checks),
        ("correlators.decomposition", decomposition),
        ("correlators.heisenberg_local", heisenberg_local),
    ];
    let mut out = Vec::new();
    for (name, f) in groups {
        match f(&ctx) {
            Ok(checks) => out.extend(checks),
            Err(e) => out.push(Check::failed(name, e.to_string())),
        }
    }
    out
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |a, b| if b.is_nan() || b > a { b } else { a })
}

fn grid_checks<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let u = c.cfg.params.units();
    let specs = [
        StateSpec::Eigenstate(0),
        StateSpec::Eigenstate(8),
        c.coherent(),
        c.superposition(),
    ];
    let mut norm_dev: f64 = 0.0;
    for spec in &specs {
        let psi = c.state(spec)?;
        let stepped = evolve(&psi, &c.v, u, c.cfg.dt, 100)?;
        norm_dev = norm_dev
            .max((psi.norm_squared() - 1.0).abs())
            .max((stepped.norm_squared() - 1.0).abs());
    }

    let g = &c.cfg.grid;
    let data: Vec<C64> = (0..g.n_points())
        .map(|k| C64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos() * 0.5))
        .collect();
    let mut round = data.clone();
    g.fft().forward(&mut round);
    g.fft().inverse(&mut round);
    let parseval = max_of(round.iter().zip(&data).map(|(a, b)| (a - b).norm()));

    let phi = c.state(&StateSpec::Coherent(C64::new(1.0, 0.5)))?;
    let psi = c.state(&c.superposition())?;
    let mut herm: f64 = 0.0;
    for op in [
        Operator::Position,
        Operator::Momentum,
        Operator::Kinetic,
        Operator::Potential(&c.v),
        Operator::Hamiltonian(&c.v),
    ] {
        let lhs = inner_product(&phi, &apply_operator(op, &psi, u)?)?;
        let rhs = inner_product(&psi, &apply_operator(op, &phi, u)?)?;
        herm = herm.max((lhs - rhs.conj()).norm() / lhs.norm().max(1.0));
    }
    Ok(vec![
        Check::deviation("grid.normalization", norm_dev, 1e-9),
        Check::deviation("grid.parseval", parseval, 1e-12),
        Check::deviation("grid.hermiticity", herm, 1e-9),
    ])
}

fn state_checks<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let p = &c.cfg.params;
    let states: Vec<Wavefunction> = (0..=8)
        .map(|n| eigenstate(n, p, &c.cfg.grid))
        .collect::<Result<_, _>>()?;
    let mut ortho: f64 = 0.0;
    let mut eig: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((inner_product(a, b)? - C64::new(want, 0.0)).norm());
        }
        let h = apply_operator(Operator::Hamiltonian(&c.v), a, p.units())?;
        let peak = max_of(a.amplitudes().iter().map(|z| z.norm()));
        let residual = max_of(
            h.amplitudes()
                .iter()
                .zip(a.amplitudes())
                .map(|(hz, z)| (hz - z * p.energy(i)).norm()),
        );
        eig = eig.max(residual / (p.energy(i) * peak));
    }
    let mut checks = vec![
        Check::deviation("states.orthonormality", ortho, 1e-9),
        Check::deviation("states.eigenrelation", eig, 1e-6),
    ];
    let g = &c.cfg.grid;
    if g.x_min() == -g.x_max() {
        let mut parity: f64 = 0.0;
        for (n, s) in states.iter().enumerate() {
            let a = s.amplitudes();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for k in 1..a.len() {
                parity = parity.max((a[k] - a[a.len() - k] * sign).norm());
            }
        }
        checks.push(Check::deviation("states.parity", parity, 1e-12));
    }
    Ok(checks)
}

fn period_phase<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let p = &c.cfg.params;
    let psi0 = eigenstate(0, p, &c.cfg.grid)?;
    let evolved = c.evolve_to(&psi0, c.period())?;
    let exact = evolve_eigenstate_analytic(&psi0, p.energy(0), p.units(), c.period());
    let scale = max_of(psi0.amplitudes().iter().map(|z| z.norm()));
    Ok(vec![Check::deviation(
        "evolution.period_phase",
        evolved.max_abs_diff(&exact) / scale,
        1e-6,
    )])
}

fn unitarity<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let psi = c.state(&c.coherent())?;
    let out = evolve(&psi, &c.v, c.cfg.params.units(), c.cfg.dt, 10_000)?;
    Ok(vec![Check::deviation(
        "evolution.unitarity",
        (out.norm_squared() - psi.norm_squared()).abs(),
        1e-10,
    )])
}

fn energy_drift<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let u = c.cfg.params.units();
    let mut drift: f64 = 0.0;
    for spec in [StateSpec::Eigenstate(2), c.coherent(), c.superposition()] {
        let psi = c.state(&spec)?;
        let e0 = expectation(Operator::Hamiltonian(&c.v), &psi, u)?.re;
        let e1 = expectation(
            Operator::Hamiltonian(&c.v),
            &c.evolve_to(&psi, c.period())?,
            u,
        )?
        .re;
        drift = drift.max(((e1 - e0) / e0).abs());
    }
    Ok(vec![Check::deviation(
        "evolution.energy_drift",
        drift,
        1e-8,
    )])
}

/// Halving study at the configured step: eigenstate 1 over half a period.
fn order_ratio<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let p = &c.cfg.params;
    let psi = eigenstate(1, p, &c.cfg.grid)?;
    let t = 0.5 * c.period();
    let exact = evolve_eigenstate_analytic(&psi, p.energy(1), p.units(), t);
    let err = |max_dt: f64| -> pwc_core::Result<f64> {
        Ok(evolve_to(&psi, &c.v, p.units(), t, max_dt)?.max_abs_diff(&exact))
    };
    let ratio = err(c.cfg.dt)? / err(0.5 * c.cfg.dt)?;
    Ok(vec![Check::near("evolution.order_ratio", ratio, 4.0, 0.5)])
}

/// Continuity residual over one step from `T/8`, and its halving ratio.
fn continuity<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let u = c.cfg.params.units();
    let psi = c.state_at(&c.coherent(), c.period() / 8.0)?;
    let residual = |dt: f64| -> pwc_core::Result<f64> {
        let after = evolve(&psi, &c.v, u, dt, 1)?;
        Ok(continuity_residual(&psi, &after, u)?.sup_norm())
    };
    let (r1, r2) = (residual(c.cfg.dt)?, residual(0.5 * c.cfg.dt)?);
    let scale = c.cfg.params.omega() / c.ell;
    Ok(vec![
        Check::deviation("evolution.continuity_residual", r1 / scale, 1e-4),
        Check::near("evolution.continuity_halving", r1 / r2, 4.0, 1.0),
    ])
}

fn picture_equivalence<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let spec = c.coherent();
    let psi = c.state(&spec)?;
    let ops = build_fock_operators(64, &c.cfg.params)?;
    let coeffs = spec.fock_coefficients()?;
    let mut dev: f64 = 0.0;
    for k in [0.0, 0.125, 0.25, 0.5] {
        let t = k * c.period();
        let q_grid = expectation(
            Operator::Position,
            &c.evolve_to(&psi, t)?,
            c.cfg.params.units(),
        )?;
        let q_fock = ops.expectation(&coeffs, &ops.heisenberg(Quadrature::Position, t))?;
        dev = dev.max((q_grid - q_fock).norm());
    }
    Ok(vec![Check::deviation(
        "evolution.picture_equivalence",
        dev / c.ell,
        1e-5,
    )])
}

fn fock_checks<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let p = &c.cfg.params;
    let ops = build_fock_operators(32, p)?;
    let mut closed: f64 = 0.0;
    let mut herm: f64 = 0.0;
    for k in [0.125, 1.0 / 3.0, 0.77] {
        let t = k * c.period();
        let qt = ops.heisenberg(Quadrature::Position, t);
        let (cs, sn) = ((p.omega() * t).cos(), (p.omega() * t).sin());
        let want = &ops.q().scale(C64::new(cs, 0.0))
            + &ops.p().scale(C64::new(sn / (p.omega() * p.mass()), 0.0));
        closed = closed.max(qt.max_abs_diff(&want));
        herm = herm.max(qt.max_abs_diff(&qt.adjoint()));
        let (mut a, mut b) = (qt.clone(), ops.q().clone());
        for _ in 0..4 {
            herm = herm.max((a.trace() - b.trace()).norm() / b.trace().norm().max(1.0));
            a = &a * &qt;
            b = &b * ops.q();
        }
    }
    let flip = ops
        .heisenberg(Quadrature::Position, 0.5 * c.period())
        .max_abs_diff(&ops.q().scale(C64::new(-1.0, 0.0)));
    let small = build_fock_operators(16, p)?;
    let ground = [C64::new(1.0, 0.0)];
    let mut conv: f64 = 0.0;
    for k in [0.0, 0.125, 0.5, 0.9] {
        let s = k * c.period();
        conv = conv.max(
            (ops.two_time_correlation(&ground, s, 0.0)?
                - small.two_time_correlation(&ground, s, 0.0)?)
            .norm(),
        );
    }
    Ok(vec![
        Check::deviation("fock.heisenberg_closed_form", closed / c.ell, 1e-12),
        Check::deviation("fock.half_period_flip", flip / c.ell, 1e-12),
        Check::deviation("fock.conjugation_hermiticity", herm, 1e-12),
        Check::deviation("fock.truncation_convergence", conv / c.two_q2, 1e-14),
    ])
}

fn stillness<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let u = c.cfg.params.units();
    let psi0 = c.state(&StateSpec::Eigenstate(0))?;
    let ens = sample_initial_positions(&psi0, 64, SamplingScheme::Quantile)?;
    let opts = TrajectoryOptions::new(c.cfg.dt).record_every(c.cfg.record_every);
    let run = integrate_trajectories(&ens, &psi0, &c.v, u, 5.0 * c.period(), &opts, c.exec)?;
    let drift = max_of(
        run.ensemble
            .particles()
            .iter()
            .flat_map(|p| p.path.iter().map(move |q| (q.x - p.xi).abs())),
    );
    Ok(vec![Check::deviation(
        "bohm.stillness",
        drift / c.ell,
        1e-6,
    )])
}

fn single_time_agreement<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let p = &c.cfg.params;
    let u = p.units();
    let t_late = c.period() / 8.0;
    let mut checks = Vec::new();
    for (label, spec) in [
        ("ground", StateSpec::Eigenstate(0)),
        ("coherent", c.coherent()),
        ("superposition", c.superposition()),
    ] {
        let psi0 = c.state(&spec)?;
        let ens = sample_initial_positions(&psi0, c.cfg.ensemble_size, SamplingScheme::Quantile)?;
        let opts = TrajectoryOptions::new(c.cfg.dt).record_every(c.cfg.record_every);
        let run = integrate_trajectories(&ens, &psi0, &c.v, u, t_late, &opts, c.exec)?;
        let mut dev: f64 = 0.0;
        for (psi, t) in [(&psi0, 0.0), (&run.final_state, t_late)] {
            let kinds = [
                (LocalKind::Position, Operator::Position, c.ell),
                (LocalKind::Momentum, Operator::Momentum, p.hbar() / c.ell),
                (
                    LocalKind::Hamiltonian(&c.v),
                    Operator::Hamiltonian(&c.v),
                    p.hbar() * p.omega(),
                ),
            ];
            for (kind, op, scale) in kinds {
                let b = bohm_expectation(kind, &run.ensemble, psi, u, t)?;
                let q = expectation(op, psi, u)?.re;
                dev = dev.max((b - q).abs() / scale);
            }
        }
        checks.push(Check::deviation(
            &format!("bohm.single_time_agreement.{label}"),
            dev,
            1e-3,
        ));
    }
    Ok(checks)
}

fn equivariance<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let u = c.cfg.params.units();
    let psi0 = c.state(&c.superposition())?;
    let ens = sample_initial_positions(&psi0, c.cfg.ensemble_size, SamplingScheme::Quantile)?;
    let opts = TrajectoryOptions::new(c.cfg.dt).record_every(c.cfg.record_every);
    let run = integrate_trajectories(&ens, &psi0, &c.v, u, c.period(), &opts, c.exec)?;
    let mut ks: f64 = 0.0;
    let mut ordered = true;
    for k in [0.25, 0.5, 1.0] {
        let t = k * c.period();
        let psi_t = c.evolve_to(&psi0, t)?;
        ks = ks.max(ks_distance(&run.ensemble, &psi_t, t)?);
    }
    let parts = run.ensemble.particles();
    for s in 0..parts[0].path.len() {
        ordered &= parts.windows(2).all(|w| w[0].path[s].x <= w[1].path[s].x);
    }
    Ok(vec![
        Check::deviation("bohm.equivariance_ks", ks, 0.01),
        Check::near(
            "bohm.no_crossing",
            if ordered { 1.0 } else { 0.0 },
            1.0,
            0.0,
        ),
    ])
}

fn kinetic_identity<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let p = &c.cfg.params;
    let u = p.units();
    let psi = c.state_at(&c.coherent(), c.period() / 8.0)?;
    let kinetic = LocalField::new(LocalKind::Kinetic, &psi, u)?.on_grid();
    let s = phase_field(&psi, u);
    let q = quantum_potential(&psi, u);
    let dens = probability_density(&psi);
    let peak = dens.max();
    let h = c.cfg.grid.dx();
    let mut dev: f64 = 0.0;
    for k in 1..c.cfg.grid.n_points() - 1 {
        if dens.values()[k] > 1e-6 * peak && s.reliable()[k - 1] && s.reliable()[k + 1] {
            let grad = (s.values()[k + 1] - s.values()[k - 1]) / (2.0 * h);
            let rhs = grad * grad / (2.0 * p.mass()) + q.values()[k];
            let lhs = kinetic[k].ok_or(Error::Node {
                x: c.cfg.grid.point(k),
                particle: None,
            })?;
            dev = dev.max((lhs - rhs).abs());
        }
    }
    Ok(vec![Check::deviation(
        "bohm.kinetic_identity",
        dev / (p.hbar() * p.omega()),
        1e-5,
    )])
}

fn sweep_checks<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let t = c.period();
    let lags: Vec<f64> = (0..=8).map(|k| k as f64 * t / 8.0).collect();
    let cfg = SweepConfig {
        params: c.cfg.params,
        grid: c.cfg.grid.clone(),
        dt: c.cfg.dt,
        ensemble_size: c.cfg.ensemble_size,
        sampling: SamplingScheme::Quantile,
        record_every: c.cfg.record_every,
        fock_dimension: None,
        lags,
    };
    let sweep = correlation_sweep(&StateSpec::Eigenstate(0), &cfg, c.exec)?;
    let q2 = 0.5 * c.two_q2;
    let half = sweep.row_at(t / 2.0).expect("half-period lag present");
    let zero = sweep.rows[0].grid.symmetrized;
    let w = c.cfg.params.omega();
    let mut law: f64 = 0.0;
    let mut vs_fock: f64 = 0.0;
    let mut shape: f64 = 0.0;
    for r in &sweep.rows {
        law = law.max((r.grid.value - C64::from_polar(q2, -w * r.tau)).norm());
        vs_fock = vs_fock.max((r.grid.value - r.fock.value).norm());
        shape = shape.max((r.grid.symmetrized - zero * (w * r.tau).cos()).abs());
    }
    let coherent = c.state(&c.coherent())?;
    let u = c.cfg.params.units();
    let (a, b) = (t / 16.0, 0.3 * t);
    let x = qm_two_time_correlation(&coherent, &c.v, u, a, b, c.cfg.dt)?.value;
    let y = qm_two_time_correlation(&coherent, &c.v, u, b, a, c.cfg.dt)?.value;
    let flag = Check::near(
        "correlators.half_period_flag",
        if half.flag == Flag::Contradiction {
            1.0
        } else {
            0.0
        },
        1.0,
        0.0,
    );
    Ok(vec![
        Check::near("correlators.q2_quadrature", sweep.q2, q2, 1e-9 * q2),
        Check::near(
            "correlators.half_period_grid_sym",
            half.grid.symmetrized,
            -c.two_q2,
            2e-4 * c.two_q2,
        ),
        Check::near(
            "correlators.half_period_fock_sym",
            half.fock.symmetrized,
            -c.two_q2,
            1e-12 * c.two_q2,
        ),
        Check::near(
            "correlators.half_period_bohm_sym",
            half.bohm.symmetrized,
            c.two_q2,
            1e-3 * c.two_q2,
        ),
        flag.with_note(half.flag.as_str()),
        Check::deviation("correlators.complex_law", law / c.two_q2, 1e-4),
        Check::deviation("correlators.grid_vs_fock", vs_fock / c.two_q2, 1e-6),
        Check::deviation("correlators.classical_shape", shape / c.two_q2, 1e-4),
        Check::deviation(
            "correlators.hermitian_symmetry",
            (x - y.conj()).norm() / c.two_q2,
            1e-6,
        ),
    ])
}

fn decomposition<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let u = c.cfg.params.units();
    let psi0 = c.state(&StateSpec::Eigenstate(0))?;
    let q2 = 0.5 * c.two_q2;
    let w = c.cfg.params.omega();
    let mut dev: f64 = 0.0;
    for (s, t) in [(c.period() / 4.0, 0.0), (c.period() / 8.0, 0.0), (0.4, 0.4)] {
        let record = qm_two_time_correlation(&psi0, &c.v, u, s, t, c.cfg.dt)?;
        let (re, im) = complex_expectation_decomposition(&record, &psi0, &c.v, u, s, t, c.cfg.dt)?;
        let want = C64::from_polar(q2, -w * (s - t));
        dev = dev.max((re - want.re).abs()).max((im - want.im).abs());
    }
    Ok(vec![Check::deviation(
        "correlators.decomposition",
        dev / c.two_q2,
        1e-4,
    )])
}

fn heisenberg_local<E: Executor>(c: &Ctx<'_, E>) -> pwc_core::Result<Vec<Check>> {
    let p = &c.cfg.params;
    let psi0 = c.state(&StateSpec::Eigenstate(0))?;
    let mut dev: f64 = 0.0;
    for xi in [-1.0, 0.3, 2.0] {
        for k in [0.0, 0.125, 0.5] {
            let s = k * c.period();
            let x = xi * c.ell;
            let generic = heisenberg_local_expectation_from_state(x, s, p, &psi0)?;
            dev = dev.max((generic - heisenberg_local_expectation(x, s, p)).abs());
        }
    }
    Ok(vec![Check::deviation(
        "correlators.heisenberg_local",
        dev / c.ell,
        1e-6,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_constructors() {
        assert!(Check::near("a", 3.9, 4.0, 0.5).passed);
        assert!(!Check::near("a", 3.4, 4.0, 0.5).passed);
        assert!(Check::deviation("b", 1e-7, 1e-6).passed);
        assert!(!Check::deviation("b", f64::NAN, 1e-6).passed);
        let f = Check::failed("c", "boom".into());
        assert!(!f.passed && f.note.as_deref() == Some("boom"));
    }

    #[test]
    fn nan_dominates_max() {
        assert!(max_of([1.0, f64::NAN, 2.0]).is_nan());
        assert_eq!(max_of([1.0, 3.0, 2.0]), 3.0);
    }
}
