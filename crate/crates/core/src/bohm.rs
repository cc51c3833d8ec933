//! Pilot-wave side: velocity field `v = J/P`, trajectory ensembles sampled
//! from `|psi_0|^2`, local expectation values `Re[(A psi)(x) / psi(x)]`, the
//! quantum potential, and ensemble averages over trajectories.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evolution::{step_plan, SplitStepper};
use crate::exec::Executor;
use crate::grid::{
    apply_operator, probability_current, probability_density, Grid, Operator, RealField, Units,
    Wavefunction,
};
use crate::interp::cubic;
use crate::oscillator::{OscillatorParams, StateSpec};
use crate::C64;

/// Density below `NODE_THRESHOLD * max P` counts as a node.
pub const NODE_THRESHOLD: f64 = 1e-12;

fn node_cutoff(density: &[f64]) -> f64 {
    NODE_THRESHOLD * density.iter().copied().fold(0.0, f64::max)
}

/// Replaces flagged entries by linear interpolation between the nearest
/// unflagged neighbours (nearest value past the ends). Returns the number
/// of entries filled.
fn fill_nodes(values: &mut [f64], is_node: &[bool]) -> usize {
    let n = values.len();
    let filled = is_node.iter().filter(|&&b| b).count();
    if filled == n {
        values.iter_mut().for_each(|v| *v = 0.0);
        return filled;
    }
    let mut k = 0;
    while k < n {
        if !is_node[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && is_node[k] {
            k += 1;
        }
        let left = start.checked_sub(1);
        let right = if k < n { Some(k) } else { None };
        for i in start..k {
            values[i] = match (left, right) {
                (Some(a), Some(b)) => {
                    let w = (i - a) as f64 / (b - a) as f64;
                    values[a] * (1.0 - w) + values[b] * w
                }
                (Some(a), None) => values[a],
                (None, Some(b)) => values[b],
                (None, None) => 0.0,
            };
        }
    }
    filled
}

/// Bohmian velocity field on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    field: RealField,
    filled_nodes: usize,
}

impl VelocityField {
    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    /// Number of grid points whose velocity came from the node fill.
    pub fn filled_nodes(&self) -> usize {
        self.filled_nodes
    }

    pub fn at(&self, x: f64) -> f64 {
        self.field.at(x)
    }
}

/// `v = J / P` off nodes, neighbour-interpolated on nodes.
pub fn velocity_field(psi: &Wavefunction, units: Units) -> VelocityField {
    let density = probability_density(psi);
    let current = probability_current(psi, units);
    let cutoff = node_cutoff(density.values());
    let is_node: Vec<bool> = density.values().iter().map(|&p| p <= cutoff).collect();
    let mut values: Vec<f64> = density
        .values()
        .iter()
        .zip(current.values())
        .zip(&is_node)
        .map(|((&p, &j), &node)| if node { 0.0 } else { j / p })
        .collect();
    let filled_nodes = fill_nodes(&mut values, &is_node);
    let field = RealField::new(psi.grid(), values, psi.time()).expect("grid-sized field");
    VelocityField {
        field,
        filled_nodes,
    }
}

/// Unwrapped phase `S = hbar arg psi`, a diagnostic only.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    field: RealField,
    reliable: Vec<bool>,
}

impl PhaseField {
    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    /// False on points reached only by unwrapping across a node.
    pub fn reliable(&self) -> &[bool] {
        &self.reliable
    }
}

/// Unwraps `hbar arg psi` outward from the density maximum.
pub fn phase_field(psi: &Wavefunction, units: Units) -> PhaseField {
    let amps = psi.amplitudes();
    let density = probability_density(psi);
    let cutoff = node_cutoff(density.values());
    let n = amps.len();
    let start = density
        .values()
        .iter()
        .enumerate()
        .fold(
            0,
            |best, (k, &p)| if p > density.values()[best] { k } else { best },
        );
    let mut theta = vec![0.0; n];
    let mut reliable = vec![true; n];
    theta[start] = amps[start].arg();
    reliable[start] = density.values()[start] > cutoff;
    let mut walk = |from: usize, to: usize| {
        let mut d = amps[to].arg() - amps[from].arg();
        d -= TAU * (d / TAU).round();
        theta[to] = theta[from] + d;
        reliable[to] = reliable[from] && density.values()[to] > cutoff;
    };
    for k in start + 1..n {
        walk(k - 1, k);
    }
    for k in (0..start).rev() {
        walk(k + 1, k);
    }
    let values = theta.into_iter().map(|t| units.hbar * t).collect();
    PhaseField {
        field: RealField::new(psi.grid(), values, psi.time()).expect("grid-sized field"),
        reliable,
    }
}

/// Cumulative distribution of a grid density, piecewise quadratic
/// (the exact integral of the linear interpolant of `P`).
#[derive(Debug, Clone)]
pub struct DensityCdf {
    grid: Grid,
    density: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DensityCdf {
    pub fn new(density: &RealField) -> Result<Self> {
        let grid = density.grid().clone();
        let dx = grid.dx();
        let p = density.values();
        let mut cumulative = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in p.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * dx;
            cumulative.push(acc);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::Domain(format!("density has total mass {acc}")));
        }
        Ok(Self {
            grid,
            density: p.iter().map(|v| v / acc).collect(),
            cumulative: cumulative.into_iter().map(|c| c / acc).collect(),
        })
    }

    pub fn from_state(psi: &Wavefunction) -> Result<Self> {
        Self::new(&probability_density(psi))
    }

    /// `F(x)`
    pub fn value(&self, x: f64) -> f64 {
        let dx = self.grid.dx();
        let u = (x - self.grid.x_min()) / dx;
        if u <= 0.0 {
            return 0.0;
        }
        let k = u.floor() as usize;
        if k >= self.density.len() - 1 {
            return 1.0;
        }
        let s = (u - k as f64) * dx;
        let (p0, p1) = (self.density[k], self.density[k + 1]);
        self.cumulative[k] + p0 * s + (p1 - p0) * s * s / (2.0 * dx)
    }

    /// `F^{-1}(u)` for `u` in `[0, 1]`.
    pub fn inverse(&self, u: f64) -> f64 {
        let n = self.cumulative.len();
        let k = self.cumulative.partition_point(|&c| c <= u).clamp(1, n - 1) - 1;
        let dx = self.grid.dx();
        let (p0, p1) = (self.density[k], self.density[k + 1]);
        let r = (u - self.cumulative[k]).max(0.0);
        let a = (p1 - p0) / (2.0 * dx);
        let disc = (p0 * p0 + 4.0 * a * r).max(0.0);
        let denom = p0 + disc.sqrt();
        let s = if denom > 0.0 {
            (2.0 * r / denom).min(dx)
        } else {
            0.0
        };
        self.grid.point(k) + s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    /// `xi_j = F^{-1}((j + 1/2) / n)`
    Quantile,
    /// i.i.d. inverse-CDF draws from a seeded ChaCha8 stream.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub id: usize,
    pub xi: f64,
    pub weight: f64,
    pub path: Vec<PathPoint>,
}

impl Particle {
    pub fn start_time(&self) -> f64 {
        self.path[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.path[self.path.len() - 1].t
    }

    /// Position at `t`, linear between recorded samples.
    pub fn position_at(&self, t: f64) -> Result<f64> {
        let (start, end) = (self.start_time(), self.end_time());
        let slack = 1e-12 * end.abs().max(1.0);
        if t < start - slack || t > end + slack {
            return Err(Error::Horizon {
                time: t,
                start,
                end,
            });
        }
        let k = self.path.partition_point(|p| p.t <= t);
        if k == 0 {
            return Ok(self.path[0].x);
        }
        if k == self.path.len() {
            return Ok(self.path[k - 1].x);
        }
        let (a, b) = (self.path[k - 1], self.path[k]);
        let w = (t - a.t) / (b.t - a.t);
        Ok(a.x + w * (b.x - a.x))
    }
}

/// A weighted set of Bohmian particles.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    particles: Vec<Particle>,
    scheme: SamplingScheme,
    source: Option<StateSpec>,
}

impl TrajectoryEnsemble {
    /// Checks that weights sum to 1 and every path is nonempty and
    /// strictly increasing in time.
    pub fn new(particles: Vec<Particle>, scheme: SamplingScheme) -> Result<Self> {
        let total: f64 = particles.iter().map(|p| p.weight).sum();
        if particles.is_empty()
            || (total - 1.0).abs() > 1e-12
            || particles.iter().any(|p| p.weight < 0.0)
        {
            return Err(Error::Config(format!(
                "ensemble weights must be nonnegative and sum to 1 (sum = {total})"
            )));
        }
        for p in &particles {
            if p.path.is_empty()
                || p.path[0].x != p.xi
                || p.path.windows(2).any(|w| w[1].t <= w[0].t)
            {
                return Err(Error::Config(format!(
                    "particle {} has a malformed path",
                    p.id
                )));
            }
        }
        Ok(Self {
            particles,
            scheme,
            source: None,
        })
    }

    pub fn with_source(mut self, spec: StateSpec) -> Self {
        self.source = Some(spec);
        self
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn scheme(&self) -> SamplingScheme {
        self.scheme
    }

    pub fn source(&self) -> Option<&StateSpec> {
        self.source.as_ref()
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Latest time covered by every path.
    pub fn horizon(&self) -> f64 {
        self.particles
            .iter()
            .map(Particle::end_time)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn positions_at(&self, t: f64) -> Result<Vec<f64>> {
        self.particles.iter().map(|p| p.position_at(t)).collect()
    }
}

/// Draws `n` initial positions from `|psi0|^2`, all with weight `1/n`.
pub fn sample_initial_positions(
    psi0: &Wavefunction,
    n: usize,
    scheme: SamplingScheme,
) -> Result<TrajectoryEnsemble> {
    if n == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    let cdf = DensityCdf::from_state(psi0)?;
    let levels: Vec<f64> = match scheme {
        SamplingScheme::Quantile => (0..n).map(|j| (j as f64 + 0.5) / n as f64).collect(),
        SamplingScheme::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.random::<f64>()).collect()
        }
    };
    let weight = 1.0 / n as f64;
    let particles = levels
        .into_iter()
        .enumerate()
        .map(|(id, u)| {
            let xi = cdf.inverse(u);
            Particle {
                id,
                xi,
                weight,
                path: vec![PathPoint {
                    t: psi0.time(),
                    x: xi,
                }],
            }
        })
        .collect();
    TrajectoryEnsemble::new(particles, scheme)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    /// Largest Schrödinger step; the actual step divides the duration evenly.
    pub dt: f64,
    /// RK4 steps per Schrödinger step.
    pub substeps: usize,
    /// Keep every `record_every`-th RK4 step (the final one is always kept).
    pub record_every: usize,
}

impl TrajectoryOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            substeps: 1,
            record_every: 1,
        }
    }

    pub fn record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn substeps(mut self, k: usize) -> Self {
        self.substeps = k;
        self
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    pub ensemble: TrajectoryEnsemble,
    /// The co-evolved wavefunction at `t_final`.
    pub final_state: Wavefunction,
}

struct Walker {
    particle: Particle,
    x: f64,
    escaped: Option<PathPoint>,
}

/// Co-evolves `psi0` with the split-operator stepper and advances every
/// particle by classical RK4 through `v = J/P`.
///
/// Velocities are cubic-interpolated in space; at RK4 stage times they are
/// linear in time between the bracketing Schrödinger snapshots. Each
/// particle's path must currently end at `psi0.time()`.
pub fn integrate_trajectories<E: Executor>(
    ensemble: &TrajectoryEnsemble,
    psi0: &Wavefunction,
    potential: &RealField,
    units: Units,
    t_final: f64,
    options: &TrajectoryOptions,
    exec: &E,
) -> Result<TrajectoryRun> {
    let t0 = psi0.time();
    if t_final.is_nan() || t_final <= t0 {
        return Err(Error::Config(format!(
            "t_final = {t_final} must exceed the start time {t0}"
        )));
    }
    if options.substeps == 0 || options.record_every == 0 {
        return Err(Error::Config(
            "substeps and record_every must be positive".into(),
        ));
    }
    let slack = 1e-12 * t0.abs().max(1.0);
    if let Some(p) = ensemble
        .particles()
        .iter()
        .find(|p| (p.end_time() - t0).abs() > slack)
    {
        return Err(Error::Config(format!(
            "particle {} ends at t = {}, but the wavefunction is at t = {t0}",
            p.id,
            p.end_time()
        )));
    }
    let (n_steps, dt) = step_plan(t_final - t0, options.dt)?;
    let k = options.substeps;
    let total = n_steps * k;
    let h = dt / k as f64;
    let grid = psi0.grid().clone();
    let stepper = SplitStepper::new(potential, units, dt)?;

    let mut walkers: Vec<Walker> = ensemble
        .particles()
        .iter()
        .map(|p| Walker {
            x: p.path[p.path.len() - 1].x,
            particle: p.clone(),
            escaped: None,
        })
        .collect();

    let mut amps = psi0.amplitudes().to_vec();
    let mut v_prev = velocity_field(psi0, units).field.values().to_vec();
    let mut blends: Vec<Vec<f64>> = vec![vec![0.0; grid.n_points()]; 2 * k + 1];
    for step in 0..n_steps {
        stepper.step_in_place(&mut amps);
        let t_next = t0 + (step + 1) as f64 * dt;
        let psi_next = Wavefunction::from_amplitudes(&grid, amps.clone(), t_next)?;
        let v_next = velocity_field(&psi_next, units).field.values().to_vec();
        for (i, blend) in blends.iter_mut().enumerate() {
            let theta = i as f64 / (2 * k) as f64;
            for ((b, a), c) in blend.iter_mut().zip(&v_prev).zip(&v_next) {
                *b = (1.0 - theta) * a + theta * c;
            }
        }
        let blends = &blends;
        let grid = &grid;
        exec.for_each_mut(&mut walkers, |_, w| {
            if w.escaped.is_some() {
                return;
            }
            for j in 0..k {
                let v = |f: usize, x: f64| cubic(grid, &blends[f], x);
                let x = w.x;
                let k1 = v(2 * j, x);
                let k2 = v(2 * j + 1, x + 0.5 * h * k1);
                let k3 = v(2 * j + 1, x + 0.5 * h * k2);
                let k4 = v(2 * j + 2, x + h * k3);
                w.x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                let index = step * k + j + 1;
                let t = t0 + (t_final - t0) * (index as f64 / total as f64);
                if !w.x.is_finite() || !grid.contains(w.x) {
                    w.escaped = Some(PathPoint { t, x: w.x });
                    return;
                }
                if index.is_multiple_of(options.record_every) || index == total {
                    w.particle.path.push(PathPoint { t, x: w.x });
                }
            }
        });
        v_prev = v_next;
    }

    if let Some(w) = walkers.iter().find(|w| w.escaped.is_some()) {
        let at = w.escaped.expect("checked");
        return Err(Error::DomainEscape {
            particle: w.particle.id,
            t: at.t,
            x: at.x,
        });
    }
    let particles = walkers.into_iter().map(|w| w.particle).collect();
    let mut out = TrajectoryEnsemble::new(particles, ensemble.scheme())?;
    out.source = ensemble.source.clone();
    Ok(TrajectoryRun {
        ensemble: out,
        final_state: Wavefunction::from_amplitudes(&grid, amps, t_final)?,
    })
}

/// Observables with a local expectation value.
#[derive(Debug, Clone, Copy)]
pub enum LocalKind<'a> {
    Position,
    Momentum,
    Kinetic,
    Hamiltonian(&'a RealField),
    /// Heisenberg position `q(s) = q cos(omega s) + p sin(omega s) / (m omega)`.
    HeisenbergQ {
        s: f64,
        params: OscillatorParams,
    },
}

/// `A psi` precomputed on the grid, ready for pointwise
/// `Re[(A psi)(x) / psi(x)]` evaluation.
#[derive(Debug, Clone)]
pub struct LocalField {
    grid: Grid,
    psi: Vec<C64>,
    applied: Option<Vec<C64>>,
    density: Vec<f64>,
    cutoff: f64,
}

impl LocalField {
    pub fn new(kind: LocalKind<'_>, psi: &Wavefunction, units: Units) -> Result<Self> {
        let applied = match kind {
            LocalKind::Position => None,
            LocalKind::Momentum => Some(apply_operator(Operator::Momentum, psi, units)?),
            LocalKind::Kinetic => Some(apply_operator(Operator::Kinetic, psi, units)?),
            LocalKind::Hamiltonian(v) => {
                Some(apply_operator(Operator::Hamiltonian(v), psi, units)?)
            }
            LocalKind::HeisenbergQ { s, params } => {
                let (c, sn) = ((params.omega() * s).cos(), (params.omega() * s).sin());
                let q = apply_operator(Operator::Position, psi, params.units())?;
                let p = apply_operator(Operator::Momentum, psi, params.units())?;
                let scale = sn / (params.omega() * params.mass());
                let amps = q
                    .amplitudes()
                    .iter()
                    .zip(p.amplitudes())
                    .map(|(a, b)| a * c + b * scale)
                    .collect();
                Some(Wavefunction::from_amplitudes(psi.grid(), amps, psi.time())?)
            }
        };
        let density = probability_density(psi).values().to_vec();
        Ok(Self {
            grid: psi.grid().clone(),
            psi: psi.amplitudes().to_vec(),
            applied: applied.map(Wavefunction::into_amplitudes),
            cutoff: node_cutoff(&density),
            density,
        })
    }

    /// Local value at `x`; multiplication by `x` needs no interpolation.
    pub fn at(&self, x: f64) -> Result<f64> {
        let Some(applied) = &self.applied else {
            return Ok(x);
        };
        if cubic(&self.grid, &self.density, x) <= self.cutoff {
            return Err(Error::Node { x, particle: None });
        }
        let num = cubic(&self.grid, applied, x);
        let den = cubic(&self.grid, &self.psi, x);
        Ok((num / den).re)
    }

    /// Local values on the grid points themselves (no interpolation).
    pub fn on_grid(&self) -> Vec<Option<f64>> {
        (0..self.psi.len())
            .map(|k| match &self.applied {
                None => Some(self.grid.point(k)),
                Some(a) if self.density[k] > self.cutoff => Some((a[k] / self.psi[k]).re),
                Some(_) => None,
            })
            .collect()
    }
}

/// `Re[(A psi)(x) / psi(x)]`
pub fn local_expectation(
    kind: LocalKind<'_>,
    psi: &Wavefunction,
    units: Units,
    x: f64,
) -> Result<f64> {
    LocalField::new(kind, psi, units)?.at(x)
}

/// `Q = -(hbar^2 / 2m) lap|psi| / |psi|`, spectral Laplacian, node-filled.
pub fn quantum_potential(psi: &Wavefunction, units: Units) -> RealField {
    let modulus: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm()).collect();
    let lap = psi.grid().second_derivative_real(&modulus);
    let density: Vec<f64> = modulus.iter().map(|r| r * r).collect();
    let cutoff = node_cutoff(&density);
    let is_node: Vec<bool> = density.iter().map(|&p| p <= cutoff).collect();
    let c = -units.hbar * units.hbar / (2.0 * units.mass);
    let mut values: Vec<f64> = lap
        .iter()
        .zip(&modulus)
        .zip(&is_node)
        .map(|((&l, &r), &node)| if node { 0.0 } else { c * l / r })
        .collect();
    fill_nodes(&mut values, &is_node);
    RealField::new(psi.grid(), values, psi.time()).expect("grid-sized field")
}

/// `sum_j w_j A(x_j(t), t)` with `psi_t` the wavefunction at time `t`.
pub fn bohm_expectation(
    kind: LocalKind<'_>,
    ensemble: &TrajectoryEnsemble,
    psi_t: &Wavefunction,
    units: Units,
    t: f64,
) -> Result<f64> {
    if (psi_t.time() - t).abs() > 1e-9 * t.abs().max(1.0) {
        return Err(Error::Config(format!(
            "wavefunction is at t = {}, expectation requested at t = {t}",
            psi_t.time()
        )));
    }
    let field = LocalField::new(kind, psi_t, units)?;
    let mut sum = 0.0;
    for p in ensemble.particles() {
        let x = p.position_at(t)?;
        let a = field.at(x).map_err(|e| match e {
            Error::Node { x, .. } => Error::Node {
                x,
                particle: Some(p.id),
            },
            other => other,
        })?;
        sum += p.weight * a;
    }
    Ok(sum)
}

/// Kolmogorov–Smirnov distance between the weighted particle positions at
/// `t` and the distribution `|psi_t|^2`.
pub fn ks_distance(ensemble: &TrajectoryEnsemble, psi_t: &Wavefunction, t: f64) -> Result<f64> {
    let cdf = DensityCdf::from_state(psi_t)?;
    let mut samples: Vec<(f64, f64)> = ensemble
        .particles()
        .iter()
        .map(|p| Ok((p.position_at(t)?, p.weight)))
        .collect::<Result<_>>()?;
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut below = 0.0;
    let mut worst: f64 = 0.0;
    for (x, w) in samples {
        let f = cdf.value(x);
        worst = worst.max((f - below).abs());
        below += w;
        worst = worst.max((f - below).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve_eigenstate_analytic, evolve_to};
    use crate::exec::Sequential;
    use crate::grid::expectation;
    use crate::oscillator::{build_state, eigenstate, oscillator_potential};
    use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    const DT: f64 = TAU / 4000.0;

    struct Setup {
        p: OscillatorParams,
        g: Grid,
        v: RealField,
    }

    fn setup() -> Setup {
        let p = OscillatorParams::natural();
        let g = Grid::new(-10.0, 10.0, 1024).unwrap();
        let v = oscillator_potential(&p, &g);
        Setup { p, g, v }
    }

    fn coherent(s: &Setup, re: f64) -> Wavefunction {
        build_state(&StateSpec::Coherent(C64::new(re, 0.0)), &s.p, &s.g).unwrap()
    }

    fn superposition(s: &Setup) -> Wavefunction {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        build_state(&StateSpec::superposition(vec![h, h]).unwrap(), &s.p, &s.g).unwrap()
    }

    #[test]
    fn fill_nodes_interpolates_and_extends() {
        let mut v = vec![9.0, 1.0, 0.0, 0.0, 4.0, 9.0];
        let n = fill_nodes(&mut v, &[true, false, true, true, false, true]);
        assert_eq!(n, 4);
        assert_eq!(v, vec![1.0, 1.0, 2.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn ground_state_velocity_vanishes() {
        let s = setup();
        let psi0 = eigenstate(0, &s.p, &s.g).unwrap();
        for t in [0.0, 0.3, 4.1] {
            let psi = evolve_eigenstate_analytic(&psi0, 0.5, s.p.units(), t);
            let vel = velocity_field(&psi, s.p.units());
            let dens = probability_density(&psi);
            for (&v, &p) in vel.values().iter().zip(dens.values()) {
                if p > 1e-6 {
                    assert!(v.abs() < 1e-9, "v = {v:e}");
                }
            }
        }
    }

    #[test]
    fn coherent_velocity_is_uniform() {
        let s = setup();
        let psi = evolve_to(&coherent(&s, 1.0), &s.v, s.p.units(), PI / 2.0, DT).unwrap();
        let vel = velocity_field(&psi, s.p.units());
        let dens = probability_density(&psi);
        for (&v, &p) in vel.values().iter().zip(dens.values()) {
            if p > 1e-6 {
                assert!((v + SQRT_2).abs() < 1e-4, "v = {v}");
            }
        }
    }

    #[test]
    fn phase_examples() {
        let s = setup();
        let psi0 = eigenstate(0, &s.p, &s.g).unwrap();
        let real = phase_field(&psi0, s.p.units());
        assert!(real.values().iter().all(|&v| v == 0.0));

        let psi = evolve_eigenstate_analytic(&psi0, 0.5, s.p.units(), 1.3);
        let ph = phase_field(&psi, s.p.units());
        let reliable: Vec<f64> = ph
            .values()
            .iter()
            .zip(ph.reliable())
            .filter(|(_, &r)| r)
            .map(|(&v, _)| v)
            .collect();
        assert!(reliable.len() > 100);
        for v in &reliable {
            assert!((v - (-0.65)).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_gradient_matches_velocity() {
        let s = setup();
        let psi = evolve_to(&coherent(&s, 1.0), &s.v, s.p.units(), PI / 2.0, DT).unwrap();
        let ph = phase_field(&psi, s.p.units());
        let vel = velocity_field(&psi, s.p.units());
        let dens = probability_density(&psi);
        let (sv, h) = (ph.values(), s.g.dx());
        for k in 1..s.g.n_points() - 1 {
            if dens.values()[k] > 1e-6 {
                let grad = (sv[k + 1] - sv[k - 1]) / (2.0 * h);
                assert!((grad - s.p.mass() * vel.values()[k]).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn phase_reliability_stops_at_nodes() {
        let s = setup();
        let psi1 = eigenstate(1, &s.p, &s.g).unwrap();
        let ph = phase_field(&psi1, s.p.units());
        // the maximum sits on one lobe; the other lobe is past the node at 0
        let unreliable = ph.reliable().iter().filter(|r| !**r).count();
        assert!(unreliable >= s.g.n_points() / 2 - 1);
    }

    #[test]
    fn cdf_inverse_round_trips() {
        let s = setup();
        let cdf = DensityCdf::from_state(&coherent(&s, 0.7)).unwrap();
        for u in [1e-6, 0.01, 0.3, 0.5, 0.77, 0.999999] {
            let x = cdf.inverse(u);
            assert!((cdf.value(x) - u).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn quantile_sampling() {
        let s = setup();
        let psi0 = eigenstate(0, &s.p, &s.g).unwrap();
        let one = sample_initial_positions(&psi0, 1, SamplingScheme::Quantile).unwrap();
        assert!(one.particles()[0].xi.abs() < 1e-9);

        let many = sample_initial_positions(&psi0, 10_000, SamplingScheme::Quantile).unwrap();
        let mean: f64 = many.particles().iter().map(|p| p.xi * p.weight).sum();
        let var: f64 = many
            .particles()
            .iter()
            .map(|p| (p.xi - mean).powi(2) * p.weight)
            .sum();
        // oracle: quadrature of x^2 |psi0|^2 on the grid
        let q2: f64 =
            s.g.points()
                .zip(psi0.amplitudes())
                .map(|(x, z)| x * x * z.norm_sqr() * s.g.dx())
                .sum();
        assert!((q2 - 0.5).abs() < 1e-12);
        assert!((var - q2).abs() < 1e-3, "var = {var}");
        assert!(sample_initial_positions(&psi0, 0, SamplingScheme::Quantile).is_err());
    }

    #[test]
    fn random_sampling_is_deterministic() {
        let s = setup();
        let psi = coherent(&s, 0.5);
        let a = sample_initial_positions(&psi, 500, SamplingScheme::Random { seed: 7 }).unwrap();
        let b = sample_initial_positions(&psi, 500, SamplingScheme::Random { seed: 7 }).unwrap();
        let c = sample_initial_positions(&psi, 500, SamplingScheme::Random { seed: 8 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mean: f64 = a.particles().iter().map(|p| p.xi * p.weight).sum();
        assert!((mean - 0.5 * SQRT_2).abs() < 0.1);
    }

    #[test]
    fn ground_state_particles_stand_still() {
        let s = setup();
        let psi0 = eigenstate(0, &s.p, &s.g).unwrap();
        let ens = sample_initial_positions(&psi0, 16, SamplingScheme::Quantile).unwrap();
        let run = integrate_trajectories(
            &ens,
            &psi0,
            &s.v,
            s.p.units(),
            s.p.period(),
            &TrajectoryOptions::new(DT),
            &Sequential,
        )
        .unwrap();
        for p in run.ensemble.particles() {
            assert_eq!(p.path.len(), 4001);
            let drift = p
                .path
                .iter()
                .map(|q| (q.x - p.xi).abs())
                .fold(0.0, f64::max);
            assert!(drift < 1e-6, "particle {} drifted {drift:e}", p.id);
        }
    }

    #[test]
    fn coherent_trajectory_follows_the_classical_orbit() {
        let s = setup();
        let psi = coherent(&s, 1.0);
        let p0 = Particle {
            id: 0,
            xi: SQRT_2,
            weight: 1.0,
            path: vec![PathPoint { t: 0.0, x: SQRT_2 }],
        };
        let ens = TrajectoryEnsemble::new(vec![p0], SamplingScheme::Quantile).unwrap();
        let run = integrate_trajectories(
            &ens,
            &psi,
            &s.v,
            s.p.units(),
            TAU,
            &TrajectoryOptions::new(DT).record_every(10),
            &Sequential,
        )
        .unwrap();
        let path = &run.ensemble.particles()[0].path;
        assert_eq!(path.len(), 401);
        for q in path {
            assert!((q.x - SQRT_2 * q.t.cos()).abs() < 2e-3);
        }
        assert_eq!(path.last().unwrap().t, TAU);
    }

    #[test]
    fn substeps_agree_with_single_steps() {
        let s = setup();
        let psi = coherent(&s, 0.5);
        let ens = sample_initial_positions(&psi, 8, SamplingScheme::Quantile).unwrap();
        let run = |k: usize| {
            integrate_trajectories(
                &ens,
                &psi,
                &s.v,
                s.p.units(),
                1.0,
                &TrajectoryOptions::new(0.01).substeps(k),
                &Sequential,
            )
            .unwrap()
        };
        let (a, b) = (run(1), run(3));
        for (pa, pb) in a.ensemble.particles().iter().zip(b.ensemble.particles()) {
            assert!((pa.position_at(1.0).unwrap() - pb.position_at(1.0).unwrap()).abs() < 1e-6);
        }
        assert_eq!(b.ensemble.particles()[0].path.len(), 301);
    }

    #[test]
    fn trajectories_do_not_cross() {
        let s = setup();
        let psi = superposition(&s);
        let ens = sample_initial_positions(&psi, 200, SamplingScheme::Quantile).unwrap();
        let run = integrate_trajectories(
            &ens,
            &psi,
            &s.v,
            s.p.units(),
            TAU,
            &TrajectoryOptions::new(DT).record_every(20),
            &Sequential,
        )
        .unwrap();
        let parts = run.ensemble.particles();
        for k in 0..parts[0].path.len() {
            for w in parts.windows(2) {
                assert!(w[0].path[k].x < w[1].path[k].x, "crossing at sample {k}");
            }
        }
    }

    #[test]
    fn escaping_particle_is_named() {
        let s = setup();
        let psi = coherent(&s, 1.0);
        let near_edge = -9.99;
        let particles = vec![
            Particle {
                id: 0,
                xi: 0.0,
                weight: 0.5,
                path: vec![PathPoint { t: 0.0, x: 0.0 }],
            },
            Particle {
                id: 1,
                xi: near_edge,
                weight: 0.5,
                path: vec![PathPoint {
                    t: 0.0,
                    x: near_edge,
                }],
            },
        ];
        let ens = TrajectoryEnsemble::new(particles, SamplingScheme::Quantile).unwrap();
        // the packet's uniform velocity -sqrt(2) carries the edge particle out
        let psi = evolve_to(&psi, &s.v, s.p.units(), PI / 2.0, DT).unwrap();
        let psi = psi.with_time(0.0);
        let err = integrate_trajectories(
            &ens,
            &psi,
            &s.v,
            s.p.units(),
            0.5,
            &TrajectoryOptions::new(DT),
            &Sequential,
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::DomainEscape { particle: 1, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn local_values() {
        let s = setup();
        let u = s.p.units();
        let psi0 = eigenstate(0, &s.p, &s.g).unwrap();
        let psi = superposition(&s);
        for x in [-1.3, 0.0, 0.123, 2.5] {
            assert_eq!(
                local_expectation(LocalKind::Position, &psi, u, x).unwrap(),
                x
            );
            assert!(
                local_expectation(LocalKind::Momentum, &psi0, u, x)
                    .unwrap()
                    .abs()
                    < 1e-8
            );
        }
        let e = local_expectation(LocalKind::Hamiltonian(&s.v), &psi0, u, 0.5).unwrap();
        assert!((e - 0.5).abs() < 1e-6);
        // node of psi1 at the origin
        let psi1 = eigenstate(1, &s.p, &s.g).unwrap();
        assert!(matches!(
            local_expectation(LocalKind::Kinetic, &psi1, u, 0.0),
            Err(Error::Node { .. })
        ));
    }

    #[test]
    fn quantum_potential_of_ground_state() {
        // Q = (1 - x^2)/2, and a finite-difference Laplacian of |psi0| agrees
        let s = setup();
        let psi0 = eigenstate(0, &s.p, &s.g).unwrap();
        let q = quantum_potential(&psi0, s.p.units());
        let r: Vec<f64> = psi0.amplitudes().iter().map(|z| z.norm()).collect();
        let h = s.g.dx();
        for k in (400..625).step_by(7) {
            let x = s.g.point(k);
            assert!(
                (q.values()[k] - 0.5 * (1.0 - x * x)).abs() < 1e-6,
                "x = {x}"
            );
            let fd = -(r[k + 1] - 2.0 * r[k] + r[k - 1]) / (h * h) / (2.0 * r[k]);
            assert!((fd - q.values()[k]).abs() < 1e-4);
        }
    }

    #[test]
    fn kinetic_identity_for_coherent_state() {
        let s = setup();
        let u = s.p.units();
        let psi = evolve_to(&coherent(&s, 1.0), &s.v, u, s.p.period() / 8.0, DT).unwrap();
        let kin = LocalField::new(LocalKind::Kinetic, &psi, u)
            .unwrap()
            .on_grid();
        let ph = phase_field(&psi, u);
        let q = quantum_potential(&psi, u);
        let dens = probability_density(&psi);
        let h = s.g.dx();
        let mut worst: f64 = 0.0;
        for k in 1..s.g.n_points() - 1 {
            if dens.values()[k] > 1e-6 {
                let grad = (ph.values()[k + 1] - ph.values()[k - 1]) / (2.0 * h);
                let rhs = grad * grad / (2.0 * u.mass) + q.values()[k];
                worst = worst.max((kin[k].unwrap() - rhs).abs());
            }
        }
        assert!(worst < 1e-5, "{worst:e}");
    }

    #[test]
    fn ensemble_averages() {
        let s = setup();
        let u = s.p.units();
        let psi0 = eigenstate(0, &s.p, &s.g).unwrap();
        let ens = sample_initial_positions(&psi0, 100, SamplingScheme::Quantile).unwrap();
        assert!(
            bohm_expectation(LocalKind::Position, &ens, &psi0, u, 0.0)
                .unwrap()
                .abs()
                < 1e-6
        );
        let e = bohm_expectation(LocalKind::Hamiltonian(&s.v), &ens, &psi0, u, 0.0).unwrap();
        assert!((e - 0.5).abs() < 1e-6);

        let c = coherent(&s, 1.0);
        let ens = sample_initial_positions(&c, 10_000, SamplingScheme::Quantile).unwrap();
        let qb = bohm_expectation(LocalKind::Position, &ens, &c, u, 0.0).unwrap();
        let qq = expectation(Operator::Position, &c, u).unwrap().re;
        assert!((qb - SQRT_2).abs() < 1e-3 && (qb - qq).abs() < 1e-3);

        assert!(matches!(
            bohm_expectation(LocalKind::Position, &ens, &c, u, 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn malformed_ensembles_are_rejected() {
        let p = |w: f64| Particle {
            id: 0,
            xi: 0.0,
            weight: w,
            path: vec![PathPoint { t: 0.0, x: 0.0 }],
        };
        assert!(TrajectoryEnsemble::new(vec![p(0.5)], SamplingScheme::Quantile).is_err());
        assert!(TrajectoryEnsemble::new(vec![], SamplingScheme::Quantile).is_err());
        let mut bad = p(1.0);
        bad.path.push(PathPoint { t: 0.0, x: 0.1 });
        assert!(TrajectoryEnsemble::new(vec![bad], SamplingScheme::Quantile).is_err());
    }

    #[test]
    fn horizon_is_enforced() {
        let p = Particle {
            id: 3,
            xi: 1.0,
            weight: 1.0,
            path: vec![PathPoint { t: 0.0, x: 1.0 }, PathPoint { t: 1.0, x: 3.0 }],
        };
        assert_eq!(p.position_at(0.25).unwrap(), 1.5);
        assert!(matches!(p.position_at(1.5), Err(Error::Horizon { .. })));
    }
}
