use proptest::prelude::*;

use pwc_core::bohm::{
    integrate_trajectories, sample_initial_positions, Particle, PathPoint, SamplingScheme,
    TrajectoryEnsemble, TrajectoryOptions,
};
use pwc_core::evolution::evolve;
use pwc_core::fock::{build_fock_operators, Quadrature};
use pwc_core::grid::{expectation, inner_product, probability_density, Operator};
use pwc_core::oscillator::{build_state, eigenstate, oscillator_potential};
use pwc_core::{
    Grid, OscillatorParams, RealField, Sequential, StateSpec, Units, Wavefunction, C64,
};

fn grid() -> Grid {
    Grid::new(-10.0, 10.0, 256).unwrap()
}

/// Normalized Gaussian packet with centre, width, momentum and a chirp.
fn packet(g: &Grid, x0: f64, width: f64, k0: f64, chirp: f64) -> Wavefunction {
    Wavefunction::from_fn(g, 0.0, |x| {
        let d = x - x0;
        C64::from_polar(
            (-d * d / (4.0 * width * width)).exp(),
            k0 * x + chirp * d * d,
        )
    })
    .unwrap()
}

fn packet_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-2.0..2.0f64, 0.6..1.5f64, -2.0..2.0f64, -0.3..0.3f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constructors_and_steps_keep_unit_norm(
        (x0, w, k0, c) in packet_strategy(),
        steps in 1usize..200,
        dt in 0.001..0.05f64,
    ) {
        let g = grid();
        let p = OscillatorParams::natural();
        let v = oscillator_potential(&p, &g);
        let psi = packet(&g, x0, w, k0, c);
        prop_assert!((psi.norm_squared() - 1.0).abs() <= 1e-9);
        let out = evolve(&psi, &v, p.units(), dt, steps).unwrap();
        prop_assert!((out.norm_squared() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn spectral_round_trip(re in prop::collection::vec(-1.0..1.0f64, 256), im in prop::collection::vec(-1.0..1.0f64, 256)) {
        let g = grid();
        let orig: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        let mut data = orig.clone();
        g.fft().forward(&mut data);
        g.fft().inverse(&mut data);
        let err = data.iter().zip(&orig).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12);
    }

    #[test]
    fn primitive_operators_are_hermitian(a in packet_strategy(), b in packet_strategy()) {
        let g = grid();
        let p = OscillatorParams::natural();
        let v = oscillator_potential(&p, &g);
        let u = Units::NATURAL;
        let phi = packet(&g, a.0, a.1, a.2, a.3);
        let psi = packet(&g, b.0, b.1, b.2, b.3);
        for op in [
            Operator::Position,
            Operator::Momentum,
            Operator::Kinetic,
            Operator::Potential(&v),
            Operator::Hamiltonian(&v),
        ] {
            let lhs = inner_product(&phi, &pwc_core::grid::apply_operator(op, &psi, u).unwrap()).unwrap();
            let rhs = inner_product(&psi, &pwc_core::grid::apply_operator(op, &phi, u).unwrap()).unwrap();
            prop_assert!((lhs - rhs.conj()).norm() <= 1e-9, "{:?}", op);
        }
    }

    #[test]
    fn position_expectation_is_density_quadrature((x0, w, k0, c) in packet_strategy()) {
        let g = grid();
        let psi = packet(&g, x0, w, k0, c);
        let dens = probability_density(&psi);
        let first: f64 = g.points().zip(dens.values()).map(|(x, p)| x * p * g.dx()).sum();
        let q = expectation(Operator::Position, &psi, Units::NATURAL).unwrap();
        prop_assert!((q.re - first).abs() <= 1e-12);
        let sq = RealField::from_fn(&g, 0.0, |x| x * x);
        let second: f64 = sq.values().iter().zip(dens.values()).map(|(f, p)| f * p * g.dx()).sum();
        let q2 = expectation(Operator::Potential(&sq), &psi, Units::NATURAL).unwrap();
        prop_assert!((q2.re - second).abs() <= 1e-12);
    }

    #[test]
    fn heisenberg_conjugation_preserves_hermiticity(t in -20.0..20.0f64, which in prop::bool::ANY) {
        let p = OscillatorParams::new(1.3, 0.7, 0.9).unwrap();
        let ops = build_fock_operators(24, &p).unwrap();
        let (which, base) = if which { (Quadrature::Position, ops.q()) } else { (Quadrature::Momentum, ops.p()) };
        let m = ops.heisenberg(which, t);
        prop_assert!(m.max_abs_diff(&m.adjoint()) <= 1e-12);
        // power traces fix the spectrum of a Hermitian matrix
        let (mut a, mut b) = (m.clone(), base.clone());
        for _ in 0..4 {
            let scale = b.trace().norm().max(1.0);
            prop_assert!((a.trace() - b.trace()).norm() <= 1e-12 * scale);
            a = &a * &m;
            b = &b * base;
        }
    }

    #[test]
    fn random_sampling_is_reproducible(seed in any::<u64>(), n in 1usize..300) {
        let g = grid();
        let psi = packet(&g, 0.3, 1.0, 0.5, 0.0);
        let a = sample_initial_positions(&psi, n, SamplingScheme::Random { seed }).unwrap();
        let b = sample_initial_positions(&psi, n, SamplingScheme::Random { seed }).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.particles().iter().all(|q| g.contains(q.xi)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn trajectories_keep_their_order(xa in -2.0..2.0f64, gap in 0.01..1.0f64, beta in 0.0..1.0f64) {
        let g = Grid::new(-10.0, 10.0, 512).unwrap();
        let p = OscillatorParams::natural();
        let v = oscillator_potential(&p, &g);
        let c = C64::new(beta.cos(), 0.0);
        let spec = StateSpec::superposition(vec![c, C64::new(0.0, beta.sin())]).unwrap();
        let psi = build_state(&spec, &p, &g).unwrap();
        let start = |id: usize, x: f64| Particle { id, xi: x, weight: 0.5, path: vec![PathPoint { t: 0.0, x }] };
        let ens = TrajectoryEnsemble::new(vec![start(0, xa), start(1, xa + gap)], SamplingScheme::Quantile).unwrap();
        let run = integrate_trajectories(
            &ens, &psi, &v, p.units(), p.period() / 2.0,
            &TrajectoryOptions::new(p.period() / 1000.0), &Sequential,
        ).unwrap();
        let (a, b) = (&run.ensemble.particles()[0].path, &run.ensemble.particles()[1].path);
        for (pa, pb) in a.iter().zip(b) {
            prop_assert!(pa.x < pb.x, "crossed at t = {}", pa.t);
        }
    }
}

#[test]
fn eigenstates_are_orthonormal_with_parity() {
    let g = Grid::new(-10.0, 10.0, 1024).unwrap();
    let p = OscillatorParams::natural();
    let v = oscillator_potential(&p, &g);
    let states: Vec<Wavefunction> = (0..=8).map(|n| eigenstate(n, &p, &g).unwrap()).collect();
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((inner_product(a, b).unwrap() - C64::new(want, 0.0)).norm() < 1e-9);
        }
        let amps = a.amplitudes();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        // x_k and x_{n-k} are mirror images about 0
        for k in 1..amps.len() {
            assert!((amps[k] - amps[amps.len() - k] * sign).norm() < 1e-12);
        }
        let h = pwc_core::grid::apply_operator(Operator::Hamiltonian(&v), a, p.units()).unwrap();
        let peak = amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let residual = h
            .amplitudes()
            .iter()
            .zip(amps)
            .map(|(hz, z)| (hz - z * p.energy(i)).norm())
            .fold(0.0, f64::max);
        assert!(residual / (p.energy(i) * peak) < 1e-6, "n = {i}");
    }
}
