use std::sync::Arc;

use teukolsky::grid::UniformGrid;
use teukolsky::propagator::{hamiltonian_coeffs, GaussianBump, HamiltonianCoefficients, WaveState};
use teukolsky::radial::RadialGeometry;
use teukolsky::timedomain::*;
use teukolsky::{Complex64, Error, KerrParams};

fn coeffs(a: f64, s: f64, k: f64, grid: UniformGrid, n: usize) -> Arc<HamiltonianCoefficients> {
    let geom = RadialGeometry::new(KerrParams::new(1.0, a).unwrap(), s, k).unwrap();
    Arc::new(hamiltonian_coeffs(&geom, grid, n, 8).unwrap())
}

fn bump(angular: Vec<f64>) -> GaussianBump {
    GaussianBump {
        center: 0.0,
        width: 1.0,
        amplitude: Complex64::new(1.0, 0.0),
        angular,
        velocity: Complex64::new(0.0, 0.0),
        cutoff: 1e-16,
    }
}

#[test]
fn zero_data_stay_zero() {
    let grid = UniformGrid::spanning(-20.0, 20.0, 0.1).unwrap();
    let c = coeffs(0.6, 2.0, 2.0, grid, 12);
    let psi = WaveState::zeros(2.0, 2.0, c.shape());
    let cfg = EvolutionConfig { dt: 0.05, duration: 2.0, sponge_width: 5.0, snapshot_times: vec![-2.0], ..Default::default() };
    let tr = evolve(&c, &psi, &cfg).unwrap();
    assert_eq!(tr.states[0].max_abs(), 0.0);
    assert!(tr.monitors.iter().all(|m| m.l2 == 0.0 && m.energy == 0.0));
}

#[test]
fn schwarzschild_quadrupole_matches_regge_wheeler() {
    // a = 0, s = k = 0: the ℓ = 2 Legendre component evolves by the 1+1 Regge–Wheeler equation
    let grid = UniformGrid::spanning(-40.0, 40.0, 0.05).unwrap();
    let c = coeffs(0.0, 0.0, 0.0, grid, 8);
    let b = bump(vec![0.0, 0.0, 1.0]);
    let psi0 = b.sample(&c.basis, &c.angular.x, &grid).unwrap();
    let cfg = EvolutionConfig { dt: 0.01, duration: 10.0, sponge_width: 5.0, snapshot_times: vec![-10.0], ..Default::default() };
    let tr = evolve(&c, &psi0, &cfg).unwrap();

    let fine = grid.refined(4);
    let g0: Vec<Complex64> = fine.points().iter().map(|u| Complex64::new((-0.5 * u * u).exp(), 0.0)).collect();
    let zero = vec![Complex64::new(0.0, 0.0); fine.len];
    let rw = regge_wheeler_1d(1.0, 2.0, &fine, &g0, &zero, 0.005, 10.0).unwrap();

    // Φ(u, x) = g(u) P̂₂(x) with P̂₂ the normalised basis function
    let profile: Vec<f64> = c.angular.x.iter().map(|&x| c.basis.eval(x)[2]).collect();
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for i in grid.indices_in(-25.0, 25.0) {
        let g = rw[4 * i];
        for (j, p) in profile.iter().enumerate() {
            err = err.max((tr.states[0].phi[(i, j)] - g * p).norm());
            scale = scale.max((g * p).norm());
        }
    }
    assert!(err < 2e-3 * scale, "{err:e} vs {scale:e}");
}

fn snapshot_at(h: f64, dt: f64) -> (UniformGrid, WaveState) {
    let grid = UniformGrid::spanning(-24.0, 24.0, h).unwrap();
    let c = coeffs(0.6, 2.0, 2.0, grid, 16);
    let psi0 = bump(vec![1.0, 0.5]).sample(&c.basis, &c.angular.x, &grid).unwrap();
    let cfg = EvolutionConfig { dt, duration: 4.0, sponge_width: 4.0, snapshot_times: vec![-4.0], ..Default::default() };
    let mut tr = evolve(&c, &psi0, &cfg).unwrap();
    (grid, tr.states.pop().unwrap())
}

#[test]
fn three_resolution_self_convergence() {
    let (_, coarse) = snapshot_at(0.4, 0.08);
    let (_, mid) = snapshot_at(0.2, 0.04);
    let (_, fine) = snapshot_at(0.1, 0.02);
    let diff = |a: &WaveState, fa: usize, b: &WaveState, fb: usize| {
        let n = coarse.phi.nrows();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..a.phi.ncols() {
                s += (a.phi[(i * fa, j)] - b.phi[(i * fb, j)]).norm_sqr();
            }
        }
        s.sqrt()
    };
    let e1 = diff(&coarse, 1, &mid, 2);
    let e2 = diff(&mid, 2, &fine, 4);
    let rate = (e1 / e2).log2();
    assert!(rate >= 2.0, "rate {rate}: {e1:e} {e2:e}");
}

#[test]
fn stability_scan_over_spins_and_rotation() {
    let grid = UniformGrid::spanning(-30.0, 30.0, 0.1).unwrap();
    for (a, s, k) in [(0.0, 0.0, 0.0), (0.3, 0.0, 1.0), (0.6, 1.0, 1.0), (0.6, 2.0, 2.0), (0.9, -2.0, 2.0)] {
        let c = coeffs(a, s, k, grid, 12);
        let psi0 = bump(vec![1.0]).sample(&c.basis, &c.angular.x, &grid).unwrap();
        let bound = 0.8 * grid.step.min(EvolutionConfig::angular_spacing(&c));
        let dt = 1.0 / (1.0 / bound).ceil();
        let cfg = EvolutionConfig { dt, duration: 20.0, sponge_width: 8.0, monitor_every: 5, instability_window: 4.0, ..Default::default() };
        // horizon redshift amplifies s ≠ 0 packets by up to e^{2|s|κ|t|} before they reach the sponge
        let tr = evolve(&c, &psi0, &cfg).unwrap_or_else(|e| panic!("a={a} s={s} k={k}: {e}"));
        let first = tr.monitors[0].l2;
        assert!(tr.monitors.iter().all(|m| m.l2.is_finite() && m.l2 < 1e3 * first), "a={a} s={s}");
        let too_big = EvolutionConfig { dt: 2.0 * bound, ..cfg };
        assert!(matches!(evolve(&c, &psi0, &too_big), Err(Error::InvalidParams(_))));
    }
}

#[test]
fn energy_norm_is_a_positive_quadratic_form() {
    let grid = UniformGrid::spanning(-15.0, 15.0, 0.1).unwrap();
    let c = coeffs(0.6, 2.0, 2.0, grid, 12);
    let zero = WaveState::zeros(2.0, 2.0, c.shape());
    assert_eq!(c.energy_norm(&zero).unwrap(), 0.0);
    let mut psi = bump(vec![0.3, -1.0, 0.2]).sample(&c.basis, &c.angular.x, &grid).unwrap();
    let mut seed = 12345u64;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for z in psi.phi_t.iter_mut() {
        *z += Complex64::new(next(), next()) * 1e-2;
    }
    let e = c.energy_norm(&psi).unwrap();
    assert!(e > 0.0);
    let e2 = c.energy_norm(&psi.scaled(Complex64::new(2.0, 0.0))).unwrap();
    assert!((e2 - 4.0 * e).abs() < 1e-12 * e2);
}

#[test]
fn support_at_edge_and_bad_configs_are_rejected() {
    let grid = UniformGrid::spanning(-10.0, 10.0, 0.1).unwrap();
    let c = coeffs(0.3, 0.0, 0.0, grid, 8);
    let psi0 = bump(vec![1.0]).sample(&c.basis, &c.angular.x, &grid).unwrap();
    let bad = EvolutionConfig { dt: 0.05, duration: 1.0, sponge_width: 12.0, ..Default::default() };
    assert!(evolve(&c, &psi0, &bad).is_err());
    let bad = EvolutionConfig { dt: 0.05, duration: 1.0, sponge_width: 2.0, snapshot_times: vec![-0.525], ..Default::default() };
    assert!(evolve(&c, &psi0, &bad).is_err());
    let mut edge = psi0.clone();
    edge.phi[(0, 0)] = Complex64::new(1.0, 0.0);
    let ok = EvolutionConfig { dt: 0.05, duration: 1.0, sponge_width: 2.0, ..Default::default() };
    assert!(matches!(evolve(&c, &edge, &ok), Err(Error::SupportAtEdge(_))));
}
