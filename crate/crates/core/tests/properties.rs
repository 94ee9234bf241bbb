use ndarray::Array2;
use proptest::prelude::*;
use teukolsky::angular::{eigenpairs, AngularParams, EigenOptions};
use teukolsky::grid::UniformGrid;
use teukolsky::propagator::WaveState;
use teukolsky::snapshot::Snapshot;
use teukolsky::timedomain::summarize_decay;
use teukolsky::{Complex64, KerrParams, TortoiseChart};

fn small() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(small())]

    #[test]
    fn horizons_are_roots_of_delta(mass in 0.1f64..10.0, frac in 0.0f64..0.99) {
        let kerr = KerrParams::new(mass, frac * mass).unwrap();
        let (r0, r1) = kerr.horizons();
        prop_assert!(r0 <= r1);
        prop_assert!((r0 + r1 - 2.0 * mass).abs() < 1e-12 * mass);
        prop_assert!(kerr.delta(r1).abs() < 1e-12 * mass * mass);
        let x = 0.37 * mass;
        prop_assert!((kerr.delta_from_horizon(x) - kerr.delta(r1 + x)).abs() < 1e-12 * mass * mass);
    }

    #[test]
    fn tortoise_chart_round_trips(frac in 0.0f64..0.95, offset in 0.05f64..60.0) {
        let kerr = KerrParams::new(1.0, frac).unwrap();
        let chart = TortoiseChart::new(kerr).unwrap();
        let r = kerr.horizons().1 + offset;
        let u = chart.u_of_r(r).unwrap();
        prop_assert!((chart.r_of_u(u).unwrap() - r).abs() < 1e-9 * r);
        // u is increasing in r
        prop_assert!(chart.u_of_r(r * 1.01).unwrap() > u);
    }

    #[test]
    fn real_angular_frequency_gives_real_ordered_spectrum(om in -8.0f64..8.0, spin in 0usize..3) {
        let s = spin as f64;
        let opts = EigenOptions { basis_size: 48, grid_points: 48, ..EigenOptions::default() };
        let dec = eigenpairs(&AngularParams::new(s, s, Complex64::new(om, 0.0)).unwrap(), 5, &opts).unwrap();
        let lam = dec.lambdas();
        for w in lam.windows(2) {
            prop_assert!(w[0].re <= w[1].re + 1e-10);
        }
        for l in &lam {
            prop_assert!(l.im.abs() < 1e-9 * (1.0 + l.norm()));
        }
    }

    #[test]
    fn snapshot_binary_round_trip(n_u in 2usize..12, n_theta in 1usize..6, seed in any::<u64>(), t in -50.0f64..0.0) {
        let grid = UniformGrid::new(-3.0, 0.25, n_u).unwrap();
        let theta: Vec<f64> = (0..n_theta).map(|j| (j as f64 + 0.5) * std::f64::consts::PI / n_theta as f64).collect();
        let val = |i: usize, j: usize, c: u64| {
            let h = seed.wrapping_mul(6364136223846793005).wrapping_add((i * 31 + j * 7) as u64 + c);
            Complex64::new((h % 1000) as f64 / 7.0 - 70.0, (h / 1000 % 1000) as f64 * 1e-3)
        };
        let state = WaveState {
            s: 2.0,
            k: 2.0,
            phi: Array2::from_shape_fn((n_u, n_theta), |(i, j)| val(i, j, 1)),
            phi_t: Array2::from_shape_fn((n_u, n_theta), |(i, j)| val(i, j, 2)),
            support: None,
        };
        let snap = Snapshot::new(t, grid, theta, state).unwrap();
        let mut buf = vec![];
        snap.write_binary(&mut buf).unwrap();
        let back = Snapshot::read_binary(&buf[..]).unwrap();
        prop_assert_eq!(back.t, snap.t);
        prop_assert_eq!(back.theta, snap.theta);
        prop_assert_eq!(back.state.phi, snap.state.phi);
        prop_assert_eq!(back.state.phi_t, snap.state.phi_t);
        prop_assert!(Snapshot::read_binary(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn monotone_decay_has_no_block_growth(rate in 0.01f64..1.0, amp in 0.1f64..10.0) {
        let series: Vec<(f64, f64)> = (0..=200).map(|i| {
            let t = -0.5 * i as f64;
            (t, amp * (rate * t).exp())
        }).collect();
        let d = summarize_decay(&series, 10.0).unwrap();
        prop_assert_eq!(d.peak_t, 0.0);
        prop_assert!(d.late_growth <= 1.0);
        prop_assert!(d.last <= d.peak);
    }
}
