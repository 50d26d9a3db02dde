use std::f64::consts::{PI, TAU};

use kuramoto_wave::disorder::DisorderLaw;
use kuramoto_wave::harness::oracles;
use kuramoto_wave::spaces::GridSpec;
use kuramoto_wave::stationary::{
    build_profile, count_fixed_points, psi_delta, s_delta, solve_r, wrap_angle,
};
use kuramoto_wave::Error;

fn fig1_law() -> DisorderLaw {
    DisorderLaw::new(&[1.0, 10.0], &[0.25, 0.25]).unwrap()
}

#[test]
fn r0_matches_bessel_bisection() {
    let law = DisorderLaw::two_point(1.0).unwrap();
    for k in [1.5, 2.0, 4.0] {
        let r = solve_r(k, 0.0, &law).unwrap();
        let oracle = oracles::r0_bessel(k).unwrap();
        assert!((r - oracle).abs() < 1e-10, "K = {}: {} vs {}", k, r, oracle);
    }
}

#[test]
fn psi0_is_bessel_ratio() {
    let law = fig1_law();
    for x in [0.3, 1.0, 4.0, 12.0] {
        let p = psi_delta(x, 0.0, &law).unwrap();
        assert!((p - oracles::bessel_ratio(x)).abs() < 1e-13);
    }
}

#[test]
fn s_matches_fourier_convolution() {
    let law = fig1_law();
    for &(delta, x) in &[(0.1, 2.0), (0.1, 6.0), (0.05, 9.0), (0.3, 1.5)] {
        for k in [-2, -1, 1, 2] {
            let w = law.omega(law.dense_index(k).unwrap());
            for t in [0.0, 0.7, 2.0, 3.3, 5.9] {
                let s = s_delta(&law, k, t, x, delta).unwrap();
                let o = oracles::s_fourier(delta * w, t, x);
                assert!((s / o - 1.0).abs() < 1e-10, "k={} t={} {} vs {}", k, t, s, o);
            }
        }
    }
}

#[test]
fn s_mirror_symmetry() {
    let law = fig1_law();
    let (x, delta) = (5.0, 0.1);
    for k in [1, 2] {
        let w = law.omega(law.dense_index(k).unwrap());
        for t in [0.2, 1.9, 4.4] {
            let plus = s_delta(&law, k, t, x, delta).unwrap();
            let minus = s_delta(&law, -k, TAU - t, x, delta).unwrap();
            assert!((minus * (4.0 * PI * delta * w).exp() / plus - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn profiles_are_stationary() {
    for grid_fine in [false, true] {
        let law = fig1_law();
        let grid = if grid_fine { GridSpec::fine(&law) } else { GridSpec::standard(&law) };
        let p = build_profile(5.0, 0.1, &grid, 0.0).unwrap();
        assert!(p.stationarity_residual() < 1e-9, "residual {}", p.stationarity_residual());
        for m in p.field().masses() {
            assert!((m - 1.0).abs() < 1e-12);
        }
        assert!(p.field().min_value() > 0.0);
        // weighted first moment reproduces r
        let s = p.spectrum();
        let moment: f64 = (0..4).map(|k| law.lambda(k) * PI * s.c(k, 1)).sum();
        assert!((moment - p.r).abs() < 1e-10);
        let sine: f64 = (0..4).map(|k| law.lambda(k) * PI * s.s(k, 1)).sum();
        assert!(sine.abs() < 1e-10);
    }
}

#[test]
fn fig1_profiles_single_peaked_and_ordered() {
    let law = fig1_law();
    let grid = GridSpec::standard(&law);
    let p = build_profile(5.0, 0.1, &grid, 0.0).unwrap();
    let mut peaks = Vec::new();
    for k in 0..4 {
        let v = p.field().component(k);
        let n = v.len();
        let local_max = (0..n).filter(|&j| v[j] > v[(j + n - 1) % n] && v[j] >= v[(j + 1) % n]).count();
        assert_eq!(local_max, 1, "component {} has {} maxima", k, local_max);
        let j = (0..n).max_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap()).unwrap();
        peaks.push(wrap_angle(grid.theta(j)));
    }
    // dense order is omega = -10, -1, 1, 10
    assert!(peaks.windows(2).all(|w| w[0] <= w[1]), "{:?}", peaks);
}

#[test]
fn fixed_point_is_unique() {
    let law = fig1_law();
    assert_eq!(count_fixed_points(5.0, 0.1, &law, 10_000).unwrap(), 1);
    let two = DisorderLaw::two_point(1.0).unwrap();
    for k in [1.5, 2.0, 4.0] {
        assert_eq!(count_fixed_points(k, 0.0, &two, 10_000).unwrap(), 1);
    }
}

#[test]
fn no_solution_below_threshold() {
    let law = DisorderLaw::two_point(1.0).unwrap();
    assert!(matches!(solve_r(1.0, 0.0, &law), Err(Error::NoSynchronizedSolution { .. })));
}
