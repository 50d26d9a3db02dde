use std::f64::consts::{PI, TAU};

use kuramoto_wave::disorder::DisorderLaw;
use kuramoto_wave::spaces::{
    bracket, convolve_j, h1_norm, h_alpha_norm, hminus1_norm, hminus1_norm_unchecked, weighted_bracket,
    GridSpec, ProfileField, SignedMeasureField, Spectrum,
};
use kuramoto_wave::stationary::build_profile;
use kuramoto_wave::Error;
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(&DisorderLaw::two_point(1.0).unwrap(), 16, 64).unwrap()
}

fn both(f: impl Fn(f64) -> f64) -> ProfileField {
    ProfileField::from_fn(&grid(), |_, t| f(t))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn grid_constraints() {
    let law = DisorderLaw::two_point(1.0).unwrap();
    assert!(GridSpec::new(&law, 16, 32).is_err());
    assert!(GridSpec::new(&law, 16, 100).is_err());
    let g = GridSpec::standard(&law);
    assert_eq!((g.n_modes(), g.n_grid()), (64, 512));
    let g = GridSpec::fine(&law);
    assert_eq!((g.n_modes(), g.n_grid()), (128, 1024));
}

#[test]
fn h1_examples() {
    assert_eq!(both(|_| 0.0).h1_norm(), 0.0);
    assert!(close(both(f64::cos).h1_norm(), PI.sqrt(), 1e-12));
    assert!(close(both(|t| (3.0 * t).cos()).h1_norm(), 3.0 * PI.sqrt(), 1e-12));
}

#[test]
fn hminus1_examples() {
    assert_eq!(both(|_| 0.0).hminus1_norm().unwrap(), 0.0);
    assert!(close(both(f64::cos).hminus1_norm().unwrap(), PI.sqrt(), 1e-12));
    assert!(matches!(both(|t| 1.0 + t.cos()).hminus1_norm(), Err(Error::NotZeroMean { .. })));
}

#[test]
fn h_alpha_examples() {
    assert!(close(both(f64::sin).h_alpha_norm(0.0), PI.sqrt(), 1e-12));
    assert!(close(both(f64::sin).h_alpha_norm(2.0), 2.0 * PI.sqrt(), 1e-12));
    assert!(close(both(|t| (2.0 * t).sin()).h_alpha_norm(-2.0), (PI / 25.0).sqrt(), 1e-12));
    let u = both(|t| (2.0 * t).cos() - 0.5 * (5.0 * t).sin());
    let w = u.grid().law().lambdas();
    assert!(h_alpha_norm(w, u.spectrum(), 1.0) >= h1_norm(w, u.spectrum()));
    assert!(h_alpha_norm(w, u.spectrum(), -1.0) <= hminus1_norm(w, u.spectrum()).unwrap());
}

#[test]
fn convolution_examples() {
    let uniform = both(|_| 1.0 / TAU).convolve_j(3.0);
    assert!(uniform.values().iter().flatten().all(|v| v.abs() < 1e-14));

    let g = grid();
    let conv = both(|t| t.cos() / PI).convolve_j(1.0);
    for (j, v) in conv.component(0).iter().enumerate() {
        assert!(close(*v, -g.theta(j).sin(), 1e-13));
    }

    let law = DisorderLaw::two_point(1.0).unwrap();
    let g = GridSpec::standard(&law);
    let q = build_profile(2.0, 0.0, &g, 0.0).unwrap();
    let conv = q.field().convolve_j(2.0);
    let c: f64 = q.field().component(0).iter().enumerate().map(|(j, v)| v * g.theta(j).cos()).sum::<f64>()
        * g.dtheta();
    assert!(close(c, q.r, 1e-10));
    for (j, v) in conv.component(1).iter().enumerate() {
        assert!(close(*v, -2.0 * q.r * g.theta(j).sin(), 1e-10));
    }
}

#[test]
fn bracket_examples() {
    let g = grid();
    let atoms = |x: f64| vec![vec![x], vec![0.0]];
    let cos_plus = ProfileField::from_fn(&g, |k, t| if k == 1 { t.cos() } else { 0.0 });
    let m = SignedMeasureField::from_atoms(&g, atoms(0.0)).unwrap();
    assert!(close(weighted_bracket(&m, &both(|_| 0.0)), 0.0, 1e-15));
    assert!(close(weighted_bracket(&m, &cos_plus), 0.5, 1e-14));

    let n = 64;
    let spread: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    let m = SignedMeasureField::from_atoms(&g, vec![spread.clone(), spread]).unwrap();
    assert!(close(weighted_bracket(&m, &both(f64::cos)), 0.0, 1e-14));

    assert!(matches!(
        SignedMeasureField::from_atoms(&g, vec![vec![], vec![0.0]]),
        Err(Error::EmptyPopulation(-1))
    ));
}

#[test]
fn measure_minus_density_pairs_consistently() {
    let g = grid();
    let m = SignedMeasureField::from_atoms(&g, vec![vec![0.3, 1.0], vec![2.0]])
        .unwrap()
        .minus(both(|t| (1.0 + 0.5 * t.cos()) / TAU).spectrum());
    let f = both(|t| (2.0 * t).sin() + t.cos());
    let direct = 0.5 * ((0.6f64).sin() + 0.3f64.cos() + 2.0f64.sin() + 1.0f64.cos()) / 2.0
        + 0.5 * ((4.0f64).sin() + 2.0f64.cos())
        - 0.25;
    assert!(close(weighted_bracket(&m, &f), direct, 1e-12), "{} vs {}", weighted_bracket(&m, &f), direct);
    assert!(m.hminus1_norm().is_ok());
}

#[test]
fn single_atom_bound() {
    let g = GridSpec::standard(&DisorderLaw::two_point(1.0).unwrap());
    let bound = (PI / 3.0).sqrt() + 0.01;
    let mut worst = 0.0f64;
    for j in 0..200 {
        let x = TAU * j as f64 / 200.0;
        let m = SignedMeasureField::from_atoms(&g, vec![vec![x], vec![-x]]).unwrap();
        worst = worst.max(hminus1_norm_unchecked(m.weights(), m.spectrum()));
    }
    assert!(worst <= bound, "{}", worst);
}

fn random_spectrum(n_comp: usize, n_modes: usize) -> impl Strategy<Value = Spectrum> {
    prop::collection::vec(-1.0f64..1.0, 2 * n_comp * n_modes).prop_map(move |v| {
        let mut s = Spectrum::zeros(n_comp, n_modes);
        for k in 0..n_comp {
            for n in 1..=n_modes {
                let i = 2 * (k * n_modes + n - 1);
                s.set(k, n, v[i], v[i + 1]);
            }
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn duality_inequality(u in random_spectrum(2, 12), h in random_spectrum(2, 12)) {
        let w = [0.5, 0.5];
        let lhs = bracket(&w, &u, &h).abs();
        let rhs = hminus1_norm(&w, &u).unwrap() * h1_norm(&w, &h);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
    }
}

proptest! {
    #[test]
    fn parseval_roundtrip(u in random_spectrum(2, 15), c0 in -1.0f64..1.0) {
        let mut u = u;
        u.set(0, 0, c0, 0.0);
        let g = grid();
        let field = ProfileField::from_spectrum(&g, &u);
        let back = Spectrum::from_grid(field.values(), g.n_modes());
        let again = ProfileField::from_spectrum(&g, &back);
        for (a, b) in field.values().iter().flatten().zip(again.values().iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        for k in 0..2 {
            for n in 0..=15 {
                prop_assert!((back.c(k, n) - u.c(k, n)).abs() <= 1e-12);
                prop_assert!((back.s(k, n) - u.s(k, n)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn probability_bound(atoms in prop::collection::vec(prop::collection::vec(0.0f64..TAU, 1..50), 4)) {
        let law = DisorderLaw::new(&[1.0, 10.0], &[0.25, 0.25]).unwrap();
        let g = GridSpec::standard(&law);
        let m = SignedMeasureField::from_atoms(&g, atoms).unwrap();
        for k in 0..4 {
            for n in 1..=g.n_modes() {
                prop_assert!(m.spectrum().c(k, n).abs() <= 1.0 / PI + 1e-14);
                prop_assert!(m.spectrum().s(k, n).abs() <= 1.0 / PI + 1e-14);
            }
        }
        let norm = hminus1_norm_unchecked(m.weights(), m.spectrum());
        prop_assert!(norm <= (PI / 3.0).sqrt() + 0.01);
    }

    #[test]
    fn convolution_sees_only_mode_one(u in random_spectrum(2, 10), k in 0.1f64..10.0) {
        let mut without = u.clone();
        for c in 0..2 {
            without.set(c, 1, 0.0, 0.0);
        }
        let conv = convolve_j(k, &without);
        prop_assert!(conv.to_vector().iter().all(|v| *v == 0.0));
        let full = convolve_j(k, &u);
        for c in 0..2 {
            for n in 2..=10 {
                prop_assert_eq!(full.c(c, n), 0.0);
                prop_assert_eq!(full.s(c, n), 0.0);
            }
        }
    }
}
