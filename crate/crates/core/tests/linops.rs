use std::f64::consts::TAU;
use std::sync::OnceLock;

use kuramoto_wave::asymptotics::b_first_order;
use kuramoto_wave::disorder::DisorderLaw;
use kuramoto_wave::linops::SpectralModel;
use kuramoto_wave::spaces::{bracket, GridSpec, ProfileField, Spectrum};
use kuramoto_wave::stationary::build_profile;
use kuramoto_wave::Error;
use proptest::prelude::*;

fn model_at(k: f64, delta: f64, psi: f64) -> SpectralModel {
    let law = DisorderLaw::two_point(1.0).unwrap();
    let grid = GridSpec::new(&law, 32, 128).unwrap();
    SpectralModel::assemble(&build_profile(k, delta, &grid, psi).unwrap(), 32).unwrap()
}

fn model() -> SpectralModel {
    model_at(2.0, 0.3, 0.0)
}

/// Zero-mean perturbation with modes up to `top` and deterministic
/// pseudo-random coefficients of size `1/n^2`.
fn smooth(n_comp: usize, n_modes: usize, top: usize, salt: u64) -> Spectrum {
    let mut u = Spectrum::zeros(n_comp, n_modes);
    let mut x = salt.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for k in 0..n_comp {
        for n in 1..=top {
            let s = 1.0 / (n * n) as f64;
            u.set(k, n, next() * s, next() * s);
        }
    }
    u
}

fn max_diff(a: &Spectrum, b: &Spectrum) -> f64 {
    (a - b).to_vector().iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn parity_blocks_decouple_without_disorder() {
    let m = model_at(2.0, 0.0, 0.0);
    let n = m.n_modes();
    let a = m.matrix();
    let mut worst: f64 = 0.0;
    for k in 0..2 {
        for l in 0..2 {
            for i in 1..=n {
                for j in 1..=n {
                    let c = Spectrum::vector_index(n, k, i, 0);
                    let s = Spectrum::vector_index(n, l, j, 1);
                    worst = worst.max(a[(c, s)].abs()).max(a[(s, c)].abs());
                }
            }
        }
    }
    assert!(worst < 1e-12, "{}", worst);
}

#[test]
fn operator_commutes_with_rotation() {
    let psi = 0.7;
    let m0 = model();
    let m1 = model_at(2.0, 0.3, psi);
    let u = smooth(2, 32, 20, 1);
    let lhs = m1.apply(&u.rotated(psi)).unwrap();
    let rhs = m0.apply(&u).unwrap().rotated(psi);
    assert!(max_diff(&lhs, &rhs) < 1e-9, "{}", max_diff(&lhs, &rhs));
}

#[test]
fn matrix_and_grid_evaluations_agree() {
    let m = model();
    let g = m.grid().clone();
    for salt in 0..5 {
        let u = smooth(2, 32, 24, salt);
        let via_matrix = m.apply(&u).unwrap();
        let via_grid = m.apply_grid(&ProfileField::from_spectrum(&g, &u)).unwrap();
        assert!(max_diff(&via_matrix, &via_grid) <= 1e-8, "{}", max_diff(&via_matrix, &via_grid));
    }
    let with_mean = ProfileField::from_fn(&g, |_, t| 1.0 + t.cos());
    assert!(matches!(m.apply_grid(&with_mean), Err(Error::NotZeroMean { .. })));
}

#[test]
fn adjoint_matches_grid_form_and_pairing() {
    let m = model();
    let g = m.grid().clone();
    let w = g.law().lambdas().to_vec();
    for salt in 0..4 {
        let u = smooth(2, 32, 10, salt);
        let v = smooth(2, 32, 10, 100 + salt);
        let coeff = m.apply_adjoint(&v);
        let grid = m.apply_adjoint_grid(&ProfileField::from_spectrum(&g, &v));
        assert!(max_diff(&coeff, &grid) <= 1e-8, "{}", max_diff(&coeff, &grid));
        let lhs = bracket(&w, &m.apply(&u).unwrap(), &v);
        let rhs = bracket(&w, &u, &coeff);
        assert!((lhs - rhs).abs() <= 1e-10, "{} vs {}", lhs, rhs);
    }
}

#[test]
fn high_modes_are_diffusive() {
    let m = model();
    let lowest = m.eigenvalues().iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let expected = -0.5 * (m.n_modes() * m.n_modes()) as f64;
    assert!((lowest / expected - 1.0).abs() < 0.1, "{} vs {}", lowest, expected);
}

#[test]
fn kernel_and_gap() {
    let m = model();
    assert!(m.zero_eigenvalue().norm() < 1e-8);
    assert!(m.gap() > 0.0);
    let tangent = m.from_vector(m.tangent());
    assert!((m.p(&tangent) - 1.0).abs() < 1e-12);
    let profile_derivative = m.profile().spectrum().derivative().resized(m.n_modes());
    assert!(max_diff(&tangent, &profile_derivative) < 1e-12);
}

#[test]
fn semigroup_identity_kernel_and_decay() {
    let m = model();
    let u = smooth(2, 32, 20, 3);
    assert!(max_diff(&m.semigroup_apply(0.0, &u), &u) < 1e-10);

    let tangent = m.from_vector(m.tangent());
    for t in [0.5, 2.0, 8.0] {
        assert!(max_diff(&m.semigroup_apply(t, &tangent), &tangent) < 1e-8);
    }

    let stable = m.ps_apply(&u);
    let gamma = m.gap();
    let (t1, t2) = (4.0 / gamma, 8.0 / gamma);
    let n1 = m.hm1_norm_vec(&m.semigroup_apply(t1, &stable).to_vector());
    let n2 = m.hm1_norm_vec(&m.semigroup_apply(t2, &stable).to_vector());
    let rate = (n1 / n2).ln() / (t2 - t1);
    assert!(rate >= 0.95 * gamma, "rate {} against gap {}", rate, gamma);
}

#[test]
fn semigroup_preserves_the_splitting() {
    let m = model();
    let u = smooth(2, 32, 20, 4);
    let evolved = m.semigroup_apply(1.5, &m.ps_apply(&u));
    assert!(m.p(&evolved).abs() < 1e-9);
}

#[test]
fn gap_is_resolved() {
    let law = DisorderLaw::two_point(1.0).unwrap();
    let gaps: Vec<f64> = [GridSpec::standard(&law), GridSpec::fine(&law)]
        .iter()
        .map(|g| SpectralModel::assemble(&build_profile(2.0, 0.3, g, 0.0).unwrap(), g.n_modes()).unwrap().gap())
        .collect();
    assert!((gaps[0] - gaps[1]).abs() < 1e-4, "{:?}", gaps);
}

#[test]
fn projection_functional() {
    let m = model();
    let u = smooth(2, 32, 20, 5);
    let p0 = m.p0_apply(&u);
    assert!(max_diff(&m.p0_apply(&p0), &p0) < 1e-12);
    assert!(m.p(&m.ps_apply(&u)).abs() < 1e-12);

    // the constant mode is invisible
    let mut shifted = u.clone();
    shifted.set(0, 0, 0.3, 0.0);
    shifted.set(1, 0, -0.1, 0.0);
    assert!((m.p(&shifted) - m.p(&u)).abs() < 1e-14);
}

#[test]
fn projection_constants_are_bounded_by_exact_norms() {
    let m = model();
    assert!(m.projection_constant() <= m.projection_norm() * (1.0 + 1e-12));
    assert!(m.projection_constant() >= 1.0);
    let empirical = m.semigroup_bound(1.0);
    let operator = m.semigroup_operator_bound(1.0);
    assert!(empirical.c_l >= 1.0);
    assert!(empirical.c_l <= operator.c_l * (1.0 + 1e-6), "{} vs {}", empirical.c_l, operator.c_l);
    assert_eq!(empirical.gamma, m.gap());
}

#[test]
fn proj_m_recovers_profile_phase() {
    let m = model();
    let q = m.profile().spectrum().resized(m.n_modes());
    let exact = m.proj_m(&q, None).unwrap();
    assert!((exact.psi - m.psi()).abs() < 1e-10);
    assert!(m.distance_at(&q, exact.psi) < 1e-12);

    let cell = TAU / m.grid().n_grid() as f64;
    let proj = m.proj_m(&q.rotated(cell), Some(m.psi())).unwrap();
    assert!((proj.psi - (m.psi() + cell)).abs() < 1e-10, "{}", proj.psi);
}

#[test]
fn proj_m_first_order_response() {
    let m = model();
    let q = m.profile().spectrum().resized(m.n_modes());
    let u = smooth(2, 32, 20, 6);
    let u = &u * (1.0 / m.hm1_norm_vec(&u.to_vector()));
    let err = |eps: f64| {
        let proj = m.proj_m(&(&q + &(&u * eps)), Some(m.psi())).unwrap();
        (proj.psi - (m.psi() - eps * m.p(&u))).abs()
    };
    let (e1, e2) = (err(1e-3), err(2e-3));
    assert!(e1 < 1e-5, "{}", e1);
    assert!((e2 / e1).log2() > 1.8, "{} {}", e1, e2);
}

fn four_component() -> &'static SpectralModel {
    static MODEL: OnceLock<SpectralModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let law = DisorderLaw::new(&[1.0, 10.0], &[0.25, 0.25]).unwrap();
        let grid = GridSpec::new(&law, 32, 128).unwrap();
        SpectralModel::assemble(&build_profile(5.0, 0.1, &grid, 0.0).unwrap(), 32).unwrap()
    })
}

#[test]
fn symmetric_drift_vanishes() {
    let m = four_component();
    for a in [0.3, -1.2, 4.0] {
        assert!(m.drift_b(&[a, -a, -a, a]).unwrap().abs() < 1e-10);
    }
    assert!(matches!(m.drift_b(&[1.0, 0.0, 0.0, 0.0]), Err(Error::Unbalanced(_))));
    assert!(m.drift_b(&[1.0, -1.0]).is_err());
}

#[test]
fn drift_matches_first_order() {
    let law = DisorderLaw::two_point(1.0).unwrap();
    let delta = 0.01;
    let m = model_at(2.0, delta, 0.0);
    let xi = [-1.0, 1.0];
    let b = m.drift_b(&xi).unwrap();
    let first = b_first_order(&law, &xi, delta);
    assert!(first > 0.0);
    assert!((b / first - 1.0).abs() < 1e-3, "{} vs {}", b, first);
}

#[test]
fn mild_terms_structure() {
    let m = model();
    let nu = smooth(2, 32, 12, 7);
    let (d, r) = m.mild_terms(&[0.0, 0.0], 100, &nu);
    assert!(d.to_vector().iter().all(|x| *x == 0.0));
    let (_, r2) = m.mild_terms(&[0.0, 0.0], 100, &(&nu * 2.0));
    assert!(max_diff(&r2, &(&r * 4.0)) < 1e-14);

    let xi = [-0.8, 0.8];
    let zero = Spectrum::zeros(2, 32);
    let (d100, r100) = m.mild_terms(&xi, 100, &zero);
    let (d400, _) = m.mild_terms(&xi, 400, &zero);
    assert!(r100.to_vector().iter().all(|x| *x == 0.0));
    assert!(max_diff(&d400, &(&d100 * 0.5)) < 1e-15);
    assert!(d100.to_vector().iter().any(|x| x.abs() > 1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn drift_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, s in -2.0f64..2.0) {
        let m = four_component();
        let x = [a, -a, b, -b];
        let y = [b, a, -a, -b];
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| s * p + q).collect();
        let lhs = m.drift_b(&combo).unwrap();
        let rhs = s * m.drift_b(&x).unwrap() + m.drift_b(&y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn projections_split_identity(salt in any::<u64>()) {
        let law = DisorderLaw::two_point(1.0).unwrap();
        let grid = GridSpec::new(&law, 16, 64).unwrap();
        let m = SpectralModel::assemble(&build_profile(2.0, 0.3, &grid, 0.0).unwrap(), 16).unwrap();
        let u = smooth(2, 16, 16, salt);
        let sum = &m.p0_apply(&u) + &m.ps_apply(&u);
        prop_assert!(max_diff(&sum, &u) < 1e-13);
    }
}
