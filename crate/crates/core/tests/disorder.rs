use kuramoto_wave::disorder::{balanced_assignment, sample_iid, DisorderLaw, DisorderSample};
use kuramoto_wave::Error;
use proptest::prelude::*;

fn law(d: usize) -> DisorderLaw {
    match d {
        1 => DisorderLaw::two_point(1.0).unwrap(),
        _ => DisorderLaw::new(&[1.0, 10.0], &[0.25, 0.25]).unwrap(),
    }
}

#[test]
fn law_construction() {
    let l = DisorderLaw::two_point(1.0).unwrap();
    assert_eq!(l.omegas(), &[-1.0, 1.0]);
    assert_eq!(l.lambdas(), &[0.5, 0.5]);

    let l = DisorderLaw::new(&[1.0, 10.0], &[0.25, 0.25]).unwrap();
    assert_eq!(l.n_components(), 4);
    assert_eq!(l.omegas(), &[-10.0, -1.0, 1.0, 10.0]);
    for k in [-2, -1, 1, 2] {
        let j = l.dense_index(k).unwrap();
        assert_eq!(l.signed_index(j), k);
        assert_eq!(l.omega(l.mirror(j)), -l.omega(j));
        assert_eq!(l.lambda(l.mirror(j)), l.lambda(j));
    }
    assert_eq!(l.dense_index(0), None);
    assert_eq!(l.dense_index(3), None);

    let l = DisorderLaw::two_point(0.5).unwrap();
    assert_eq!(l.omegas(), &[-0.5, 0.5]);
}

#[test]
fn law_rejections() {
    assert!(matches!(DisorderLaw::new(&[0.0], &[0.5]), Err(Error::InvalidLaw(_))));
    assert!(matches!(DisorderLaw::new(&[-1.0], &[0.5]), Err(Error::InvalidLaw(_))));
    assert!(matches!(DisorderLaw::new(&[1.0, 1.0], &[0.25, 0.25]), Err(Error::InvalidLaw(_))));
    assert!(matches!(DisorderLaw::new(&[1.0], &[0.4]), Err(Error::InvalidLaw(_))));
    assert!(matches!(DisorderLaw::new(&[1.0, 2.0], &[0.5]), Err(Error::InvalidLaw(_))));
    let l = DisorderLaw::new(&[1.0], &[0.5 + 1e-10]).unwrap();
    assert!((l.lambdas().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn balanced_and_skewed_examples() {
    let l = law(1);
    let s = DisorderSample::from_assignments(&l, vec![1, -1, 1, -1]).unwrap();
    assert_eq!(s.xi(), vec![0.0, 0.0]);

    let s = DisorderSample::from_assignments(&l, vec![1, 1, 1, -1]).unwrap();
    let xi = s.xi();
    let plus = l.dense_index(1).unwrap();
    let minus = l.dense_index(-1).unwrap();
    assert!((xi[plus] - 0.5).abs() < 1e-15);
    assert!((xi[minus] + 0.5).abs() < 1e-15);

    let s = DisorderSample::from_assignments(&l, vec![1; 10]).unwrap();
    assert!((s.xi()[plus] - 10f64.sqrt() * 0.5).abs() < 1e-14);

    let s = balanced_assignment(&l, 400).unwrap();
    assert!(s.xi().iter().all(|x| *x == 0.0));
    assert_eq!(s.assignments()[..4], [1, -1, 1, -1]);
}

#[test]
fn invalid_assignment_reports_position() {
    let l = law(1);
    match DisorderSample::from_assignments(&l, vec![1, -1, 2, 1]) {
        Err(Error::InvalidAssignment { position, index }) => {
            assert_eq!(position, 2);
            assert_eq!(index, 2);
        }
        other => panic!("unexpected {:?}", other),
    }
    assert!(DisorderSample::from_assignments(&l, vec![0]).is_err());
}

#[test]
fn iid_is_reproducible_and_requires_room() {
    let l = law(2);
    let a = sample_iid(&l, 500, 7).unwrap();
    let b = sample_iid(&l, 500, 7).unwrap();
    let c = sample_iid(&l, 500, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.assignments(), c.assignments());
    assert!(sample_iid(&l, 3, 7).is_err());
}

/// Across 100 seeds at N = 400 the fluctuation vector of an iid sample stays
/// below N^0.12, the typical size being O(1).
#[test]
fn iid_admissibility_over_seeds() {
    let l = law(1);
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let s = sample_iid(&l, 400, seed).unwrap();
        let adm = s.admissibility(0.12);
        worst = worst.max(adm.max_abs_xi);
        assert!(adm.admissible, "seed {}: {:?}", seed, adm);
    }
    assert!(worst > 0.5, "suspiciously small fluctuations: {}", worst);
}

#[test]
fn csv_export() {
    let s = DisorderSample::from_assignments(&law(1), vec![1, 1, 1, -1]).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,omega,lambda,count,lambda_n,xi");
    assert_eq!(lines[1], "-1,-1,0.5,1,0.25,-0.5");
    assert_eq!(lines[2], "1,1,0.5,3,0.75,0.5");
}

#[test]
fn fixture_rejects_malformed_input() {
    let l = law(1);
    assert!(DisorderSample::read_fixture(&l, "1 3 0\n1\n-1\n".as_bytes()).is_err());
    assert!(DisorderSample::read_fixture(&l, "2 1 0\n1\n".as_bytes()).is_err());
    assert!(DisorderSample::read_fixture(&l, "1 1 0\n3\n".as_bytes()).is_err());
    assert!(DisorderSample::read_fixture(&l, "".as_bytes()).is_err());
}

fn assignments(d: usize) -> impl Strategy<Value = Vec<i32>> {
    let d = d as i32;
    prop::collection::vec((1..=d, any::<bool>()).prop_map(|(k, neg)| if neg { -k } else { k }), 1..300)
}

proptest! {
    #[test]
    fn fluctuation_sums_to_zero(d in 1usize..=2, seed in any::<u64>(), n in 4usize..2000) {
        let s = sample_iid(&law(d), n, seed).unwrap();
        let xi = s.xi();
        prop_assert!(xi.iter().sum::<f64>().abs() <= 1e-10 * (n as f64).sqrt());
        prop_assert!((s.empirical().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(s.counts().iter().sum::<usize>(), n);
    }

    #[test]
    fn mirror_swaps_fluctuations(a in assignments(2)) {
        let l = law(2);
        let s = DisorderSample::from_assignments(&l, a).unwrap();
        let m = s.mirrored();
        let (xs, xm) = (s.xi(), m.xi());
        for j in 0..l.n_components() {
            prop_assert_eq!(xm[j], xs[l.mirror(j)]);
        }
    }

    #[test]
    fn assignments_roundtrip(a in assignments(2)) {
        let l = law(2);
        let s = DisorderSample::from_assignments(&l, a.clone()).unwrap();
        prop_assert_eq!(s.assignments(), &a[..]);
        let again = DisorderSample::from_assignments(&l, s.assignments().to_vec()).unwrap();
        prop_assert_eq!(&again, &s);
        for j in 0..l.n_components() {
            let k = l.signed_index(j);
            prop_assert_eq!(s.counts()[j], a.iter().filter(|x| **x == k).count());
        }
    }

    #[test]
    fn fixture_roundtrip(a in assignments(2), seed in any::<u64>()) {
        let l = law(2);
        let s = DisorderSample::from_assignments(&l, a).unwrap();
        let mut buf = Vec::new();
        s.write_fixture(&mut buf, seed).unwrap();
        let (back, seed_back) = DisorderSample::read_fixture(&l, buf.as_slice()).unwrap();
        prop_assert_eq!(back, s);
        prop_assert_eq!(seed_back, seed);
    }
}
