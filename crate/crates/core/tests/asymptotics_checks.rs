use gaplab::asymptotics::{
    check_perturbation_lemma, finite_airy, finite_airy_convergence, fit_rate, perturbation_battery, random_instance,
    NormPair,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

proptest! {
    #[test]
    fn fit_rate_recovers_power_laws(
        slope in -3.0f64..3.0,
        prefactor in 1e-3f64..1e3,
        start in 1e-8f64..1.0,
        ratio in 1.5f64..20.0,
        points in 3usize..8,
    ) {
        let xs: Vec<f64> = (0..points).map(|i| start * ratio.powi(i as i32)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| prefactor * x.powf(slope)).collect();
        let fit = fit_rate(&xs, &ys).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.intercept - prefactor.ln()).abs() < 1e-7 * (1.0 + prefactor.ln().abs()));
        prop_assert!(fit.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn seeded_instances_satisfy_the_bounds(seed in any::<u64>(), index in 0u64..1_000_000) {
        let inst = random_instance(seed, index).unwrap();
        for k in 1..=inst.norms.dim {
            let r = check_perturbation_lemma(&inst.norms, &inst.a, &inst.a_tilde, k).unwrap();
            prop_assert!(r.lower_bound_ok && r.upper_bound_ok, "{r:?}");
            prop_assert!(r.eigenvector_bound_ok, "{r:?}");
        }
    }

    #[test]
    fn diagonal_operators_under_symmetric_noise(
        spacings in proptest::collection::vec(0.1f64..2.0, 2..8),
        noise in proptest::collection::vec(-1.0f64..1.0, 64),
        eta in 0.0f64..1e-2,
    ) {
        let d = spacings.len();
        let alphas: Vec<f64> = spacings.iter().scan(1.0, |acc, s| { *acc += s; Some(*acc) }).collect();
        let a = DMatrix::from_diagonal(&DVector::from_vec(alphas));
        let r = DMatrix::from_fn(d, d, |i, j| noise[i.min(j) * 8 + i.max(j)]);
        let at = &a + r * (eta / d as f64);
        for k in 1..=d {
            let rep = check_perturbation_lemma(&NormPair::euclidean(d), &a, &at, k).unwrap();
            prop_assert!(rep.passed(), "{rep:?}");
        }
    }
}

#[test]
fn battery_is_reproducible() {
    let a = perturbation_battery(99, 40).unwrap();
    let b = perturbation_battery(99, 40).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.report.alpha_tilde_k, y.report.alpha_tilde_k);
        assert_eq!(x.report.eigenvector_distance, y.report.eigenvector_distance);
    }
    assert!(a.iter().all(|r| r.report.passed()));
}

#[test]
fn finite_airy_decreases_toward_the_half_line_values() {
    let rs: Vec<f64> = (8..=30).step_by(2).map(f64::from).collect();
    for c in finite_airy_convergence(&rs, 3).unwrap() {
        assert!(c.monotone, "k={}: {:?}", c.k, c.deviation);
    }
    let f = finite_airy(30.0, 3).unwrap();
    assert!(f.deviation[0].abs() < 1e-9);
    for (k, u) in f.u_r.iter().enumerate() {
        assert_eq!(u.interior_sign_changes(), k);
    }
}
