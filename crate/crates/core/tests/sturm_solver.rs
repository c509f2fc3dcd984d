use std::f64::consts::{FRAC_PI_4, PI};

use gaplab::airy::half_line_eigenfunction;
use gaplab::gap_model::{reduced_problem_as_sl, solve_reduced, ReducedProblem};
use gaplab::quad::Sampled;
use gaplab::sturm::{
    build_matrix_oracle, extrapolated_oracle_eigenvalue, solve_eigenpair, solve_spectrum, weighted_inner_product,
    SlProblem,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_coefficients_match_closed_form(
        c in -20.0f64..200.0,
        len in 0.5f64..4.0,
        k in 1usize..=6,
    ) {
        let prob = SlProblem::constant(c, 1.0, 1.0 + len).unwrap();
        let e = solve_eigenpair(&prob, k, 1e-12).unwrap();
        let exact = c + (k as f64 * PI / len).powi(2);
        prop_assert!((e.lambda - exact).abs() <= 1e-10 * (1.0 + exact.abs()), "{} vs {}", e.lambda, exact);
        prop_assert_eq!(e.interior_sign_changes(), k - 1);
        prop_assert!((e.norm_check - 1.0).abs() < 1e-8);
        prop_assert!(e.dy[0] > 0.0);
        prop_assert_eq!(e.y[0], 0.0);
        prop_assert_eq!(*e.y.last().unwrap(), 0.0);
    }

    #[test]
    fn variable_coefficients_agree_with_the_matrix_oracle(
        a in -0.5f64..0.5,
        b in 0.0f64..2.0,
        c in 0.0f64..30.0,
    ) {
        // smooth, positive coefficients on (0, 2)
        let prob = SlProblem::new(
            0.0,
            2.0,
            move |x: f64| 1.0 + a * (3.0 * x).sin(),
            move |x: f64| 1.0 + b * x,
            move |x: f64| c * x * x,
            move |x: f64| 1.0 + b * x,
        )
        .unwrap();
        let sp = solve_spectrum(&prob, 4, 1e-12).unwrap();
        for e in &sp {
            let oracle = extrapolated_oracle_eigenvalue(&prob, e.k, 2048, 3).unwrap();
            prop_assert!((e.lambda - oracle).abs() <= 1e-7 * e.lambda.abs().max(1.0), "k={} {} {}", e.k, e.lambda, oracle);
            prop_assert_eq!(e.interior_sign_changes(), e.k - 1);
            let rq = e.rayleigh_quotient(&prob);
            prop_assert!((rq - e.lambda).abs() <= 1e-6 * e.lambda.abs());
        }
    }
}

#[test]
fn reduced_eigenfunctions_have_k_minus_one_nodes() {
    for &(n, phi0, mu) in &[(2u32, 0.3, 1e3), (2, FRAC_PI_4, 1e5), (3, 1.0, 1e4), (4, 1.2, 1e6)] {
        let p = ReducedProblem::base(n, phi0, mu).unwrap();
        let sp = solve_reduced(&p, 8, 1e-12).unwrap();
        let sl = reduced_problem_as_sl(&p).unwrap();
        for (i, e) in sp.iter().enumerate() {
            assert_eq!(e.k, i + 1);
            assert_eq!(e.interior_sign_changes(), i, "n={n} φ₀={phi0} μ={mu} k={}", e.k);
            // y'(x_lo) > 0; far from φ₀ the samples may underflow to zero,
            // so the orientation shows up as the first nonzero sample
            assert!(e.dy[0] >= 0.0);
            assert!(*e.y.iter().find(|y| **y != 0.0).unwrap() > 0.0);
            assert!((e.norm_check - 1.0).abs() < 1e-8);
            assert!((e.rayleigh_quotient(&sl) - e.lambda).abs() <= 1e-6 * e.lambda);
        }
        assert!(sp.windows(2).all(|w| w[0].lambda < w[1].lambda));
    }
}

#[test]
fn reduced_spectrum_is_weighted_orthogonal() {
    let p = ReducedProblem::base(3, 0.9, 1e4).unwrap();
    let sp = solve_reduced(&p, 3, 1e-12).unwrap();
    let w = |phi: f64| phi.cos().powi(-3);
    for i in 0..3 {
        for j in 0..3 {
            let ip = weighted_inner_product(&sp[i].sampled(), &sp[j].sampled(), w).unwrap();
            let expect = if i == j { 1.0 } else { 0.0 };
            let tol = if i == j { 1e-8 } else { 1e-6 };
            assert!((ip - expect).abs() < tol, "{i} {j} {ip}");
        }
    }
}

#[test]
fn shooting_matches_oracle_at_quarter_pi() {
    for mu in [1e4, 1e6] {
        let p = ReducedProblem::base(2, FRAC_PI_4, mu).unwrap();
        let sl = reduced_problem_as_sl(&p).unwrap();
        for e in solve_reduced(&p, 2, 1e-12).unwrap() {
            let oracle = extrapolated_oracle_eigenvalue(&sl, e.k, 8192, 3).unwrap();
            assert!((e.lambda - oracle).abs() <= 1e-6 * e.lambda, "mu={mu}: {} {}", e.lambda, oracle);
        }
    }
}

#[test]
fn oracle_error_quarters_under_step_halving() {
    let p = ReducedProblem::base(2, 0.6, 1e3).unwrap();
    let sl = reduced_problem_as_sl(&p).unwrap();
    let exact = solve_reduced(&p, 1, 1e-13).unwrap()[0].lambda;
    let err: Vec<f64> = [512usize, 1024, 2048]
        .iter()
        .map(|&n| build_matrix_oracle(&sl, n).unwrap().eigenvalue(1) - exact)
        .collect();
    for w in err.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }
}

#[test]
fn airy_eigenfunction_has_unit_norm_as_sampled_function() {
    let v = half_line_eigenfunction(1, 40.0).unwrap();
    let f = Sampled::new(v.x.clone(), v.v.clone()).unwrap();
    let ip = weighted_inner_product(&f, &f, |_| 1.0).unwrap();
    assert!((ip - 1.0).abs() < 1e-8, "{ip}");
}

#[test]
fn oracle_rejects_coarse_grids() {
    let prob = SlProblem::constant(0.0, 0.0, 1.0).unwrap();
    assert!(build_matrix_oracle(&prob, 32).is_err());
    let o = build_matrix_oracle(&prob, 4096).unwrap();
    assert!((o.eigenvalue(1) - PI * PI).abs() < 1e-5);
    assert!(o.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}
