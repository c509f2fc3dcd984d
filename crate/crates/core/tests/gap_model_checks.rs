use std::f64::consts::{FRAC_PI_4, PI};

use gaplab::airy::{airy_zeros, half_line_eigenfunction};
use gaplab::asymptotics::{fit_rate, rescale_sweep};
use gaplab::gap_model::{
    apply_rescaled_operator, eval_potential, eval_potential_derivative, rescale, solve_reduced, ReducedProblem,
};
use gaplab::quad::{gauss_legendre, simpson, Sampled};
use nalgebra::{DMatrix, SymmetricEigen};

const MUS: [f64; 4] = [1e4, 1e5, 1e6, 1e7];

#[test]
fn potential_is_the_hypercycle_distance() {
    for phi in [1e-3, 0.3, FRAC_PI_4, 1.0, 1.4, 1.55] {
        let arc = gauss_legendre(|t: f64| 1.0 / t.cos(), 0.0, phi, 4096);
        let p = eval_potential(phi).unwrap();
        assert!((p - arc).abs() < 1e-10 * (1.0 + arc), "{phi}: {p} {arc}");
    }
    assert!((eval_potential(FRAC_PI_4).unwrap() - 0.881_373_587_0).abs() < 1e-10);
    // strictly increasing with P' > 0
    let ps: Vec<f64> = (0..100).map(|i| eval_potential(i as f64 * 0.0157).unwrap()).collect();
    assert!(ps.windows(2).all(|w| w[1] > w[0]));
    assert!((0..100).all(|i| eval_potential_derivative(i as f64 * 0.0157).unwrap() > 0.0));
}

/// Lowest eigenvalues of `-Δ + tP` on `Ω_{φ₀,μ}` from a five-point
/// discretisation in `(s, φ) = (ln r, φ)`, where the operator reads
/// `-(u_ss + u_φφ) + tP(φ)cos^{-2}φ u = λ cos^{-2}φ u`.
fn pde_eigenvalues(phi0: f64, mu: f64, t: f64, ns: usize, nphi: usize, count: usize) -> Vec<f64> {
    let ls = PI / mu.sqrt();
    let (hs, hp) = (ls / (ns + 1) as f64, phi0 / (nphi + 1) as f64);
    let dim = ns * nphi;
    let idx = |i: usize, j: usize| i * nphi + j;
    let phi = |j: usize| (j + 1) as f64 * hp;
    // symmetrised with the diagonal mass cos^{-2}φ
    let root_w = |j: usize| 1.0 / phi(j).cos();
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..ns {
        for j in 0..nphi {
            let r = idx(i, j);
            let wj = root_w(j);
            a[(r, r)] = (2.0 / (hs * hs) + 2.0 / (hp * hp)) / (wj * wj) + t * phi(j).sin().atanh();
            if i + 1 < ns {
                let c = idx(i + 1, j);
                a[(r, c)] = -1.0 / (hs * hs) / (wj * wj);
                a[(c, r)] = a[(r, c)];
            }
            if j + 1 < nphi {
                let c = idx(i, j + 1);
                a[(r, c)] = -1.0 / (hp * hp) / (wj * root_w(j + 1));
                a[(c, r)] = a[(r, c)];
            }
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(count);
    ev
}

#[test]
fn separated_equation_with_potential_matches_the_pde() {
    let (phi0, mu, t) = (0.8, 4.0, 1.5);
    // the PDE spectrum is the union over radial modes j of the reduced spectra
    let mut odes: Vec<f64> = (1..=3u32)
        .flat_map(|j| {
            let p = ReducedProblem::new(2, phi0, mu, t, j).unwrap();
            solve_reduced(&p, 3, 1e-12).unwrap().into_iter().map(|e| e.lambda)
        })
        .collect();
    odes.sort_by(f64::total_cmp);
    let coarse = pde_eigenvalues(phi0, mu, t, 11, 31, 3);
    let fine = pde_eigenvalues(phi0, mu, t, 23, 63, 3);
    for k in 0..3 {
        let (e1, e2) = (coarse[k] - odes[k], fine[k] - odes[k]);
        let rich = fine[k] + (fine[k] - coarse[k]) / 3.0;
        assert!(e2.abs() < e1.abs() / 3.0, "k={k}: {e1} {e2}");
        assert!((rich - odes[k]).abs() < 2e-4 * odes[k], "k={k}: {rich} {}", odes[k]);
    }
}

#[test]
fn pde_oracle_sees_the_potential_shift() {
    // without the potential term the same comparison must fail, so the check
    // above is sensitive to how tP enters
    let (phi0, mu) = (0.8, 4.0);
    let base = solve_reduced(&ReducedProblem::new(2, phi0, mu, 0.0, 1).unwrap(), 1, 1e-12).unwrap()[0].lambda;
    let with_p = pde_eigenvalues(phi0, mu, 1.5, 23, 63, 1)[0];
    assert!(with_p - base > 0.1);
}

#[test]
fn rescaled_eigenfunctions_decay_uniformly() {
    let rows = rescale_sweep(2, FRAC_PI_4, &MUS, 2).unwrap();
    for k in 1..=2usize {
        let bounds: Vec<f64> = rows.iter().filter(|r| r.k == k).map(|r| r.decay_bound).collect();
        let v = half_line_eigenfunction(k, 60.0).unwrap();
        let limit = v
            .x
            .iter()
            .zip(&v.v)
            .filter(|(x, _)| **x >= v.eigenvalue + 2.0)
            .map(|(x, y)| y.abs() * x.exp())
            .fold(0.0f64, f64::max);
        // bounded over the sweep: finite, shrinking with μ, and settling on
        // the value of the half-line eigenfunction itself
        assert!(bounds.iter().all(|b| b.is_finite() && *b > 0.0));
        assert!(bounds.windows(2).all(|w| w[1] <= w[0]), "k={k}: {bounds:?}");
        let last = bounds[bounds.len() - 1];
        assert!((last / limit - 1.0).abs() < 0.1, "k={k}: {last} vs {limit}");
    }
}

#[test]
fn rescaled_operator_approaches_airy_at_cube_root_rate() {
    let a1 = airy_zeros(1).unwrap().get(1);
    let v = half_line_eigenfunction(1, 60.0).unwrap();
    for n in [2u32, 3] {
        let mut deltas = Vec::new();
        let mut norms = Vec::new();
        for mu in MUS {
            let p = ReducedProblem::base(n, FRAC_PI_4, mu).unwrap();
            let frame = rescale(&p, &solve_reduced(&p, 1, 1e-10).unwrap()).unwrap();
            let f = Sampled::new(frame.x.clone(), frame.x.iter().map(|&x| v.eval(x)).collect()).unwrap();
            let af = apply_rescaled_operator(&frame, &f).unwrap();
            let diff: Vec<f64> = af.y.iter().zip(&f.y).map(|(a, y)| (a - a1 * y).powi(2)).collect();
            deltas.push(frame.delta);
            norms.push(simpson(&diff, frame.step()).sqrt());
        }
        let fit = fit_rate(&deltas, &norms).unwrap();
        assert!((fit.slope - 1.0 / 3.0).abs() <= 0.1, "n={n}: slope {} ({norms:?})", fit.slope);
    }
}
