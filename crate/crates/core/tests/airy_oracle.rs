//! Independent check of the Airy evaluator against quadrature of the
//! steepest-descent contour integral
//!
//!   Ai(z) = 1/(2πi) ∫ exp(t³/3 - z t) dt,
//!
//! taken along the rays arg t = ±π/3 where t³ = -r³, so the integrand decays
//! like exp(-r³/3) for every complex z. Bi follows from the connection
//! formula Bi(z) = e^{iπ/6} Ai(z e^{2πi/3}) + e^{-iπ/6} Ai(z e^{-2πi/3}).

use std::f64::consts::PI;

use gaplab::airy::{airy_zeros, eval_airy, half_line_eigenfunction};
use gaplab::quad::gauss_legendre;
use num_complex::Complex64;

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn complex_gl<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize) -> Complex64 {
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            total += f(mid + 0.5 * h * x) * (w * 0.5 * h);
        }
    }
    total
}

/// (Ai(z), Ai'(z)) by contour quadrature.
fn ai_oracle(z: Complex64) -> (Complex64, Complex64) {
    let omega = Complex64::from_polar(1.0, PI / 3.0);
    let omega_bar = omega.conj();
    let r_max = 6.0 + 2.0 * z.norm().sqrt();
    let panels = 600;
    let ray = |w: Complex64| {
        let val = complex_gl(|r| (-(r * r * r) / 3.0 - z * r * w).exp(), 0.0, r_max, panels);
        let der = complex_gl(
            |r| -(r * w) * (-(r * r * r) / 3.0 - z * r * w).exp(),
            0.0,
            r_max,
            panels,
        );
        (val, der)
    };
    let (vp, dp) = ray(omega);
    let (vm, dm) = ray(omega_bar);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    (
        (omega * vp - omega_bar * vm) / two_pi_i,
        (omega * dp - omega_bar * dm) / two_pi_i,
    )
}

/// (Ai, Ai', Bi, Bi') at real x.
fn oracle(x: f64) -> [f64; 4] {
    let z = Complex64::new(x, 0.0);
    let (ai, aip) = ai_oracle(z);
    let rot = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let e6 = Complex64::from_polar(1.0, PI / 6.0);
    let (a_plus, ap_plus) = ai_oracle(z * rot);
    let (a_minus, ap_minus) = ai_oracle(z * rot.conj());
    let bi = e6 * a_plus + e6.conj() * a_minus;
    let bip = e6 * rot * ap_plus + (e6 * rot).conj() * ap_minus;
    [ai.re, aip.re, bi.re, bip.re]
}

#[test]
fn ai_at_origin_matches_quadrature() {
    let [ai, _, _, _] = oracle(0.0);
    assert!((ai - 0.355_028_053_9).abs() < 1e-10);
    let v = eval_airy(0.0).unwrap();
    assert!((v.ai - ai).abs() < 1e-14);
}

#[test]
fn evaluator_agrees_with_contour_quadrature_on_a_grid() {
    let mut worst = 0.0f64;
    for i in -40..=40 {
        let x = i as f64 * 0.25;
        let o = oracle(x);
        let v = eval_airy(x).unwrap();
        let got = [v.ai, v.ai_prime, v.bi, v.bi_prime];
        for (g, e) in got.iter().zip(o.iter()) {
            // the oracle itself loses digits to cancellation for x << 0
            let tol = 1e-12 * e.abs() + 2e-13;
            worst = worst.max((g - e).abs() / (e.abs() + 1e-300));
            assert!((g - e).abs() < tol, "x = {x}: {g} vs oracle {e}");
        }
    }
    eprintln!("worst relative deviation {worst:e}");
}

#[test]
fn zeros_vanish_under_the_oracle() {
    let z = airy_zeros(5).unwrap();
    for a in &z.a {
        let [ai, _, _, _] = oracle(-a);
        assert!(ai.abs() < 1e-12, "Ai(-{a}) = {ai}");
    }
}

#[test]
fn closed_form_norms_match_direct_quadrature() {
    let z = airy_zeros(5).unwrap();
    for (i, a) in z.a.iter().enumerate() {
        let k = i + 1;
        let v = half_line_eigenfunction(k, 60.0).unwrap();
        // ∫_{-a}^{∞} Ai(t)² dt by Gauss-Legendre on [-a, 60 - a]
        let direct = gauss_legendre(
            |t| {
                let y = eval_airy(t).unwrap().ai;
                y * y
            },
            -a,
            60.0 - a,
            400,
        );
        let closed = v.norm_constant * v.norm_constant;
        assert!(
            (closed - direct).abs() < 1e-10,
            "k = {k}: closed {closed} vs direct {direct}"
        );
        assert!((closed.sqrt() - direct.sqrt()).abs() < 1e-9);
    }
}

#[test]
fn hellmann_feynman_moments() {
    let z = airy_zeros(5).unwrap();
    for k in 1..=5 {
        let v = half_line_eigenfunction(k, 45.0).unwrap();
        let m = v.first_moment();
        assert!(
            (m - 2.0 / 3.0 * z.get(k)).abs() < 1e-8,
            "k = {k}: {m} vs {}",
            2.0 / 3.0 * z.get(k)
        );
    }
}
