//! Acceptance suite: one PASS/FAIL line per criterion, checked at the stated
//! tolerances and runtime budgets. Exits non-zero if any criterion fails.

use std::f64::consts::FRAC_PI_4;
use std::time::{Duration, Instant};

use gaplab::airy::{eval_airy, half_line_eigenfunction, model_integral, norm_constant_closed_form};
use gaplab::asymptotics::{
    corollary_sweep, finite_airy, finite_airy_convergence, fit_rate, perturbation_battery, rescale_sweep, RescaleRow,
};
use gaplab::gap_model::{reduced_problem_as_sl, solve_reduced, ReducedProblem};
use gaplab::sturm::{build_matrix_oracle, extrapolated_oracle_eigenvalue};
use gaplab::theorem::{check_mode_ordering, higher_gap_check, run_theorem, TheoremConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MUS: [f64; 4] = [1e4, 1e5, 1e6, 1e7];
const SLOPE_WINDOW: f64 = 0.1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn in_window(slope: f64, centre: f64) -> bool {
    (slope - centre).abs() <= SLOPE_WINDOW
}

// Maclaurin series for Ai; accurate to ~1e-13 on [-8, 0], which covers a_1..a_5.
fn ai_series(x: f64) -> f64 {
    const C1: f64 = 0.355_028_053_887_817_24;
    const C2: f64 = 0.258_819_403_792_806_8;
    let x3 = x * x * x;
    let (mut f, mut g) = (0.0, 0.0);
    let (mut tf, mut tg) = (1.0, x);
    for k in 0..200 {
        f += tf;
        g += tg;
        let k = k as f64;
        tf *= x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
        if tf.abs() + tg.abs() < 1e-18 * (f.abs() + g.abs()) {
            break;
        }
    }
    C1 * f - C2 * g
}

/// Magnitudes `a_1 < a_2 < …` of the first zeros of Ai by scan and bisection.
fn oracle_zeros(count: usize) -> Vec<f64> {
    let mut zeros = Vec::new();
    let step = 0.05;
    let mut x = 0.0;
    while zeros.len() < count {
        let (hi, lo) = (x, x - step);
        if ai_series(hi) * ai_series(lo) < 0.0 {
            let (mut a, mut b) = (lo, hi);
            let fa = ai_series(a);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if ai_series(m) * fa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            zeros.push(-0.5 * (a + b));
        }
        x = lo;
    }
    zeros
}

/// Composite 5-point Gauss–Legendre quadrature.
fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            X.iter().zip(&W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

fn model_integral_criterion() -> Outcome {
    let a = oracle_zeros(2);
    let target = 2.0 / 3.0 * (a[1] - a[0]);
    let got = model_integral(40.0).unwrap();
    let err = (got - target).abs();
    outcome(err < 1e-8, format!("I = {got:.12}, (2/3)(a2 - a1) = {target:.12}, |diff| = {err:.2e}"))
}

fn airy_self_consistency() -> Outcome {
    let a = oracle_zeros(5);
    let mut worst_moment: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for k in 1..=5 {
        let v = half_line_eigenfunction(k, 40.0).unwrap();
        worst_moment = worst_moment.max((v.first_moment() - 2.0 / 3.0 * a[k - 1]).abs());
        let ak = v.eigenvalue;
        let quad = gauss5(|x| eval_airy(x - ak).unwrap().ai.powi(2), 0.0, 40.0, 4000).sqrt();
        worst_norm = worst_norm.max((norm_constant_closed_form(ak) - quad).abs() / quad);
    }
    outcome(
        worst_moment < 1e-8 && worst_norm < 1e-9,
        format!("max |moment - (2/3)a_k| = {worst_moment:.2e}, max rel. norm error = {worst_norm:.2e}"),
    )
}

struct Slopes {
    n: u32,
    k: usize,
    expansion: f64,
    deviation: f64,
    proximity: f64,
}

fn sweep_slopes() -> Vec<Slopes> {
    let mut out = Vec::new();
    for n in [2u32, 3, 4] {
        let rows = rescale_sweep(n, FRAC_PI_4, &MUS, 2).unwrap();
        for k in 1..=2 {
            let sel: Vec<&RescaleRow> = rows.iter().filter(|r| r.k == k).collect();
            let d: Vec<f64> = sel.iter().map(|r| r.delta).collect();
            let slope = |f: fn(&RescaleRow) -> f64| fit_rate(&d, &sel.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap().slope;
            out.push(Slopes {
                n,
                k,
                expansion: slope(|r| r.expansion_residual),
                deviation: slope(|r| r.deviation),
                proximity: slope(|r| r.proximity),
            });
        }
    }
    out
}

fn eigenvalue_expansion(slopes: &[Slopes]) -> Outcome {
    let ok = slopes.iter().all(|s| in_window(s.expansion, 2.0 / 3.0));
    let detail = slopes
        .iter()
        .map(|s| format!("n{}k{}={:.3}", s.n, s.k, s.expansion))
        .collect::<Vec<_>>()
        .join(" ");
    outcome(ok, format!("expansion slopes (target 2/3): {detail}"))
}

fn rescaled_rates(slopes: &[Slopes]) -> Outcome {
    let ok = slopes
        .iter()
        .all(|s| in_window(s.deviation, 1.0 / 3.0) && in_window(s.proximity, 1.0 / 3.0));
    let detail = slopes
        .iter()
        .map(|s| format!("n{}k{}=({:.3},{:.3})", s.n, s.k, s.deviation, s.proximity))
        .collect::<Vec<_>>()
        .join(" ");
    outcome(ok, format!("(eigenvalue, eigenfunction) slopes (target 1/3): {detail}"))
}

fn corollary() -> Outcome {
    let res = corollary_sweep(2, FRAC_PI_4, &MUS).unwrap();
    let d: Vec<f64> = res.iter().map(|r| r.delta).collect();
    let dev: Vec<f64> = res.iter().map(|r| r.deviation.abs()).collect();
    let slope = fit_rate(&d, &dev).unwrap().slope;
    let converging = dev.windows(2).all(|w| w[1] < w[0]);
    let mut negative = true;
    let mut ordered = 0;
    for r in &res {
        if check_mode_ordering(FRAC_PI_4, r.mu, 2, 2).unwrap().holds {
            ordered += 1;
            negative &= r.integral < 0.0;
        }
    }
    let last = res.last().unwrap();
    outcome(
        converging && in_window(slope, 1.0 / 3.0) && negative && ordered > 0,
        format!(
            "scaled I at mu=1e7: {:.6} vs {:.6}, deviation slope {slope:.3}, I < 0 on {ordered}/{} ordered rungs",
            last.scaled_integral,
            last.target,
            res.len()
        ),
    )
}

fn headline() -> Outcome {
    let config = TheoremConfig::default();
    let r = run_theorem(1.0, 2, &config).unwrap();
    let diam = r.diameter.unwrap_or(f64::NAN);
    let ordering = r.gap.mode_ordering.holds;
    let decrease = r.gap.gamma_t < r.gap.gamma0;
    let t_ok = (r.gap.t - config.t_factor * r.gap.gamma0).abs() <= 1e-12 * r.gap.t;
    let (lo, hi) = config.hf_slope_window;
    let bounded = r.hf.slope >= lo && r.hf.slope <= hi;
    outcome(
        r.verdict && (diam - 1.0).abs() < 1e-6 && ordering && decrease && t_ok && bounded,
        format!(
            "mu = {:e}, |diam - 1| = {:.1e}, Gamma(t) - Gamma(0) = {:.3e}, HF residual slope {:.4}",
            r.mu,
            (diam - 1.0).abs(),
            r.gap.gamma_t - r.gap.gamma0,
            r.hf.slope
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    const N: usize = 8192;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut raw_misses = 0;
    let mut worst: f64 = 0.0;
    let mut ratio_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut failures = Vec::new();
    for i in 0..20 {
        let phi0 = rng.gen_range(0.3..1.2);
        let mu = 10f64.powf(rng.gen_range(3.0..6.0));
        let n = [2u32, 3, 4][rng.gen_range(0..3)];
        let t = rng.gen_range(0.0..1e-3) * mu;
        let p = ReducedProblem::new(n, phi0, mu, t, 1).unwrap();
        let sl = reduced_problem_as_sl(&p).unwrap();
        let pairs = solve_reduced(&p, 5, 1e-12).unwrap();
        let raw = build_matrix_oracle(&sl, N).unwrap();
        for e in &pairs {
            let tol = (1e-6 * e.lambda.abs()).max(1e-4);
            if (raw.eigenvalue(e.k) - e.lambda).abs() > tol {
                raw_misses += 1;
            }
            let ext = extrapolated_oracle_eigenvalue(&sl, e.k, N, 3).unwrap();
            let err = (ext - e.lambda).abs();
            worst = worst.max(err / tol);
            if err > tol {
                failures.push(format!("#{i} k={}", e.k));
            }
        }
        let errs: Vec<f64> = [N / 4, N / 2, N]
            .iter()
            .map(|&m| build_matrix_oracle(&sl, m).unwrap().eigenvalue(1) - pairs[0].lambda)
            .collect();
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            ratio_range = (ratio_range.0.min(r), ratio_range.1.max(r));
        }
    }
    let ratios_ok = ratio_range.0 >= 3.5 && ratio_range.1 <= 4.5;
    outcome(
        failures.is_empty() && ratios_ok,
        format!(
            "100 eigenvalues, worst extrapolated error/tol = {worst:.3}, raw N={N} outside tol: {raw_misses}, \
             Richardson ratios in [{:.3}, {:.3}]{}",
            ratio_range.0,
            ratio_range.1,
            if failures.is_empty() { String::new() } else { format!(", failed: {}", failures.join(" ")) }
        ),
    )
}

fn perturbation_lemma() -> Outcome {
    let rows = perturbation_battery(1, 500).unwrap();
    let passed = rows.iter().filter(|r| r.report.passed()).count();
    let min_margin = rows.iter().map(|r| r.report.margin).fold(f64::INFINITY, f64::min);
    outcome(passed == 500, format!("{passed}/500 instances satisfy the bounds, min margin {min_margin:.3e}"))
}

fn finite_interval() -> Outcome {
    let rs: Vec<f64> = (8..=14).map(f64::from).collect();
    let conv = finite_airy_convergence(&rs, 3).unwrap();
    let ok = conv.iter().all(|c| c.monotone && c.log_slope <= -1.0 && c.deviation.iter().all(|d| *d > -1e-12));
    let at30 = finite_airy(30.0, 1).unwrap().deviation[0].abs();
    let slopes = conv.iter().map(|c| format!("{:.3}", c.log_slope)).collect::<Vec<_>>().join(", ");
    outcome(ok && at30 < 1e-9, format!("log-error slopes in R: [{slopes}], |alpha_1^30 - a_1| = {at30:.1e}"))
}

fn higher_gap() -> Outcome {
    let r = run_theorem(1.0, 2, &TheoremConfig::default()).unwrap();
    let h = higher_gap_check(r.phi0, r.mu, 2, r.gap.t).unwrap();
    let ok = if h.ordering.holds { h.decreases } else { true };
    outcome(
        ok && h.holds,
        format!(
            "K = 3 ordering {}, lambda3 - lambda2: {:.6} -> {:.6}",
            if h.ordering.holds { "holds" } else { "fails (vacuous)" },
            h.gap0,
            h.gap_t
        ),
    )
}

fn main() {
    let mut all = true;
    let mut report = |id: u32, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let ok = o.passed && elapsed < budget;
        all &= ok;
        println!(
            "{} criterion {id:>2} {name}: {} [{:.2?} / {:?}]",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed,
            budget
        );
    };
    report(1, "model integral", Duration::from_secs(1), &mut model_integral_criterion);
    report(2, "Airy self-consistency", Duration::from_secs(5), &mut airy_self_consistency);
    let mut slopes = Vec::new();
    report(3, "eigenvalue expansion", Duration::from_secs(120), &mut || {
        slopes = sweep_slopes();
        eigenvalue_expansion(&slopes)
    });
    report(4, "rescaled rates", Duration::from_secs(120), &mut || rescaled_rates(&slopes));
    report(5, "gap-derivative integral", Duration::from_secs(120), &mut corollary);
    report(6, "headline theorem", Duration::from_secs(300), &mut headline);
    report(7, "solver oracle equivalence", Duration::from_secs(300), &mut oracle_equivalence);
    report(8, "perturbation battery", Duration::from_secs(30), &mut perturbation_lemma);
    report(9, "finite-interval Airy", Duration::from_secs(30), &mut finite_interval);
    report(10, "higher gap", Duration::from_secs(60), &mut higher_gap);
    if !all {
        std::process::exit(1);
    }
}
