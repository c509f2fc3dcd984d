//! Empirical checks of the perturbation machinery behind the Airy limit.
//!
//! * the abstract eigenvalue/eigenvector perturbation bounds, on random
//!   finite-dimensional instances with two different inner products;
//! * the Airy operator on `(0, R)` against the half-line problem;
//! * log-log rate fits for the `δ^{1/3}` claims and the gap-derivative
//!   integral of the reduced problem.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::airy::{airy_zeros, half_line_eigenfunction};
use crate::error::{range_err, Error, Result};
use crate::gap_model::{eval_potential, eval_potential_derivative, rescale, solve_reduced, ReducedProblem};
use crate::quad::simpson;
use crate::sturm::{solve_spectrum_with, Eigenpair, SlProblem, SolveOptions};

/// Gaps below this make the eigenvector bound meaningless.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;
const SELF_ADJOINT_TOL: f64 = 1e-10;

/// Two inner products `⟨u, v⟩ = uᵀ G v` on `ℝ^dim`.
#[derive(Debug, Clone)]
pub struct NormPair {
    pub dim: usize,
    pub gram_base: DMatrix<f64>,
    pub gram_tilde: DMatrix<f64>,
    /// Smallest `C₀ ≥ 1` with `‖v‖_ℋ / C₀ ≤ ‖v‖_ℋ̃ ≤ C₀ ‖v‖_ℋ`.
    pub c0: f64,
}

impl NormPair {
    pub fn new(gram_base: DMatrix<f64>, gram_tilde: DMatrix<f64>) -> Result<Self> {
        let dim = gram_base.nrows();
        for (name, g) in [("gram_base", &gram_base), ("gram_tilde", &gram_tilde)] {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(Error::Shape(format!("{name} is {}x{}, expected {dim}x{dim}", g.nrows(), g.ncols())));
            }
            if (g - g.transpose()).amax() > SELF_ADJOINT_TOL * g.amax() {
                return Err(Error::Domain(format!("{name} is not symmetric")));
            }
        }
        // extreme values of ‖v‖²_ℋ̃ / ‖v‖²_ℋ
        let ratios = generalized_eigen(&gram_tilde, &gram_base)?.0;
        let c0 = ratios[dim - 1].sqrt().max(1.0 / ratios[0].sqrt()).max(1.0);
        Ok(NormPair {
            dim,
            gram_base,
            gram_tilde,
            c0,
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        NormPair {
            dim,
            gram_base: DMatrix::identity(dim, dim),
            gram_tilde: DMatrix::identity(dim, dim),
            c0: 1.0,
        }
    }

    pub fn norm_base(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.gram_base * v)).sqrt()
    }

    pub fn norm_tilde(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.gram_tilde * v)).sqrt()
    }

    /// Checks the equivalence inequality on `v` (with a rounding allowance).
    pub fn equivalence_holds(&self, v: &DVector<f64>) -> bool {
        let (a, b) = (self.norm_base(v), self.norm_tilde(v));
        let slack = 1e-12 * a.max(b);
        a / self.c0 <= b + slack && b <= self.c0 * a + slack
    }
}

/// Solves `B x = α G x` (both symmetric, `G` positive definite); returns
/// ascending eigenvalues and `G`-orthonormal eigenvectors as columns.
fn generalized_eigen(b: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = Cholesky::new(g.clone()).ok_or_else(|| Error::Domain("gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular Cholesky factor".into()))?;
    let mut m = &l_inv * b * l_inv.transpose();
    m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let w = DMatrix::from_fn(b.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, l_inv.transpose() * w))
}

/// Eigen-decomposition of an operator self-adjoint with respect to `g`.
fn self_adjoint_eigen(op: &DMatrix<f64>, g: &DMatrix<f64>, name: &str) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let b = g * op;
    let asym = (&b - b.transpose()).amax();
    if asym > SELF_ADJOINT_TOL * b.amax().max(1.0) {
        return Err(Error::Contract(format!(
            "{name} is not self-adjoint for its inner product (asymmetry {asym:e})"
        )));
    }
    let b = (&b + b.transpose()) * 0.5;
    generalized_eigen(&b, g)
}

/// Extreme-Rayleigh-quotient distortion `ε` over the span of the first `k`
/// columns of `basis` (orthonormal for `g_own`), measured in `g_other`.
fn span_distortion(basis: &DMatrix<f64>, k: usize, g_other: &DMatrix<f64>) -> f64 {
    let s = basis.columns(0, k);
    let m = s.transpose() * g_other * s;
    let m = (&m + m.transpose()) * 0.5;
    let ev = SymmetricEigen::new(m).eigenvalues;
    let (lo, hi) = ev.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    (hi - 1.0).max(1.0 / lo - 1.0).max(0.0)
}

/// The harness constant for a given norm-equivalence constant.
///
/// Read off the proof chain: the eigenvalue bounds need `C₀²` (upper) and
/// `C₀` (lower); the eigenvector bound accumulates
/// `‖w‖ ≤ (C₀³ + 1)X/Γ` for the orthogonal part plus the same amount again
/// for the parallel defect and the norm mismatch, i.e. `2(C₀³ + 1) + 1`.
/// The larger of the two is doubled as a safety factor.
pub fn harness_constant(c0: f64) -> f64 {
    2.0 * (c0 * c0).max(2.0 * (c0.powi(3) + 1.0) + 1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub k: usize,
    pub alpha_k: f64,
    pub alpha_tilde_k: f64,
    pub epsilon_k: f64,
    pub epsilon_tilde_k: f64,
    pub harness_c: f64,
    /// Left and right sides of the two-sided eigenvalue bound.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub lower_bound_ok: bool,
    pub upper_bound_ok: bool,
    pub eigenvector_distance: f64,
    pub eigenvector_bound: f64,
    pub eigenvector_bound_ok: bool,
    pub gamma_k: f64,
    /// Smallest slack over all checked inequalities (negative on failure).
    pub margin: f64,
}

impl PerturbationReport {
    pub fn passed(&self) -> bool {
        self.lower_bound_ok && self.upper_bound_ok && self.eigenvector_bound_ok
    }
}

pub fn check_perturbation_lemma(
    norms: &NormPair,
    a: &DMatrix<f64>,
    a_tilde: &DMatrix<f64>,
    k: usize,
) -> Result<PerturbationReport> {
    let d = norms.dim;
    if a.shape() != (d, d) || a_tilde.shape() != (d, d) {
        return Err(Error::Shape(format!("operators must be {d}x{d}")));
    }
    if k == 0 || k > d {
        return Err(range_err("k", k as f64, format!("[1, {d}]")));
    }
    let (alpha, u) = self_adjoint_eigen(a, &norms.gram_base, "A")?;
    let (alpha_t, u_t) = self_adjoint_eigen(a_tilde, &norms.gram_tilde, "A_tilde")?;
    if alpha[0] <= 0.0 || alpha_t[0] <= 0.0 {
        return Err(Error::Contract("both operators must have positive spectrum".into()));
    }
    let eps = span_distortion(&u, k, &norms.gram_tilde);
    let eps_t = span_distortion(&u_t, k, &norms.gram_base);
    let e = a_tilde - a;
    let sum_sq = |basis: &DMatrix<f64>| -> f64 {
        (0..k)
            .map(|i| norms.norm_base(&(&e * basis.column(i))).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let s = sum_sq(&u);
    let s_t = sum_sq(&u_t);
    let c = harness_constant(norms.c0);
    let (ak, atk) = (alpha[k - 1], alpha_t[k - 1]);
    let diff = atk - ak;
    let lower = -c * s_t - eps_t * atk;
    let upper = eps * ak + c * s;
    // rounding allowance for eigenvalues of O(1) matrices
    let fuzz = 64.0 * f64::EPSILON * ak.abs().max(atk.abs()) * d as f64;
    let lower_ok = lower <= diff + fuzz;
    let upper_ok = diff <= upper + fuzz;

    let gamma = match (k > 1, k < d) {
        (true, true) => (alpha[k] - alpha[k - 1]).min(alpha[k - 1] - alpha[k - 2]),
        (false, true) => alpha[k] - alpha[k - 1],
        (true, false) => alpha[k - 1] - alpha[k - 2],
        (false, false) => f64::INFINITY,
    };
    if gamma < DEGENERACY_THRESHOLD {
        return Err(Error::Degenerate {
            k,
            gap: gamma,
            threshold: DEGENERACY_THRESHOLD,
        });
    }
    let mut uk: DVector<f64> = u.column(k - 1).into_owned();
    let utk: DVector<f64> = u_t.column(k - 1).into_owned();
    if uk.dot(&(&norms.gram_base * &utk)) < 0.0 {
        uk = -uk;
    }
    let dist = norms.norm_base(&(&utk - &uk));
    let vec_bound = c / gamma * (eps * ak + s + eps_t * atk + s_t);
    let vec_ok = dist <= vec_bound + fuzz;
    let margin = (diff - lower).min(upper - diff).min(vec_bound - dist);
    Ok(PerturbationReport {
        k,
        alpha_k: ak,
        alpha_tilde_k: atk,
        epsilon_k: eps,
        epsilon_tilde_k: eps_t,
        harness_c: c,
        lower_bound: lower,
        upper_bound: upper,
        lower_bound_ok: lower_ok,
        upper_bound_ok: upper_ok,
        eigenvector_distance: dist,
        eigenvector_bound: vec_bound,
        eigenvector_bound_ok: vec_ok,
        gamma_k: gamma,
        margin,
    })
}

/// One random instance of the battery.
#[derive(Debug, Clone)]
pub struct PerturbationInstance {
    pub norms: NormPair,
    pub a: DMatrix<f64>,
    pub a_tilde: DMatrix<f64>,
    pub k: usize,
    pub scale: f64,
}

fn random_symmetric(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let s = (&m + m.transpose()) * 0.5;
    let norm = SymmetricEigen::new(s.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, x: &f64| a.max(x.abs()));
    s / norm.max(f64::MIN_POSITIVE)
}

/// Deterministic instance `index` of the battery seeded by `seed`.
///
/// Grams are `I + X` with `‖X‖ ≤ 0.2` (condition ≤ 1.5 ≤ 4), `A` has
/// eigenvalues `2 + Σ spacings`, spacings in `[0.2, 1.5]`, and
/// `Ã = G̃⁻¹ (sym(G̃ A) + η R)` with `‖R‖ = 1`, `η ≤ 10⁻²`.
pub fn random_instance(seed: u64, index: u64) -> Result<PerturbationInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let d = rng.gen_range(2..=12usize);
    let g = DMatrix::identity(d, d) + random_symmetric(&mut rng, d) * rng.gen_range(0.0..0.2);
    let gt = DMatrix::identity(d, d) + random_symmetric(&mut rng, d) * rng.gen_range(0.0..0.2);
    let mut level = 2.0;
    let alphas: Vec<f64> = (0..d)
        .map(|_| {
            level += rng.gen_range(0.2..1.5);
            level
        })
        .collect();
    // G-orthonormal eigenbasis U = L^{-T} Q
    let q = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
    let l_inv = Cholesky::new(g.clone())
        .ok_or_else(|| Error::Domain("gram not positive definite".into()))?
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular gram".into()))?;
    let u = l_inv.transpose() * q;
    let a = &u * DMatrix::from_diagonal(&DVector::from_vec(alphas)) * u.transpose() * &g;
    let scale = rng.gen_range(0.0..1e-2);
    let r = random_symmetric(&mut rng, d);
    let ga = &gt * &a;
    let sym = (&ga + ga.transpose()) * 0.5 + r * scale;
    let gt_inv = gt.clone().try_inverse().ok_or_else(|| Error::Domain("singular gram".into()))?;
    let a_tilde = gt_inv * sym;
    let k = rng.gen_range(1..=d);
    Ok(PerturbationInstance {
        norms: NormPair::new(g, gt)?,
        a,
        a_tilde,
        k,
        scale,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryRow {
    pub index: u64,
    pub dim: usize,
    pub k: usize,
    pub c0: f64,
    pub scale: f64,
    pub report: PerturbationReport,
}

/// Runs `count` seeded instances in parallel; rows are in index order.
pub fn perturbation_battery(seed: u64, count: usize) -> Result<Vec<BatteryRow>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_instance(seed, i)?;
            let report = check_perturbation_lemma(&inst.norms, &inst.a, &inst.a_tilde, inst.k)?;
            Ok(BatteryRow {
                index: i,
                dim: inst.norms.dim,
                k: inst.k,
                c0: inst.norms.c0,
                scale: inst.scale,
                report,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!("{} abscissae vs {} values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::Shape(format!("a rate fit needs at least 3 points, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Log-log least squares: `log y ≈ slope · log x + intercept`.
pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if let Some(bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("rate fits need positive finite data, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    least_squares(&lx, &ly)
}

/// Airy operator on `(0, R)` with Dirichlet conditions.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteAiryResult {
    pub r: f64,
    pub alpha_r: Vec<f64>,
    pub a: Vec<f64>,
    /// `α_k^R - a_k` (positive by domain monotonicity, up to resolution).
    pub deviation: Vec<f64>,
    /// Deviations below this are not resolvable in double precision.
    pub resolution: Vec<f64>,
    #[serde(skip)]
    pub u_r: Vec<Eigenpair>,
}

/// Relative eigenvalue resolution of the shooting solver on the Airy problem
/// (observed noise is below 2e-13·(1 + a_k) for R ≤ 30).
pub const FINITE_AIRY_RESOLUTION: f64 = 1e-12;

pub fn finite_airy(r: f64, count: usize) -> Result<FiniteAiryResult> {
    if !(r >= 6.0 && r.is_finite()) {
        return Err(range_err("R", r, "[6, ∞)"));
    }
    if count == 0 || count > crate::airy::MAX_ZEROS {
        return Err(range_err("K", count as f64, format!("[1, {}]", crate::airy::MAX_ZEROS)));
    }
    let sl = SlProblem::new(0.0, r, |_| 1.0, |_| 1.0, |x| x, |_| 1.0)?;
    let opts = SolveOptions {
        tol: 1e-13,
        grid_points: (64.0 * r).ceil() as usize + 1,
        ..SolveOptions::default()
    };
    let u_r = solve_spectrum_with(&sl, count, &opts)?;
    let zeros = airy_zeros(count)?;
    let alpha_r: Vec<f64> = u_r.iter().map(|e| e.lambda).collect();
    Ok(FiniteAiryResult {
        r,
        deviation: alpha_r.iter().zip(&zeros.a).map(|(x, a)| x - a).collect(),
        resolution: zeros.a.iter().map(|a| FINITE_AIRY_RESOLUTION * (1.0 + a)).collect(),
        alpha_r,
        a: zeros.a,
        u_r,
    })
}

/// Monotone approach of `α_k^R` to `a_k` over increasing `R`.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteAiryConvergence {
    pub k: usize,
    pub r: Vec<f64>,
    pub deviation: Vec<f64>,
    /// True if every step decreases `α_k^R`, strictly wherever the change
    /// exceeds the resolution and within resolution otherwise.
    pub monotone: bool,
    /// Slope of `ln max(deviation, resolution)` against `R`, fitted up to
    /// and including the first `R` at which the deviation reaches the
    /// resolution (later points are pure rounding noise).
    pub log_slope: f64,
    /// Number of leading `R` values entering the slope fit.
    pub fit_points: usize,
}

pub fn finite_airy_convergence(rs: &[f64], k_max: usize) -> Result<Vec<FiniteAiryConvergence>> {
    let results: Vec<FiniteAiryResult> = rs.par_iter().map(|&r| finite_airy(r, k_max)).collect::<Result<_>>()?;
    (0..k_max)
        .map(|i| {
            let dev: Vec<f64> = results.iter().map(|f| f.deviation[i]).collect();
            let res = results[0].resolution[i];
            let monotone = results.windows(2).all(|w| {
                let step = w[1].alpha_r[i] - w[0].alpha_r[i];
                if w[0].deviation[i] > res {
                    step < 0.0
                } else {
                    step <= res
                }
            }) && dev.iter().all(|d| *d > -res);
            let logs: Vec<f64> = dev.iter().map(|d| d.max(res).ln()).collect();
            let resolved = dev.iter().take_while(|d| **d > res).count();
            let fit_points = (resolved + 1).max(3).min(rs.len());
            let fit = least_squares(&rs[..fit_points], &logs[..fit_points])?;
            Ok(FiniteAiryConvergence {
                k: i + 1,
                r: rs.to_vec(),
                deviation: dev,
                monotone,
                log_slope: fit.slope,
                fit_points,
            })
        })
        .collect()
}

/// `δ^{-1/3} I / P'(φ₀)` and its Airy limit `-(2/3)(a₂ - a₁)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorollaryResult {
    pub mu: f64,
    pub delta: f64,
    pub integral: f64,
    pub scaled_integral: f64,
    pub target: f64,
    pub deviation: f64,
}

/// `∫ P (h_b² - h_a²) cos^{-n}` over the common grid of two eigenpairs.
pub fn gap_integral(n: u32, a: &Eigenpair, b: &Eigenpair) -> Result<f64> {
    if a.x.len() != b.x.len() {
        return Err(Error::Shape("eigenpairs on different grids".into()));
    }
    let vals: Vec<f64> = a
        .x
        .iter()
        .zip(a.y.iter().zip(&b.y))
        .map(|(&phi, (ya, yb))| {
            let p = eval_potential(phi)?;
            Ok(p * (yb * yb - ya * ya) * phi.cos().powi(-(n as i32)))
        })
        .collect::<Result<_>>()?;
    Ok(simpson(&vals, a.step()))
}

pub fn check_corollary_integral(problem: &ReducedProblem) -> Result<CorollaryResult> {
    if problem.t != 0.0 {
        return Err(Error::Contract(format!(
            "the integral is taken for the unperturbed problem, got t = {}",
            problem.t
        )));
    }
    let e = solve_reduced(problem, 2, 1e-12)?;
    let integral = gap_integral(problem.n, &e[0], &e[1])?;
    let delta = problem.delta();
    let zeros = airy_zeros(2)?;
    let scaled = integral / delta.cbrt() / eval_potential_derivative(problem.phi0)?;
    let target = -2.0 / 3.0 * (zeros.get(2) - zeros.get(1));
    Ok(CorollaryResult {
        mu: problem.effective_mu(),
        delta,
        integral,
        scaled_integral: scaled,
        target,
        deviation: scaled - target,
    })
}

/// One `(μ, k)` row of the rescaling sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RescaleRow {
    pub n: u32,
    pub phi0: f64,
    pub mu: f64,
    pub delta: f64,
    pub k: usize,
    pub lambda: f64,
    pub alpha_tilde: f64,
    pub a_k: f64,
    /// `|α̃_k - a_k|`
    pub deviation: f64,
    /// `|λ_k/(μ cos²φ₀) - 1 - 2 tan φ₀ a_k δ^{1/3}|`
    pub expansion_residual: f64,
    /// `∫ x |ũ_k² - v_k²| dx`
    pub proximity: f64,
    /// `max_{x ≥ a_k + 2} |ũ_k(x)| e^x` over the sampled window
    pub decay_bound: f64,
}

pub fn rescale_rows(problem: &ReducedProblem, count: usize) -> Result<Vec<RescaleRow>> {
    let e = solve_reduced(problem, count, 1e-12)?;
    let frame = rescale(problem, &e)?;
    let zeros = airy_zeros(count)?;
    let d3 = frame.cbrt_delta();
    let (phi0, mu) = (problem.phi0, problem.effective_mu());
    (1..=count)
        .map(|k| {
            let a_k = zeros.get(k);
            let v = half_line_eigenfunction(k, a_k + 60.0)?;
            let u = &frame.u_tilde[k - 1];
            let prox: Vec<f64> = frame
                .x
                .iter()
                .zip(u)
                .map(|(&x, &ut)| {
                    let vk = v.eval(x);
                    x * (ut * ut - vk * vk).abs()
                })
                .collect();
            let decay_bound = frame
                .x
                .iter()
                .zip(u)
                .filter(|(x, _)| **x >= a_k + 2.0)
                .map(|(x, ut)| ut.abs() * x.exp())
                .fold(0.0f64, f64::max);
            let lambda = frame.lambda[k - 1];
            Ok(RescaleRow {
                n: problem.n,
                phi0,
                mu,
                delta: frame.delta,
                k,
                lambda,
                alpha_tilde: frame.alpha_tilde[k - 1],
                a_k,
                deviation: (frame.alpha_tilde[k - 1] - a_k).abs(),
                expansion_residual: (lambda / (mu * phi0.cos().powi(2)) - 1.0 - 2.0 * phi0.tan() * a_k * d3).abs(),
                proximity: simpson(&prox, frame.step()),
                decay_bound,
            })
        })
        .collect()
}

/// Rows for every `μ` in `mus` (solved in parallel, returned in input order).
pub fn rescale_sweep(n: u32, phi0: f64, mus: &[f64], count: usize) -> Result<Vec<RescaleRow>> {
    let blocks: Vec<Vec<RescaleRow>> = mus
        .par_iter()
        .map(|&mu| rescale_rows(&ReducedProblem::base(n, phi0, mu)?, count))
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

pub fn corollary_sweep(n: u32, phi0: f64, mus: &[f64]) -> Result<Vec<CorollaryResult>> {
    mus.par_iter()
        .map(|&mu| check_corollary_integral(&ReducedProblem::base(n, phi0, mu)?))
        .collect()
}
