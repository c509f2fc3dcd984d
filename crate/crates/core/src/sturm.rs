//! Regular Sturm-Liouville Dirichlet eigenproblems
//!
//!   -(p y')' + q0 y = λ w y  on (x_lo, x_hi),  y(x_lo) = y(x_hi) = 0,
//!
//! solved by shooting in the scaled Prüfer variables
//!
//!   √S y = r sin θ,   p y' / √S = r cos θ,
//!
//! so that θ(x_hi; λ) counts nodes and increases strictly with λ: the k-th
//! eigenvalue is the unique λ with θ(x_hi; λ) = kπ. Integrating (θ, ln r)
//! instead of (y, p y') keeps exponentially growing solutions representable.
//!
//! A tridiagonal finite-difference discretisation ([`MatrixOracle`]) provides
//! an independent check.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::airy::count_sign_changes;
use crate::error::{range_err, Error, Result};
use crate::ode::{Dopri5, Tolerances};
use crate::quad::{simpson, uniform_grid, Sampled};
use crate::roots::brent;

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Maps an eigenvalue index to a `(guess, half_width)` starting bracket.
pub type LambdaHint = Arc<dyn Fn(usize) -> (f64, f64) + Send + Sync>;

pub const DEFAULT_GRID_POINTS: usize = 4097;
pub const MIN_ORACLE_GRID: usize = 64;
/// Eigenvalues eagerly computed by [`build_matrix_oracle`].
pub const ORACLE_EIGENVALUES: usize = 8;

const COEFF_SAMPLES: usize = 513;
const MAX_WIDENINGS: usize = 120;

#[derive(Clone)]
pub struct SlProblem {
    pub x_lo: f64,
    pub x_hi: f64,
    pub p: Coefficient,
    pub w: Coefficient,
    pub q0: Coefficient,
    pub normalization_weight: Coefficient,
    pub lambda_hint: Option<LambdaHint>,
}

impl fmt::Debug for SlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlProblem")
            .field("x_lo", &self.x_lo)
            .field("x_hi", &self.x_hi)
            .field("has_hint", &self.lambda_hint.is_some())
            .finish_non_exhaustive()
    }
}

fn coef<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Coefficient {
    Arc::new(f)
}

impl SlProblem {
    /// Builds a problem and checks positivity/finiteness of the coefficients
    /// on a sample of the closed interval.
    pub fn new<P, W, Q, N>(x_lo: f64, x_hi: f64, p: P, w: W, q0: Q, normalization_weight: N) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        W: Fn(f64) -> f64 + Send + Sync + 'static,
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
        N: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let prob = SlProblem {
            x_lo,
            x_hi,
            p: coef(p),
            w: coef(w),
            q0: coef(q0),
            normalization_weight: coef(normalization_weight),
            lambda_hint: None,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// `-y'' + c y = λ y` on `(a, b)`; eigenvalues `c + (kπ/(b-a))²`.
    pub fn constant(c: f64, a: f64, b: f64) -> Result<Self> {
        SlProblem::new(a, b, |_| 1.0, |_| 1.0, move |_| c, |_| 1.0)
    }

    pub fn with_hint(mut self, hint: LambdaHint) -> Self {
        self.lambda_hint = Some(hint);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_lo.is_finite() && self.x_hi.is_finite() && self.x_lo < self.x_hi) {
            return Err(Error::Domain(format!(
                "interval ({}, {}) must be finite with x_lo < x_hi",
                self.x_lo, self.x_hi
            )));
        }
        for x in uniform_grid(self.x_lo, self.x_hi, COEFF_SAMPLES) {
            let (p, w, q, nw) = (
                (self.p)(x),
                (self.w)(x),
                (self.q0)(x),
                (self.normalization_weight)(x),
            );
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Domain(format!("p({x}) = {p} must be positive")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Domain(format!("w({x}) = {w} must be positive")));
            }
            if !q.is_finite() {
                return Err(Error::Domain(format!("q0({x}) = {q} is not finite")));
            }
            if !(nw.is_finite() && nw > 0.0) {
                return Err(Error::Domain(format!(
                    "normalization weight({x}) = {nw} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// Rigorous-up-to-sampling lower bound for the spectrum, `min q0/w`.
    fn spectral_floor(&self) -> f64 {
        let m = uniform_grid(self.x_lo, self.x_hi, COEFF_SAMPLES)
            .into_iter()
            .map(|x| (self.q0)(x) / (self.w)(x))
            .fold(f64::INFINITY, f64::min);
        m - 1e-3 * (1.0 + m.abs())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative eigenvalue tolerance: `|Δλ| ≤ tol·(1 + |λ|)`.
    pub tol: f64,
    /// Points of the uniform output grid (endpoints included).
    pub grid_points: usize,
    pub ode: Tolerances,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            grid_points: DEFAULT_GRID_POINTS,
            ode: Tolerances::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(1e-13..=1e-4).contains(&self.tol) {
            return Err(range_err("tol", self.tol, "[1e-13, 1e-4]"));
        }
        if self.grid_points < 5 {
            return Err(range_err("grid_points", self.grid_points as f64, "[5, ∞)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenpair {
    pub k: usize,
    pub lambda: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    /// `∫ normalization_weight · y²` after normalisation.
    pub norm_check: f64,
}

impl Eigenpair {
    pub fn step(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn interior_sign_changes(&self) -> usize {
        count_sign_changes(&self.y)
    }

    pub fn sampled(&self) -> Sampled {
        Sampled {
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }

    /// Discrete `(∫ p y'² + q0 y²) / ∫ w y²`.
    pub fn rayleigh_quotient(&self, problem: &SlProblem) -> f64 {
        let mut num = Vec::with_capacity(self.x.len());
        let mut den = Vec::with_capacity(self.x.len());
        for ((&x, &y), &dy) in self.x.iter().zip(&self.y).zip(&self.dy) {
            num.push((problem.p)(x) * dy * dy + (problem.q0)(x) * y * y);
            den.push((problem.w)(x) * y * y);
        }
        let h = self.step();
        simpson(&num, h) / simpson(&den, h)
    }
}

struct Shooter<'a> {
    prob: &'a SlProblem,
    scale: f64,
    ode: Tolerances,
}

impl<'a> Shooter<'a> {
    fn new(prob: &'a SlProblem, lambda_ref: f64, ode: Tolerances) -> Self {
        let peak = uniform_grid(prob.x_lo, prob.x_hi, 257)
            .into_iter()
            .map(|x| (lambda_ref * (prob.w)(x) - (prob.q0)(x)) * (prob.p)(x))
            .fold(1.0f64, f64::max);
        Shooter {
            prob,
            scale: peak.sqrt(),
            ode,
        }
    }

    fn rhs(&self, lambda: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        let s = self.scale;
        move |x, st| {
            let p = (self.prob.p)(x);
            let q = lambda * (self.prob.w)(x) - (self.prob.q0)(x);
            let (sn, cs) = st[0].sin_cos();
            let a = s / p;
            let b = q / s;
            [a * cs * cs + b * sn * sn, (a - b) * sn * cs]
        }
    }

    fn solver(&self, lambda: f64) -> Dopri5 {
        let span = self.prob.x_hi - self.prob.x_lo;
        let mut d = Dopri5::new(self.ode, 1e-3 * span);
        d.tag = lambda;
        d
    }

    /// Prüfer angle at `x_hi`.
    fn theta_end(&self, lambda: f64) -> Result<f64> {
        let f = self.rhs(lambda);
        let mut st = [0.0, 0.0];
        self.solver(lambda)
            .integrate(&f, self.prob.x_lo, &mut st, self.prob.x_hi)?;
        Ok(st[0])
    }

    /// `(θ, ln r)` at the grid points `xs[..=stop]`, integrating forward
    /// from `θ(x_lo) = 0`.
    fn forward(&self, lambda: f64, xs: &[f64], stop: usize) -> Result<Vec<[f64; 2]>> {
        let f = self.rhs(lambda);
        let mut solver = self.solver(lambda);
        let mut st = [0.0, 0.0];
        let mut out = Vec::with_capacity(stop + 1);
        out.push(st);
        for w in xs[..=stop].windows(2) {
            solver.integrate(&f, w[0], &mut st, w[1])?;
            out.push(st);
        }
        Ok(out)
    }

    /// `(θ, ln r)` at `xs[stop..]`, integrating backward from `θ(x_hi) = 0`.
    fn backward(&self, lambda: f64, xs: &[f64], stop: usize) -> Result<Vec<[f64; 2]>> {
        let f = self.rhs(lambda);
        let (a, b) = (self.prob.x_lo, self.prob.x_hi);
        // reflected variable s = a + b - x runs forward
        let g = |s: f64, st: &[f64; 2]| {
            let d = f(a + b - s, st);
            [-d[0], -d[1]]
        };
        let mut solver = self.solver(lambda);
        let mut st = [0.0, 0.0];
        let n = xs.len();
        let mut out = vec![[0.0; 2]; n - stop];
        out[n - 1 - stop] = st;
        for i in (stop..n - 1).rev() {
            solver.integrate(&g, a + b - xs[i + 1], &mut st, a + b - xs[i])?;
            out[i - stop] = st;
        }
        Ok(out)
    }
}

/// Number of eigenvalues strictly below `lambda`.
pub fn count_eigenvalues_below(problem: &SlProblem, lambda: f64) -> Result<usize> {
    let sh = Shooter::new(problem, lambda, Tolerances::default());
    let theta = sh.theta_end(lambda)?;
    Ok(((theta / PI).ceil() as i64 - 1).max(0) as usize)
}

/// Finds `lo < hi` with `θ(lo) < kπ < θ(hi)`.
fn bracket(problem: &SlProblem, k: usize, ode: Tolerances) -> Result<(f64, f64, f64)> {
    let floor = problem.spectral_floor();
    let (guess, spread) = match &problem.lambda_hint {
        Some(h) => {
            let (g, d) = h(k);
            (g.max(floor), d.abs().max(1e-8 * (1.0 + g.abs())))
        }
        None => (floor, 1.0f64.max(1e-3 * floor.abs())),
    };
    let target = k as f64 * PI;
    let sh = Shooter::new(problem, guess + spread, ode);
    let count = |theta: f64| ((theta / PI).ceil() as i64 - 1).max(0) as usize;

    let mut d = spread;
    let mut hi = guess + d;
    let mut lo = if problem.lambda_hint.is_some() {
        (guess - d).max(floor)
    } else {
        floor
    };
    let mut t_hi = sh.theta_end(hi)?;
    let mut n = 0;
    while t_hi <= target {
        n += 1;
        if n > MAX_WIDENINGS || !hi.is_finite() {
            return Err(Error::SearchRange {
                k,
                lo,
                hi,
                count_lo: count(sh.theta_end(lo)?),
                count_hi: count(t_hi),
            });
        }
        lo = hi;
        d *= 2.0;
        hi = guess + d;
        t_hi = sh.theta_end(hi)?;
    }
    let mut t_lo = sh.theta_end(lo)?;
    let mut d_lo = spread;
    n = 0;
    while t_lo >= target {
        n += 1;
        if lo <= floor || n > MAX_WIDENINGS {
            return Err(Error::SearchRange {
                k,
                lo,
                hi,
                count_lo: count(t_lo),
                count_hi: count(t_hi),
            });
        }
        hi = lo;
        d_lo *= 2.0;
        lo = (guess - d_lo).max(floor);
        t_lo = sh.theta_end(lo)?;
    }
    Ok((lo, hi, sh.scale))
}

pub fn solve_eigenpair(problem: &SlProblem, k: usize, tol: f64) -> Result<Eigenpair> {
    solve_eigenpair_with(problem, k, &SolveOptions::with_tol(tol))
}

pub fn solve_eigenpair_with(problem: &SlProblem, k: usize, opts: &SolveOptions) -> Result<Eigenpair> {
    opts.check()?;
    if k == 0 {
        return Err(range_err("k", 0.0, "[1, ∞)"));
    }
    let (lo, hi, _) = bracket(problem, k, opts.ode)?;
    // fix the Prüfer scale for the whole refinement so θ(λ) is one smooth map
    let sh = Shooter::new(problem, hi, opts.ode);
    let target = k as f64 * PI;
    let mid = 0.5 * (lo + hi);
    let lambda = brent(
        |l| Ok(sh.theta_end(l)? - target),
        lo,
        hi,
        opts.tol * (1.0 + mid.abs()),
    )?;
    eigenfunction(problem, &sh, k, lambda, opts.grid_points)
}

/// Index in the middle of the widest classically allowed run
/// (`λ w - q0 > 0`), where both shooting directions are stable.
fn matching_index(problem: &SlProblem, lambda: f64, xs: &[f64]) -> usize {
    let n = xs.len();
    let (mut best, mut best_len) = (n / 2, 0usize);
    let mut start = None;
    for (i, &x) in xs.iter().enumerate() {
        let allowed = lambda * (problem.w)(x) - (problem.q0)(x) > 0.0;
        match (allowed, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s > best_len {
                    best_len = i - s;
                    best = (s + i - 1) / 2;
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if n - s > best_len {
            best = (s + n - 1) / 2;
        }
    }
    best.clamp(1, n - 2)
}

fn eigenfunction(problem: &SlProblem, sh: &Shooter, k: usize, lambda: f64, n: usize) -> Result<Eigenpair> {
    let xs = uniform_grid(problem.x_lo, problem.x_hi, n);
    let m = matching_index(problem, lambda, &xs);
    let fwd = sh.forward(lambda, &xs, m)?;
    let bwd = sh.backward(lambda, &xs, m)?;
    // scale both pieces to unit Prüfer radius at x_m; align the signs
    let (tf, rf) = (fwd[m][0], fwd[m][1]);
    let (tb, rb) = (bwd[0][0], bwd[0][1]);
    let sign = if (tf - tb).cos() >= 0.0 { 1.0 } else { -1.0 };
    let root_s = sh.scale.sqrt();
    let mut y = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for (i, x) in xs.iter().enumerate() {
        let (st, rho0, sg) = if i <= m {
            (fwd[i], rf, 1.0)
        } else {
            (bwd[i - m], rb, sign)
        };
        let amp = sg * (st[1] - rho0).min(700.0).exp();
        let (sn, cs) = st[0].sin_cos();
        y.push(amp * sn / root_s);
        dy.push(amp * cs * root_s / (problem.p)(*x));
    }
    y[0] = 0.0;
    y[n - 1] = 0.0;
    let h = xs[1] - xs[0];
    let mass: Vec<f64> = xs
        .iter()
        .zip(&y)
        .map(|(x, v)| (problem.normalization_weight)(*x) * v * v)
        .collect();
    let c = simpson(&mass, h).sqrt();
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Stiffness {
            x: problem.x_hi,
            lambda,
            step: h,
            steps: 0,
        });
    }
    for v in y.iter_mut().chain(dy.iter_mut()) {
        *v /= c;
    }
    let mass: Vec<f64> = xs
        .iter()
        .zip(&y)
        .map(|(x, v)| (problem.normalization_weight)(*x) * v * v)
        .collect();
    let norm_check = simpson(&mass, h);
    Ok(Eigenpair {
        k,
        lambda,
        x: xs,
        y,
        dy,
        norm_check,
    })
}

pub fn solve_spectrum(problem: &SlProblem, count: usize, tol: f64) -> Result<Vec<Eigenpair>> {
    solve_spectrum_with(problem, count, &SolveOptions::with_tol(tol))
}

/// The first `count` eigenpairs, solved in parallel.
pub fn solve_spectrum_with(problem: &SlProblem, count: usize, opts: &SolveOptions) -> Result<Vec<Eigenpair>> {
    if count == 0 {
        return Err(range_err("K", 0.0, "[1, ∞)"));
    }
    (1..=count)
        .into_par_iter()
        .map(|k| solve_eigenpair_with(problem, k, opts))
        .collect()
}

/// `∫ weight · f · g` by Simpson on the common grid.
pub fn weighted_inner_product<F: Fn(f64) -> f64>(f: &Sampled, g: &Sampled, weight: F) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(Error::Shape(format!(
            "inner product of functions on different grids ({} vs {} points)",
            f.len(),
            g.len()
        )));
    }
    let vals: Vec<f64> = f
        .x
        .iter()
        .zip(f.y.iter().zip(&g.y))
        .map(|(x, (a, b))| weight(*x) * a * b)
        .collect();
    crate::quad::integrate_samples(&f.x, &vals)
}

/// Second-order finite-difference discretisation with `N` subintervals,
/// symmetrised as `W^{-1/2} A W^{-1/2}` and stored as a tridiagonal matrix.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixOracle {
    /// Number of subintervals `N`; the matrix has `N - 1` rows.
    pub grid_size: usize,
    pub h: f64,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Lowest [`ORACLE_EIGENVALUES`] eigenvalues (or all, if fewer).
    pub eigenvalues: Vec<f64>,
}

pub fn build_matrix_oracle(problem: &SlProblem, n: usize) -> Result<MatrixOracle> {
    if n < MIN_ORACLE_GRID {
        return Err(range_err("N", n as f64, format!("[{MIN_ORACLE_GRID}, ∞)")));
    }
    let h = (problem.x_hi - problem.x_lo) / n as f64;
    let x = |i: usize| problem.x_lo + i as f64 * h;
    let m = n - 1;
    let mut diag = Vec::with_capacity(m);
    let mut offdiag = Vec::with_capacity(m.saturating_sub(1));
    let root_w: Vec<f64> = (1..n).map(|i| (problem.w)(x(i)).sqrt()).collect();
    for i in 1..n {
        let pl = (problem.p)(x(i) - 0.5 * h);
        let pr = (problem.p)(x(i) + 0.5 * h);
        let a = (pl + pr) / (h * h) + (problem.q0)(x(i));
        diag.push(a / (root_w[i - 1] * root_w[i - 1]));
        if i + 1 < n {
            offdiag.push(-pr / (h * h) / (root_w[i - 1] * root_w[i]));
        }
    }
    let mut oracle = MatrixOracle {
        grid_size: n,
        h,
        diag,
        offdiag,
        eigenvalues: Vec::new(),
    };
    let count = ORACLE_EIGENVALUES.min(m);
    oracle.eigenvalues = (1..=count).map(|k| oracle.eigenvalue(k)).collect();
    Ok(oracle)
}

impl MatrixOracle {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Eigenvalues strictly below `sigma` (Sylvester inertia of `T - σ`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.diag.len() {
            let b2 = if i == 0 { 0.0 } else { self.offdiag[i - 1].powi(2) };
            d = self.diag[i] - sigma - if i == 0 { 0.0 } else { b2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + sigma.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th smallest eigenvalue (1-based) by Sturm bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.diag.len() {
            let r = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 }
                + self.offdiag.get(i).map_or(0.0, |b| b.abs());
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut a = DMatrix::zeros(m, m);
        for i in 0..m {
            a[(i, i)] = self.diag[i];
            if i + 1 < m {
                a[(i, i + 1)] = self.offdiag[i];
                a[(i + 1, i)] = self.offdiag[i];
            }
        }
        a
    }

    /// Full spectrum from a dense symmetric eigen-decomposition (small N only).
    pub fn dense_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dense()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Richardson-extrapolated oracle eigenvalue from grids `N/2^{levels-1}, …, N`.
///
/// The scheme's error expands in even powers of `h`, so each level removes
/// one more power of `h²`.
pub fn extrapolated_oracle_eigenvalue(problem: &SlProblem, k: usize, n: usize, levels: usize) -> Result<f64> {
    if levels == 0 {
        return Err(range_err("levels", 0.0, "[1, ∞)"));
    }
    let coarsest = n >> (levels - 1);
    if coarsest << (levels - 1) != n {
        return Err(Error::Contract(format!(
            "N = {n} is not divisible by 2^{}",
            levels - 1
        )));
    }
    let mut row: Vec<f64> = (0..levels)
        .into_par_iter()
        .map(|l| build_matrix_oracle(problem, coarsest << l).map(|o| o.eigenvalue(k)))
        .collect::<Result<_>>()?;
    let mut factor = 4.0;
    for _ in 1..levels {
        row = row
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]) / (factor - 1.0))
            .collect();
        factor *= 4.0;
    }
    Ok(row[0])
}
