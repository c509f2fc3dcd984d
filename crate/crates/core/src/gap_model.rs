//! The domain family, distance potential and reduced eigenproblems.
//!
//! Separating variables on `{1 < r < e^{π/√μ}, 0 < φ < φ₀}` (and its
//! n-dimensional analogue) leaves, for the lowest radial mode,
//!
//!   -(cos^{2-n} h')' + j²μ cos^{2-n} h + t P cos^{-n} h = λ cos^{-n} h
//!
//! on `(0, φ₀)` with Dirichlet conditions. In the Airy frame
//! `φ = φ₀ - δ^{1/3} x`, `δ = 1/(2 μ tan φ₀)`, the eigenfunctions approach
//! the half-line Airy eigenfunctions.

use std::sync::Arc;

use serde::Serialize;

use crate::airy::airy_zeros;
use crate::error::{range_err, Error, Result};
use crate::quad::{derivative4, second_derivative4, simpson, Sampled};
use crate::sturm::{solve_spectrum_with, Eigenpair, SlProblem, SolveOptions};

/// Largest Airy coordinate kept when resampling into the rescaled frame.
pub const X_TRUNCATION: f64 = 60.0;
/// Grid points per unit of the Airy coordinate used for reduced solves.
pub const POINTS_PER_AIRY_UNIT: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedProblem {
    pub n: u32,
    pub phi0: f64,
    pub mu: f64,
    pub t: f64,
    pub j: u32,
}

impl ReducedProblem {
    pub fn new(n: u32, phi0: f64, mu: f64, t: f64, j: u32) -> Result<Self> {
        let p = ReducedProblem { n, phi0, mu, t, j };
        p.validate()?;
        Ok(p)
    }

    /// Unperturbed lowest radial mode in dimension `n`.
    pub fn base(n: u32, phi0: f64, mu: f64) -> Result<Self> {
        Self::new(n, phi0, mu, 0.0, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(range_err("n", self.n as f64, "[2, ∞)"));
        }
        if !(self.phi0 > 0.0 && self.phi0 < std::f64::consts::FRAC_PI_2) {
            return Err(range_err("phi0", self.phi0, "(0, π/2)"));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(range_err("mu", self.mu, "(0, ∞)"));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(range_err("t", self.t, "[0, ∞)"));
        }
        if self.j == 0 {
            return Err(range_err("j", 0.0, "[1, ∞)"));
        }
        Ok(())
    }

    pub fn with_t(self, t: f64) -> Self {
        ReducedProblem { t, ..self }
    }

    pub fn with_j(self, j: u32) -> Self {
        ReducedProblem { j, ..self }
    }

    pub fn effective_mu(&self) -> f64 {
        let j = self.j as f64;
        j * j * self.mu
    }

    pub fn delta(&self) -> f64 {
        delta(self.phi0, self.effective_mu())
    }

    /// `φ₀ δ^{-1/3}`, the right end of the Airy coordinate.
    pub fn x_max(&self) -> f64 {
        self.phi0 / self.delta().cbrt()
    }

    /// Grid that resolves the Airy scale with [`POINTS_PER_AIRY_UNIT`].
    pub fn grid_points(&self) -> usize {
        let intervals = (POINTS_PER_AIRY_UNIT * self.x_max()).ceil() as usize;
        intervals.max(4096) + 1
    }

    /// Leading-order eigenvalue `μ cos²φ₀ (1 + 2 tan φ₀ a_k δ^{1/3}) + t P(φ₀)`.
    pub fn expansion_guess(&self, k: usize) -> Result<f64> {
        let a = airy_zeros(k.min(crate::airy::MAX_ZEROS))?;
        let a_k = a.get(a.len());
        Ok(lambda_from_alpha_tilde(a_k, self.phi0, self.effective_mu()) + self.t * eval_potential(self.phi0)?)
    }
}

/// `δ = μ^{-1} / (2 tan φ₀)`.
pub fn delta(phi0: f64, mu: f64) -> f64 {
    1.0 / (mu * 2.0 * phi0.tan())
}

/// `α̃ = δ^{-1/3}/(2 tan φ₀) · (λ/μ - cos²φ₀)/cos²φ₀`.
pub fn alpha_tilde(lambda: f64, phi0: f64, mu: f64) -> f64 {
    let d3 = delta(phi0, mu).cbrt();
    let c2 = phi0.cos().powi(2);
    (lambda / mu - c2) / c2 / (d3 * 2.0 * phi0.tan())
}

/// Inverse of [`alpha_tilde`].
pub fn lambda_from_alpha_tilde(alpha: f64, phi0: f64, mu: f64) -> f64 {
    let d3 = delta(phi0, mu).cbrt();
    mu * phi0.cos().powi(2) * (1.0 + 2.0 * phi0.tan() * alpha * d3)
}

/// Hyperbolic distance to the geodesic `{φ = 0}`: `P(φ) = artanh(sin φ)`.
pub fn eval_potential(phi: f64) -> Result<f64> {
    check_phi(phi)?;
    Ok(phi.sin().atanh())
}

/// `P'(φ) = 1/cos φ`.
pub fn eval_potential_derivative(phi: f64) -> Result<f64> {
    check_phi(phi)?;
    Ok(1.0 / phi.cos())
}

fn check_phi(phi: f64) -> Result<()> {
    if !(phi >= 0.0 && phi < std::f64::consts::FRAC_PI_2) {
        return Err(range_err("phi", phi, "[0, π/2)"));
    }
    Ok(())
}

pub fn reduced_problem_as_sl(problem: &ReducedProblem) -> Result<SlProblem> {
    problem.validate()?;
    let n = problem.n as i32;
    let m = problem.effective_mu();
    let t = problem.t;
    let sl = SlProblem::new(
        0.0,
        problem.phi0,
        move |phi: f64| phi.cos().powi(2 - n),
        move |phi: f64| phi.cos().powi(-n),
        move |phi: f64| m * phi.cos().powi(2 - n) + t * phi.sin().atanh() * phi.cos().powi(-n),
        move |phi: f64| phi.cos().powi(-n),
    )?;
    let p = *problem;
    // a quarter of an Airy unit around the asymptotic location
    let spread = 0.25 * m * p.phi0.cos().powi(2) * 2.0 * p.phi0.tan() * p.delta().cbrt();
    Ok(sl.with_hint(Arc::new(move |k| {
        let g = p.expansion_guess(k).unwrap_or(m);
        (g, spread)
    })))
}

/// The first `count` eigenpairs on a grid resolving the Airy scale.
pub fn solve_reduced(problem: &ReducedProblem, count: usize, tol: f64) -> Result<Vec<Eigenpair>> {
    let opts = SolveOptions {
        tol,
        grid_points: problem.grid_points(),
        ..SolveOptions::default()
    };
    solve_reduced_with(problem, count, &opts)
}

pub fn solve_reduced_with(problem: &ReducedProblem, count: usize, opts: &SolveOptions) -> Result<Vec<Eigenpair>> {
    let sl = reduced_problem_as_sl(problem)?;
    solve_spectrum_with(&sl, count, opts)
}

/// The reduced problem in the Airy coordinate.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledFrame {
    pub n: u32,
    pub phi0: f64,
    pub mu: f64,
    pub delta: f64,
    /// `φ₀ δ^{-1/3}` (the sampled grid stops at `min(x_max, 60)`).
    pub x_max: f64,
    pub lambda: Vec<f64>,
    pub n_k: Vec<f64>,
    pub alpha_tilde: Vec<f64>,
    pub x: Vec<f64>,
    pub u_tilde: Vec<Vec<f64>>,
}

impl RescaledFrame {
    pub fn step(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn cbrt_delta(&self) -> f64 {
        self.delta.cbrt()
    }

    /// `cos(φ₀ - δ^{1/3} x)`.
    pub fn cos_at(&self, x: f64) -> f64 {
        (self.phi0 - self.cbrt_delta() * x).cos()
    }

    /// Weight of the rescaled inner product, `cosⁿφ₀ / cosⁿ(φ₀ - δ^{1/3}x)`.
    pub fn weight(&self, x: f64) -> f64 {
        (self.phi0.cos() / self.cos_at(x)).powi(self.n as i32)
    }

    /// `δ^{-1/3}/(2 tan φ₀) · (1 - cos²φ₀ / cos²(φ₀ - δ^{1/3}x))`, which is
    /// `x + O(δ^{1/3} x²)`.
    pub fn airy_coefficient(&self, x: f64) -> f64 {
        let th = self.cbrt_delta() * x;
        let c = self.cos_at(x);
        // cos²(φ₀-θ) - cos²φ₀ = sin θ sin(2φ₀ - θ), free of cancellation
        let ratio = th.sin() * (2.0 * self.phi0 - th).sin() / (c * c);
        ratio / (self.cbrt_delta() * 2.0 * self.phi0.tan())
    }

    pub fn sampled(&self, k: usize) -> Sampled {
        Sampled {
            x: self.x.clone(),
            y: self.u_tilde[k - 1].clone(),
        }
    }

    pub fn inner_product(&self, f: &Sampled, g: &Sampled) -> Result<f64> {
        crate::sturm::weighted_inner_product(f, g, |x| self.weight(x))
    }

    fn check_grid(&self, f: &Sampled) -> Result<()> {
        let frame = Sampled {
            x: self.x.clone(),
            y: Vec::new(),
        };
        if !frame.same_grid(f) {
            return Err(Error::Shape(format!(
                "function sampled on {} points, frame grid has {}",
                f.len(),
                self.x.len()
            )));
        }
        Ok(())
    }

    /// `‖Ã ũ_k - α̃_k ũ_k‖_{L²}` together with a truncation-floor estimate
    /// (the same norm evaluated with second-order stencils, minus the first).
    pub fn eigen_residual(&self, k: usize) -> Result<(f64, f64)> {
        let f = self.sampled(k);
        let a = apply_rescaled_operator(self, &f)?;
        let h = self.step();
        let res: Vec<f64> = a
            .y
            .iter()
            .zip(&f.y)
            .map(|(af, u)| (af - self.alpha_tilde[k - 1] * u).powi(2))
            .collect();
        let r4 = simpson(&res, h).sqrt();
        let a2 = self.apply_second_order(&f);
        let diff: Vec<f64> = a2.iter().zip(&a.y).map(|(p, q)| (p - q).powi(2)).collect();
        Ok((r4, simpson(&diff, h).sqrt()))
    }

    fn apply_second_order(&self, f: &Sampled) -> Vec<f64> {
        let h = self.step();
        let m = f.y.len();
        let mut d1 = vec![0.0; m];
        let mut d2 = vec![0.0; m];
        for i in 1..m - 1 {
            d1[i] = (f.y[i + 1] - f.y[i - 1]) / (2.0 * h);
            d2[i] = (f.y[i + 1] - 2.0 * f.y[i] + f.y[i - 1]) / (h * h);
        }
        self.combine(&f.x, &f.y, &d1, &d2)
    }

    fn combine(&self, xs: &[f64], f: &[f64], d1: &[f64], d2: &[f64]) -> Vec<f64> {
        let n = self.n as i32;
        let c0 = self.phi0.cos();
        let d3 = self.cbrt_delta();
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = self.cos_at(x);
                let g = (c0 / c).powi(n - 2);
                // d/dx (c0/c)^{n-2} = -(n-2) g δ^{1/3} tan(φ₀ - δ^{1/3} x)
                let dg = -((n - 2) as f64) * g * d3 * (self.phi0 - d3 * x).tan();
                let lead = (c / c0).powi(n);
                -lead * (g * d2[i] + dg * d1[i]) + (c / c0).powi(2) * self.airy_coefficient(x) * f[i]
            })
            .collect()
    }
}

/// Resample eigenpairs of the unperturbed reduced problem into the Airy frame.
pub fn rescale(problem: &ReducedProblem, eigenpairs: &[Eigenpair]) -> Result<RescaledFrame> {
    problem.validate()?;
    if problem.t != 0.0 {
        return Err(Error::Contract(format!(
            "rescaling is defined for the unperturbed problem, got t = {}",
            problem.t
        )));
    }
    if eigenpairs.is_empty() {
        return Err(Error::Shape("no eigenpairs to rescale".into()));
    }
    let first = &eigenpairs[0];
    if eigenpairs.iter().any(|e| e.x.len() != first.x.len()) {
        return Err(Error::Shape("eigenpairs live on different grids".into()));
    }
    let mu = problem.effective_mu();
    let d = delta(problem.phi0, mu);
    let d3 = d.cbrt();
    let x_max = problem.phi0 / d3;
    let total = first.x.len();
    let hx = x_max / (total - 1) as f64;
    let keep = ((X_TRUNCATION.min(x_max) / hx).floor() as usize + 1).min(total);
    if keep < 6 {
        return Err(Error::Shape(format!("only {keep} samples fall inside the Airy window")));
    }
    let x: Vec<f64> = (0..keep).map(|i| i as f64 * hx).collect();
    let nk = (d3 / problem.phi0.cos().powi(problem.n as i32)).sqrt();
    let mut u_tilde = Vec::with_capacity(eigenpairs.len());
    for e in eigenpairs {
        // x_i ↔ φ = φ₀ - δ^{1/3} x_i, i.e. sample index total-1-i
        u_tilde.push((0..keep).map(|i| nk * e.y[total - 1 - i]).collect());
    }
    Ok(RescaledFrame {
        n: problem.n,
        phi0: problem.phi0,
        mu,
        delta: d,
        x_max,
        lambda: eigenpairs.iter().map(|e| e.lambda).collect(),
        n_k: vec![nk; eigenpairs.len()],
        alpha_tilde: eigenpairs
            .iter()
            .map(|e| alpha_tilde(e.lambda, problem.phi0, mu))
            .collect(),
        x,
        u_tilde,
    })
}

/// `Ã f` by fourth-order finite differences on the frame grid.
pub fn apply_rescaled_operator(frame: &RescaledFrame, f: &Sampled) -> Result<Sampled> {
    frame.check_grid(f)?;
    let h = frame.step();
    let d1 = derivative4(&f.y, h)?;
    let d2 = second_derivative4(&f.y, h)?;
    Ok(Sampled {
        x: f.x.clone(),
        y: frame.combine(&f.x, &f.y, &d1, &d2),
    })
}
