//! The end-to-end argument at fixed parameters: domain geometry in the upper
//! half-plane, the mode-ordering hypothesis, the gap with and without the
//! potential `tP`, and the search for a domain of prescribed diameter.
//!
//! The domain is `Ω_{φ₀,μ} = {(r sin φ, r cos φ) : 1 < r < e^{π/√μ}, 0 < φ < φ₀}`.
//! Rays `φ = const` are hypercycles around the geodesic `{φ = 0}`, at
//! distance `P(φ) = artanh(sin φ)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{fit_rate, gap_integral};
use crate::error::{range_err, Error, Result};
use crate::gap_model::{eval_potential, solve_reduced, ReducedProblem};
use crate::sturm::Eigenpair;

/// Eigenvalue tolerance for every solve in the pipeline; finite differences
/// of gaps in `t` need the tightest setting.
pub const PIPELINE_TOL: f64 = 1e-13;

pub type Point = (f64, f64);

/// Distance in the upper half-plane, via `sinh(d/2) = |p - q| / (2 √(y_p y_q))`
/// (algebraically `cosh d = 1 + |p - q|²/(2 y_p y_q)`, without the
/// cancellation for nearby points).
pub fn hyperbolic_distance(p: Point, q: Point) -> Result<f64> {
    if !(p.1 > 0.0 && q.1 > 0.0) {
        return Err(Error::Domain(format!(
            "points must lie in the upper half-plane, got y = {} and {}",
            p.1, q.1
        )));
    }
    let chord = (p.0 - q.0).hypot(p.1 - q.1);
    Ok(2.0 * (chord / (2.0 * (p.1 * q.1).sqrt())).asinh())
}

/// The angle whose hypercycle lies at distance `D` from `{φ = 0}`:
/// `φ_D = arcsin(tanh D)`.
pub fn phi_of_length(d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(range_err("D", d, "(0, ∞)"));
    }
    Ok(d.tanh().asin())
}

/// Outer radius `e^{π/√μ}`.
pub fn outer_radius(mu: f64) -> f64 {
    (PI / mu.sqrt()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    pub phi0: f64,
    pub mu: f64,
    pub n: u32,
    /// `(r, φ) = (1, 0), (1, φ₀), (R, φ₀), (R, 0)` in Cartesian coordinates.
    pub corner_points: [Point; 4],
}

impl DomainSpec {
    pub fn new(phi0: f64, mu: f64, n: u32) -> Result<Self> {
        ReducedProblem::base(n, phi0, mu)?;
        let r = outer_radius(mu);
        let pt = |r: f64, phi: f64| (r * phi.sin(), r * phi.cos());
        Ok(DomainSpec {
            phi0,
            mu,
            n,
            corner_points: [pt(1.0, 0.0), pt(1.0, phi0), pt(r, phi0), pt(r, 0.0)],
        })
    }

    pub fn outer_radius(&self) -> f64 {
        outer_radius(self.mu)
    }

    /// Boundary point for `s ∈ [0, 4]`, one unit of `s` per side, walking
    /// inner arc, outer ray `φ = φ₀`, outer arc, then the axis back.
    pub fn boundary_point(&self, s: f64) -> Point {
        let big_r = self.outer_radius();
        let s = s.clamp(0.0, 4.0);
        let side = (s.floor() as usize).min(3);
        let u = s - side as f64;
        let (r, phi) = match side {
            0 => (1.0, u * self.phi0),
            1 => (big_r.powf(u), self.phi0),
            2 => (big_r, (1.0 - u) * self.phi0),
            _ => (big_r.powf(1.0 - u), 0.0),
        };
        (r * phi.sin(), r * phi.cos())
    }

    /// `D ≤ diam ≤ D + cosh(D) π/√μ` with `D = P(φ₀)`.
    pub fn diameter_bounds(&self) -> Result<(f64, f64)> {
        let d = eval_potential(self.phi0)?;
        Ok((d, d + d.cosh() * PI / self.mu.sqrt()))
    }
}

pub const DEFAULT_BOUNDARY_SAMPLES: usize = 256;

/// Largest pairwise distance between boundary points of the closed domain.
///
/// All `4·samples` boundary samples (corners included) are compared
/// pairwise; the best pair is then polished by alternating golden-section
/// searches along the boundary, each confined to one sample spacing.
pub fn diameter(spec: &DomainSpec, boundary_samples: usize) -> Result<f64> {
    if spec.n != 2 {
        return Err(Error::Contract(format!(
            "the diameter is computed for the planar domain only, got n = {}",
            spec.n
        )));
    }
    if boundary_samples < 64 {
        return Err(range_err("boundary_samples", boundary_samples as f64, "[64, ∞)"));
    }
    let m = 4 * boundary_samples;
    let ss: Vec<f64> = (0..m).map(|i| 4.0 * i as f64 / m as f64).collect();
    let pts: Vec<Point> = ss.iter().map(|&s| spec.boundary_point(s)).collect();
    let (best, i, j) = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut best = (0.0f64, i, i);
            for j in i + 1..m {
                let d = hyperbolic_distance(pts[i], pts[j]).unwrap_or(0.0);
                if d > best.0 {
                    best = (d, i, j);
                }
            }
            best
        })
        .reduce(|| (0.0, 0, 0), |a, b| if b.0 > a.0 { b } else { a });
    let h = 4.0 / m as f64;
    let dist = |a: f64, b: f64| hyperbolic_distance(spec.boundary_point(a), spec.boundary_point(b)).unwrap_or(0.0);
    let (mut sa, mut sb) = (ss[i], ss[j]);
    for _ in 0..6 {
        sa = golden_max(|s| dist(s, sb), sa - h, sa + h);
        sb = golden_max(|s| dist(sa, s), sb - h, sb + h);
    }
    Ok(best.max(dist(sa, sb)))
}

fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.max(0.0), hi.min(4.0));
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-13 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // the endpoints may be corners, where the maximum often sits
    [a, b, 0.5 * (a + b)]
        .into_iter()
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(a)
}

/// Samples of `φ ↦ diam(Ω_{φ,μ})` checked for strict monotonicity before bisecting.
const MONOTONICITY_SAMPLES: usize = 17;

/// `φ₀` with `diam(Ω_{φ₀,μ}) = D0` within `tol`, bisecting on
/// `[φ_{D0/2}, φ_{3D0/2}]`.
pub fn find_phi0_for_diameter(d0: f64, mu: f64, tol: f64) -> Result<f64> {
    find_phi0_with_samples(d0, mu, tol, DEFAULT_BOUNDARY_SAMPLES)
}

pub fn find_phi0_with_samples(d0: f64, mu: f64, tol: f64, samples: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(range_err("tol", tol, "(0, ∞)"));
    }
    let lo = phi_of_length(0.5 * d0)?;
    let hi = phi_of_length(1.5 * d0)?;
    let diam = |phi: f64| diameter(&DomainSpec::new(phi, mu, 2)?, samples);
    let grid: Vec<f64> = (0..MONOTONICITY_SAMPLES)
        .map(|i| lo + (hi - lo) * i as f64 / (MONOTONICITY_SAMPLES - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&p| diam(p)).collect::<Result<_>>()?;
    let (f_lo, f_hi) = (values[0], values[MONOTONICITY_SAMPLES - 1]);
    if !(f_lo < d0 && d0 < f_hi) {
        return Err(Error::Bracket {
            lo,
            hi,
            f_lo,
            f_hi,
            target: d0,
        });
    }
    if let Some(w) = values.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!(
            "diameter is not increasing in phi between {} and {}",
            grid[w],
            grid[w + 1]
        )));
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let d = diam(mid)?;
        if (d - d0).abs() <= tol || b - a < f64::EPSILON * b {
            return Ok(mid);
        }
        if d < d0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeOrdering {
    pub k: usize,
    /// `λ_K^{(μ)}`
    pub lambda_k: f64,
    /// `λ_1^{(4μ)}`, the lowest eigenvalue of the second radial mode.
    pub lambda_1_next_mode: f64,
    pub holds: bool,
}

/// `λ_K^{(μ)} < λ_1^{(4μ)}`: the `K` lowest eigenvalues of the domain all
/// come from the first radial mode.
pub fn check_mode_ordering(phi0: f64, mu: f64, n: u32, k: usize) -> Result<ModeOrdering> {
    if k < 2 {
        return Err(range_err("K", k as f64, "[2, ∞)"));
    }
    let base = ReducedProblem::base(n, phi0, mu)?;
    let own = solve_reduced(&base, k, PIPELINE_TOL)?;
    ordering_from(&own, &base, k)
}

fn ordering_from(own: &[Eigenpair], base: &ReducedProblem, k: usize) -> Result<ModeOrdering> {
    let next = solve_reduced(&base.with_j(2), 1, PIPELINE_TOL)?;
    let lambda_k = own[k - 1].lambda;
    let lambda_1_next_mode = next[0].lambda;
    Ok(ModeOrdering {
        k,
        lambda_k,
        lambda_1_next_mode,
        holds: lambda_k < lambda_1_next_mode,
    })
}

/// First `μ` in `mus` (in order) at which the ordering holds.
pub fn first_ordering_mu(phi0: f64, n: u32, k: usize, mus: &[f64]) -> Result<Option<f64>> {
    for &mu in mus {
        if check_mode_ordering(phi0, mu, n, k)?.holds {
            return Ok(Some(mu));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub n: u32,
    pub phi0: f64,
    pub mu: f64,
    pub t: f64,
    pub lambda0: Vec<f64>,
    pub lambda_t: Vec<f64>,
    /// `Γ(0) = λ₂ - λ₁`
    pub gamma0: f64,
    pub gamma_t: f64,
    /// `I = ∫ P (h₂² - h₁²) cos^{-n}`, the derivative of `Γ` at `t = 0`.
    pub integral_i: f64,
    /// `|(Γ(t) - Γ(0))/t - I|`, absent at `t = 0`.
    pub hf_residual: Option<f64>,
    pub mode_ordering: ModeOrdering,
    pub mode_ordering_ok: bool,
    /// `Γ(t) < Γ(0)`
    pub verdict: bool,
}

/// Unperturbed eigenpairs, reused across several `t`.
struct Baseline {
    problem: ReducedProblem,
    pairs: Vec<Eigenpair>,
    integral: f64,
}

impl Baseline {
    fn new(phi0: f64, mu: f64, n: u32, count: usize) -> Result<Self> {
        let problem = ReducedProblem::base(n, phi0, mu)?;
        let pairs = solve_reduced(&problem, count, PIPELINE_TOL)?;
        let integral = gap_integral(n, &pairs[0], &pairs[1])?;
        Ok(Baseline {
            problem,
            pairs,
            integral,
        })
    }

    fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|e| e.lambda).collect()
    }

    fn gamma0(&self) -> f64 {
        self.pairs[1].lambda - self.pairs[0].lambda
    }

    fn perturbed(&self, t: f64) -> Result<Vec<f64>> {
        if t == 0.0 {
            return Ok(self.lambdas());
        }
        let p = self.problem.with_t(t);
        p.validate()?;
        Ok(solve_reduced(&p, self.pairs.len(), PIPELINE_TOL)?
            .iter()
            .map(|e| e.lambda)
            .collect())
    }

    fn report(&self, t: f64, mode_ordering: ModeOrdering) -> Result<GapReport> {
        let lambda_t = self.perturbed(t)?;
        let gamma0 = self.gamma0();
        let gamma_t = lambda_t[1] - lambda_t[0];
        Ok(GapReport {
            n: self.problem.n,
            phi0: self.problem.phi0,
            mu: self.problem.mu,
            t,
            lambda0: self.lambdas(),
            lambda_t,
            gamma0,
            gamma_t,
            integral_i: self.integral,
            hf_residual: (t > 0.0).then(|| ((gamma_t - gamma0) / t - self.integral).abs()),
            mode_ordering_ok: mode_ordering.holds,
            mode_ordering,
            verdict: gamma_t < gamma0,
        })
    }
}

pub fn gap_with_potential(phi0: f64, mu: f64, n: u32, t: f64) -> Result<GapReport> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(range_err("t", t, "[0, ∞)"));
    }
    let base = Baseline::new(phi0, mu, n, 2)?;
    let ordering = ordering_from(&base.pairs, &base.problem, 2)?;
    base.report(t, ordering)
}

/// Hellmann-Feynman consistency under a `t`-refinement.
#[derive(Debug, Clone, Serialize)]
pub struct HfCheck {
    pub t: Vec<f64>,
    pub difference_quotient: Vec<f64>,
    pub residual: Vec<f64>,
    /// `residual / t`, bounded if the residual is genuinely second order.
    pub residual_over_t: Vec<f64>,
    /// Log-log slope of the residual against `t`.
    pub slope: f64,
    /// `sign((Γ(t) - Γ(0))/t) = sign(I)` at every `t`.
    pub sign_matches: bool,
}

fn hf_check(base: &Baseline, ts: &[f64]) -> Result<HfCheck> {
    let gamma0 = base.gamma0();
    let quotients: Vec<f64> = ts
        .par_iter()
        .map(|&t| {
            let l = base.perturbed(t)?;
            Ok((l[1] - l[0] - gamma0) / t)
        })
        .collect::<Result<_>>()?;
    let residual: Vec<f64> = quotients.iter().map(|q| (q - base.integral).abs()).collect();
    let slope = fit_rate(ts, &residual)?.slope;
    Ok(HfCheck {
        t: ts.to_vec(),
        sign_matches: quotients.iter().all(|q| q.signum() == base.integral.signum()),
        residual_over_t: residual.iter().zip(ts).map(|(r, t)| r / t).collect(),
        difference_quotient: quotients,
        residual,
        slope,
    })
}

/// Refinement `t ∈ factors · Γ(0)` at one parameter point.
pub fn hellmann_feynman_refinement(phi0: f64, mu: f64, n: u32, factors: &[f64]) -> Result<HfCheck> {
    let base = Baseline::new(phi0, mu, n, 2)?;
    let ts: Vec<f64> = factors.iter().map(|f| f * base.gamma0()).collect();
    hf_check(&base, &ts)
}

/// The third eigenvalue gap under the same perturbation.
#[derive(Debug, Clone, Serialize)]
pub struct HigherGapReport {
    pub t: f64,
    pub ordering: ModeOrdering,
    /// `λ₃ - λ₂` at `0` and at `t`.
    pub gap0: f64,
    pub gap_t: f64,
    pub decreases: bool,
    /// Vacuously true when the ordering fails.
    pub holds: bool,
}

pub fn higher_gap_check(phi0: f64, mu: f64, n: u32, t: f64) -> Result<HigherGapReport> {
    let base = Baseline::new(phi0, mu, n, 3)?;
    higher_gap_from(&base, t)
}

fn higher_gap_from(base: &Baseline, t: f64) -> Result<HigherGapReport> {
    let ordering = ordering_from(&base.pairs, &base.problem, 3)?;
    let l0 = base.lambdas();
    let lt = base.perturbed(t)?;
    let (gap0, gap_t) = (l0[2] - l0[1], lt[2] - lt[1]);
    let decreases = gap_t < gap0;
    Ok(HigherGapReport {
        t,
        holds: !ordering.holds || decreases,
        ordering,
        gap0,
        gap_t,
        decreases,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremConfig {
    pub mu_ladder: Vec<f64>,
    /// Headline `t = t_factor · Γ(0)`.
    pub t_factor: f64,
    /// Refinement `t ∈ hf_factors · Γ(0)` for the Hellmann-Feynman slope.
    pub hf_factors: Vec<f64>,
    /// Accepted window for that slope.
    pub hf_slope_window: (f64, f64),
    pub diameter_tol: f64,
    pub boundary_samples: usize,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        TheoremConfig {
            mu_ladder: vec![1e4, 1e5, 1e6, 1e7],
            t_factor: 1e-3,
            hf_factors: vec![4e-3, 2e-3, 1e-3],
            hf_slope_window: (0.9, 1.1),
            diameter_tol: 1e-9,
            boundary_samples: DEFAULT_BOUNDARY_SAMPLES,
        }
    }
}

impl TheoremConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu_ladder.is_empty() {
            return Err(Error::Domain("the mu ladder is empty".into()));
        }
        if let Some(&mu) = self.mu_ladder.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(range_err("mu", mu, "(0, ∞)"));
        }
        if !(self.t_factor > 0.0 && self.t_factor.is_finite()) {
            return Err(range_err("t_factor", self.t_factor, "(0, ∞)"));
        }
        if self.hf_factors.len() < 3 || self.hf_factors.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Domain("hf_factors needs at least 3 positive entries".into()));
        }
        if !(self.diameter_tol > 0.0) {
            return Err(range_err("diameter_tol", self.diameter_tol, "(0, ∞)"));
        }
        if self.boundary_samples < 64 {
            return Err(range_err("boundary_samples", self.boundary_samples as f64, "[64, ∞)"));
        }
        Ok(())
    }
}

/// How far the verdict reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PdeLevel {
    /// Planar domain: the reduced problem is the exact separated PDE.
    Numerical,
    /// `n ≥ 3`: only the reduced chain is computed; the statement for the
    /// full domain rests on the separation argument with `μ` as input.
    AnalyticTransfer,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rung {
    pub mu: f64,
    pub phi0: f64,
    pub mode_ordering_ok: bool,
    pub integral_i: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub d0: f64,
    pub n: u32,
    pub mu: f64,
    pub phi0: f64,
    pub domain: DomainSpec,
    /// Measured diameter (planar case only).
    pub diameter: Option<f64>,
    pub diameter_bounds: (f64, f64),
    pub rungs: Vec<Rung>,
    pub gap: GapReport,
    pub hf: HfCheck,
    pub higher_gap: HigherGapReport,
    pub pde_level: PdeLevel,
    pub verdict: bool,
}

/// Escalates `μ` along the ladder until the hypotheses hold at the domain of
/// diameter `D0`, then evaluates the gap there.
///
/// For `n ≥ 3` the angle is the limiting choice `φ_{D0}` (the diameter of the
/// product domain tends to `D0` as the cross-section shrinks).
pub fn run_theorem(d0: f64, n: u32, config: &TheoremConfig) -> Result<TheoremReport> {
    config.validate()?;
    if !(d0 > 0.0 && d0.is_finite()) {
        return Err(range_err("D0", d0, "(0, ∞)"));
    }
    let mut rungs = Vec::new();
    for &mu in &config.mu_ladder {
        let phi0 = if n == 2 {
            find_phi0_with_samples(d0, mu, config.diameter_tol, config.boundary_samples)?
        } else {
            phi_of_length(d0)?
        };
        let base = Baseline::new(phi0, mu, n, 3)?;
        let ordering = ordering_from(&base.pairs, &base.problem, 2)?;
        let passed = ordering.holds && base.integral < 0.0;
        rungs.push(Rung {
            mu,
            phi0,
            mode_ordering_ok: ordering.holds,
            integral_i: base.integral,
            passed,
        });
        if !passed {
            continue;
        }
        let domain = DomainSpec::new(phi0, mu, n)?;
        let diameter = if n == 2 {
            Some(diameter(&DomainSpec::new(phi0, mu, 2)?, config.boundary_samples)?)
        } else {
            None
        };
        let gamma0 = base.gamma0();
        let t = config.t_factor * gamma0;
        let gap = base.report(t, ordering)?;
        let ts: Vec<f64> = config.hf_factors.iter().map(|f| f * gamma0).collect();
        let hf = hf_check(&base, &ts)?;
        let higher_gap = higher_gap_from(&base, t)?;
        let diameter_ok = diameter.is_none_or(|d| (d - d0).abs() <= 1e-6);
        let (lo, hi) = config.hf_slope_window;
        let verdict = gap.gamma0 > 0.0
            && gap.verdict
            && gap.integral_i < 0.0
            && gap.mode_ordering_ok
            && diameter_ok
            && hf.sign_matches
            && (lo..=hi).contains(&hf.slope);
        return Ok(TheoremReport {
            d0,
            n,
            mu,
            phi0,
            diameter_bounds: domain.diameter_bounds()?,
            domain,
            diameter,
            rungs,
            gap,
            hf,
            higher_gap,
            pde_level: if n == 2 {
                PdeLevel::Numerical
            } else {
                PdeLevel::AnalyticTransfer
            },
            verdict,
        });
    }
    let last = rungs
        .last()
        .map(|r| format!("mu = {:e}: ordering {}, I = {:e}", r.mu, r.mode_ordering_ok, r.integral_i))
        .unwrap_or_default();
    Err(Error::LadderExhausted(last))
}
