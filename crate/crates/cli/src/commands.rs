use serde::Serialize;
use serde_json::json;

use gaplab::airy::{airy_table, AIRY_X_LIMIT, MAX_ZEROS};
use gaplab::asymptotics::{corollary_sweep, fit_rate, perturbation_battery, rescale_sweep, BatteryRow, RescaleRow};
use gaplab::gap_model::{alpha_tilde, solve_reduced_with, ReducedProblem};
use gaplab::sturm::SolveOptions;
use gaplab::theorem::{run_theorem, TheoremConfig};

use crate::output::{self, Meta};
use crate::params::*;
use crate::CliError;

/// Serialised document plus whether the checks it reports all passed.
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub passed: bool,
}

fn usage(e: gaplab::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn check_mus(mus: &[f64], n: u32, phi0: f64) -> Result<(), CliError> {
    if mus.len() < 3 {
        return Err(CliError::Usage(format!(
            "mu needs at least 3 values for a rate fit, got {}",
            mus.len()
        )));
    }
    for &mu in mus {
        ReducedProblem::base(n, phi0, mu).map_err(usage)?;
    }
    Ok(())
}

fn check_count(name: &str, count: usize, max: usize) -> Result<(), CliError> {
    if count == 0 || count > max {
        return Err(CliError::Usage(format!("{name} = {count} is outside [1, {max}]")));
    }
    Ok(())
}

#[derive(Serialize)]
struct AiryRow {
    x: f64,
    ai: f64,
    ai_prime: f64,
    bi: f64,
    bi_prime: f64,
    wronskian: f64,
}

const MAX_TABLE_ROWS: f64 = 1e7;

pub fn airy(p: &AiryTableParams, format: Format, meta: &Meta) -> Result<Outcome, CliError> {
    for (name, x) in [("x_min", p.x_min), ("x_max", p.x_max)] {
        if !(x.abs() <= AIRY_X_LIMIT) {
            return Err(CliError::Usage(format!(
                "{name} = {x} is outside [-{AIRY_X_LIMIT}, {AIRY_X_LIMIT}]"
            )));
        }
    }
    if !(p.step > 0.0) || !(p.x_min <= p.x_max) || (p.x_max - p.x_min) / p.step > MAX_TABLE_ROWS {
        return Err(CliError::Usage(format!(
            "need step > 0, x_min <= x_max and at most {MAX_TABLE_ROWS:e} rows (got {}..{} by {})",
            p.x_min, p.x_max, p.step
        )));
    }
    let rows: Vec<AiryRow> = airy_table(p.x_min, p.x_max, p.step)?
        .into_iter()
        .map(|v| AiryRow {
            x: v.x,
            ai: v.ai,
            ai_prime: v.ai_prime,
            bi: v.bi,
            bi_prime: v.bi_prime,
            wronskian: v.wronskian(),
        })
        .collect();
    let bytes = match format {
        Format::Csv => output::csv(meta, &rows)?,
        Format::Json => output::json(meta, &rows)?,
    };
    Ok(Outcome { bytes, passed: true })
}

#[derive(Serialize)]
struct EigenRow {
    k: usize,
    lambda: f64,
    alpha_tilde: f64,
    sign_changes: usize,
    norm_check: f64,
}

#[derive(Serialize)]
struct FunctionRow {
    k: usize,
    x: f64,
    y: f64,
    dy: f64,
}

pub fn eigen(p: &EigenParams, format: Format, meta: &Meta) -> Result<Outcome, CliError> {
    let problem = ReducedProblem::new(p.n, p.phi0, p.mu, p.t, p.j).map_err(usage)?;
    check_count("K", p.count, MAX_ZEROS)?;
    let opts = SolveOptions {
        tol: p.tol,
        grid_points: p.grid_points.unwrap_or_else(|| problem.grid_points()),
        ..SolveOptions::default()
    };
    if !(1e-13..=1e-4).contains(&p.tol) {
        return Err(CliError::Usage(format!("tol = {} is outside [1e-13, 1e-4]", p.tol)));
    }
    if opts.grid_points < 5 {
        return Err(CliError::Usage(format!("grid_points = {} is below 5", opts.grid_points)));
    }
    let pairs = solve_reduced_with(&problem, p.count, &opts)?;
    let rows: Vec<EigenRow> = pairs
        .iter()
        .map(|e| EigenRow {
            k: e.k,
            lambda: e.lambda,
            alpha_tilde: alpha_tilde(e.lambda, p.phi0, problem.effective_mu()),
            sign_changes: e.interior_sign_changes(),
            norm_check: e.norm_check,
        })
        .collect();
    let bytes = match (format, p.functions) {
        (Format::Csv, false) => output::csv(meta, &rows)?,
        (Format::Csv, true) => {
            let f: Vec<FunctionRow> = pairs
                .iter()
                .flat_map(|e| {
                    (0..e.x.len()).map(move |i| FunctionRow {
                        k: e.k,
                        x: e.x[i],
                        y: e.y[i],
                        dy: e.dy[i],
                    })
                })
                .collect();
            output::csv(meta, &f)?
        }
        (Format::Json, false) => output::json(meta, &json!({ "problem": problem, "eigenvalues": rows }))?,
        (Format::Json, true) => output::json(meta, &json!({ "problem": problem, "eigenpairs": pairs }))?,
    };
    Ok(Outcome { bytes, passed: true })
}

#[derive(Serialize)]
struct RescaleCsvRow {
    n: u32,
    phi0: f64,
    mu: f64,
    delta: f64,
    k: usize,
    lambda: f64,
    alpha_tilde: f64,
    a_k: f64,
    deviation: f64,
    expansion_residual: f64,
    proximity: f64,
    decay_bound: f64,
    deviation_slope: f64,
    expansion_slope: f64,
    proximity_slope: f64,
}

#[derive(Serialize)]
struct RateFits {
    k: usize,
    deviation_slope: f64,
    expansion_slope: f64,
    proximity_slope: f64,
}

fn rate_fits(rows: &[RescaleRow], count: usize) -> Result<Vec<RateFits>, CliError> {
    (1..=count)
        .map(|k| {
            let sel: Vec<&RescaleRow> = rows.iter().filter(|r| r.k == k).collect();
            let d: Vec<f64> = sel.iter().map(|r| r.delta).collect();
            let slope = |f: fn(&RescaleRow) -> f64| -> Result<f64, CliError> {
                let ys: Vec<f64> = sel.iter().map(|r| f(r)).collect();
                Ok(fit_rate(&d, &ys)?.slope)
            };
            Ok(RateFits {
                k,
                deviation_slope: slope(|r| r.deviation)?,
                expansion_slope: slope(|r| r.expansion_residual)?,
                proximity_slope: slope(|r| r.proximity)?,
            })
        })
        .collect()
}

pub fn rescale(p: &RescaleSweepParams, format: Format, meta: &Meta) -> Result<Outcome, CliError> {
    check_mus(&p.mu, p.n, p.phi0)?;
    check_count("K", p.count, MAX_ZEROS)?;
    let rows = rescale_sweep(p.n, p.phi0, &p.mu, p.count)?;
    let fits = rate_fits(&rows, p.count)?;
    let bytes = match format {
        Format::Csv => {
            let out: Vec<RescaleCsvRow> = rows
                .iter()
                .map(|r| {
                    let f = &fits[r.k - 1];
                    RescaleCsvRow {
                        n: r.n,
                        phi0: r.phi0,
                        mu: r.mu,
                        delta: r.delta,
                        k: r.k,
                        lambda: r.lambda,
                        alpha_tilde: r.alpha_tilde,
                        a_k: r.a_k,
                        deviation: r.deviation,
                        expansion_residual: r.expansion_residual,
                        proximity: r.proximity,
                        decay_bound: r.decay_bound,
                        deviation_slope: f.deviation_slope,
                        expansion_slope: f.expansion_slope,
                        proximity_slope: f.proximity_slope,
                    }
                })
                .collect();
            output::csv(meta, &out)?
        }
        Format::Json => output::json(meta, &json!({ "rows": rows, "fits": fits }))?,
    };
    Ok(Outcome { bytes, passed: true })
}

#[derive(Serialize)]
struct CorollaryRow {
    mu: f64,
    delta: f64,
    integral: f64,
    target: f64,
    deviation: f64,
    deviation_slope: f64,
    scaled_integral: f64,
}

pub fn corollary(p: &CorollarySweepParams, format: Format, meta: &Meta) -> Result<Outcome, CliError> {
    check_mus(&p.mu, p.n, p.phi0)?;
    let res = corollary_sweep(p.n, p.phi0, &p.mu)?;
    let d: Vec<f64> = res.iter().map(|r| r.delta).collect();
    let dev: Vec<f64> = res.iter().map(|r| r.deviation.abs()).collect();
    let slope = fit_rate(&d, &dev)?.slope;
    let bytes = match format {
        Format::Csv => {
            // scaled integral last, so the converging column is the final one
            let rows: Vec<CorollaryRow> = res
                .iter()
                .map(|r| CorollaryRow {
                    mu: r.mu,
                    delta: r.delta,
                    integral: r.integral,
                    target: r.target,
                    deviation: r.deviation,
                    deviation_slope: slope,
                    scaled_integral: r.scaled_integral,
                })
                .collect();
            output::csv(meta, &rows)?
        }
        Format::Json => output::json(meta, &json!({ "rows": res, "deviation_slope": slope }))?,
    };
    Ok(Outcome {
        bytes,
        passed: res.iter().all(|r| r.integral < 0.0),
    })
}

#[derive(Serialize)]
struct BatteryCsvRow {
    index: u64,
    dim: usize,
    k: usize,
    c0: f64,
    scale: f64,
    alpha_k: f64,
    alpha_tilde_k: f64,
    epsilon_k: f64,
    epsilon_tilde_k: f64,
    harness_c: f64,
    lower_bound: f64,
    upper_bound: f64,
    eigenvector_distance: f64,
    eigenvector_bound: f64,
    gamma_k: f64,
    margin: f64,
    passed: bool,
}

impl From<&BatteryRow> for BatteryCsvRow {
    fn from(b: &BatteryRow) -> Self {
        let r = &b.report;
        BatteryCsvRow {
            index: b.index,
            dim: b.dim,
            k: b.k,
            c0: b.c0,
            scale: b.scale,
            alpha_k: r.alpha_k,
            alpha_tilde_k: r.alpha_tilde_k,
            epsilon_k: r.epsilon_k,
            epsilon_tilde_k: r.epsilon_tilde_k,
            harness_c: r.harness_c,
            lower_bound: r.lower_bound,
            upper_bound: r.upper_bound,
            eigenvector_distance: r.eigenvector_distance,
            eigenvector_bound: r.eigenvector_bound,
            gamma_k: r.gamma_k,
            margin: r.margin,
            passed: r.passed(),
        }
    }
}

pub fn battery(p: &PerturbBatteryParams, format: Format, meta: &Meta) -> Result<Outcome, CliError> {
    check_count("count", p.count, 1_000_000)?;
    let rows = perturbation_battery(p.seed, p.count)?;
    let passed = rows.iter().filter(|r| r.report.passed()).count();
    let bytes = match format {
        Format::Csv => output::csv(meta, &rows.iter().map(BatteryCsvRow::from).collect::<Vec<_>>())?,
        Format::Json => output::json(
            meta,
            &json!({ "rows": rows, "summary": { "count": rows.len(), "passed": passed } }),
        )?,
    };
    Ok(Outcome {
        bytes,
        passed: passed == rows.len(),
    })
}

pub fn theorem(p: &TheoremParams, format: Format, meta: &Meta) -> Result<Outcome, CliError> {
    if format == Format::Csv {
        return Err(CliError::Usage(
            "theorem emits a structured report; use --format json".into(),
        ));
    }
    let config = TheoremConfig {
        mu_ladder: p.mu.clone(),
        t_factor: p.t_factor,
        boundary_samples: p.boundary_samples,
        diameter_tol: p.diameter_tol,
        ..TheoremConfig::default()
    };
    config.validate().map_err(usage)?;
    if !(p.d0 > 0.0 && p.d0.is_finite()) {
        return Err(CliError::Usage(format!("D0 = {} must be positive", p.d0)));
    }
    if p.n < 2 {
        return Err(CliError::Usage(format!("n = {} must be at least 2", p.n)));
    }
    let report = run_theorem(p.d0, p.n, &config)?;
    Ok(Outcome {
        passed: report.verdict,
        bytes: output::json(meta, &report)?,
    })
}
