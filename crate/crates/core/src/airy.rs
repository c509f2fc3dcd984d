//! Airy functions on the real line, the zeros of `Ai`, and the Dirichlet
//! eigenfunctions of `-d²/dx² + x` on the half-line.
//!
//! Evaluation combines three representations so that every point is reached
//! through a numerically stable route:
//!
//! * `|x| <= 2.5`: Maclaurin series of the two standard even/odd solutions.
//! * `|x| >= 9`: asymptotic expansions with optimal (smallest-term) truncation.
//!   At `|x| = 9` the truncation error is around `e^{-36}`.
//! * in between: local Taylor re-expansion of `y'' = x y` in steps of at most
//!   1/2, always marching in the direction in which the solution being
//!   continued is dominant (`Ai` backwards from 9, everything else outwards
//!   from 2.5).
//!
//! Beyond `|x| ≈ 104` the exponentially large/small factors leave the `f64`
//! range: `Bi` saturates to `+inf` and `Ai` underflows to zero.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{range_err, Result};
use crate::quad::{simpson, uniform_grid};

/// Largest |x| accepted by [`eval_airy`].
pub const AIRY_X_LIMIT: f64 = 200.0;

/// `Ai(0)`.
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// `-Ai'(0)`.
pub const AIP0_NEG: f64 = 0.258_819_403_792_806_8;

const SERIES_CUTOFF: f64 = 2.5;
const ASYMPTOTIC_CUTOFF: f64 = 9.0;
const TAYLOR_STEP: f64 = 0.5;

/// Default sample spacing for half-line eigenfunctions.
pub const DEFAULT_SAMPLE_STEP: f64 = 1.0 / 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryValue {
    pub x: f64,
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

impl AiryValue {
    /// `Ai Bi' - Ai' Bi`, identically `1/π`.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Evaluate `Ai`, `Ai'`, `Bi`, `Bi'` at a real point.
pub fn eval_airy(x: f64) -> Result<AiryValue> {
    if !x.is_finite() || x.abs() > AIRY_X_LIMIT {
        return Err(range_err(
            "x",
            x,
            format!("[-{AIRY_X_LIMIT}, {AIRY_X_LIMIT}]"),
        ));
    }
    Ok(eval_unchecked(x))
}

fn eval_unchecked(x: f64) -> AiryValue {
    if x.abs() <= SERIES_CUTOFF {
        return maclaurin(x);
    }
    if x >= ASYMPTOTIC_CUTOFF {
        let (ai, aip) = asymptotic_ai_positive(x);
        let (bi, bip) = asymptotic_bi_positive(x);
        return AiryValue {
            x,
            ai,
            ai_prime: aip,
            bi,
            bi_prime: bip,
        };
    }
    if x <= -ASYMPTOTIC_CUTOFF {
        return asymptotic_negative(-x);
    }
    if x < 0.0 {
        // oscillatory side: both solutions are neutral, march outwards
        let start = maclaurin(-SERIES_CUTOFF);
        let [(ai, aip), (bi, bip)] = march(
            -SERIES_CUTOFF,
            x,
            [(start.ai, start.ai_prime), (start.bi, start.bi_prime)],
        );
        return AiryValue {
            x,
            ai,
            ai_prime: aip,
            bi,
            bi_prime: bip,
        };
    }
    // 2.5 < x < 9: Bi grows (march right), Ai decays (march left from 9)
    let start = maclaurin(SERIES_CUTOFF);
    let [(bi, bip)] = march(SERIES_CUTOFF, x, [(start.bi, start.bi_prime)]);
    let anchor = asymptotic_ai_positive(ASYMPTOTIC_CUTOFF);
    let [(ai, aip)] = march(ASYMPTOTIC_CUTOFF, x, [anchor]);
    AiryValue {
        x,
        ai,
        ai_prime: aip,
        bi,
        bi_prime: bip,
    }
}

fn maclaurin(x: f64) -> AiryValue {
    let x3 = x * x * x;
    // f = 1 + x^3/3! + 1·4 x^6/6! + ..., g = x + 2 x^4/4! + ...
    let mut f = 1.0;
    let mut fp = 0.0;
    let mut g = x;
    let mut gp = 1.0;
    let mut tf = 1.0;
    let mut tfp = x * x / 2.0;
    let mut tg = x;
    let mut tgp = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        if k > 1 {
            tfp *= x3 / ((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
        }
        tgp *= x3 / ((3.0 * kf) * (3.0 * kf - 2.0));
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
        let scale = f.abs() + g.abs() + fp.abs() + gp.abs();
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-18 * scale {
            break;
        }
    }
    let sqrt3 = 3f64.sqrt();
    AiryValue {
        x,
        ai: AI0 * f - AIP0_NEG * g,
        ai_prime: AI0 * fp - AIP0_NEG * gp,
        bi: sqrt3 * (AI0 * f + AIP0_NEG * g),
        bi_prime: sqrt3 * (AI0 * fp + AIP0_NEG * gp),
    }
}

/// One Taylor re-expansion of `y'' = x y` about `x0`, evaluated at `x0 + h`.
fn taylor_step(x0: f64, h: f64, y: f64, yp: f64) -> (f64, f64) {
    // c_{n+2} (n+2)(n+1) = x0 c_n + c_{n-1}
    let mut c_nm1 = y; // c_0
    let mut c_n = yp; // c_1
    let c2 = 0.5 * x0 * y;
    let mut val = y + yp * h;
    let mut der = yp;
    // carry c_{n-1}, c_n, c_{n+1}
    let mut c_np1 = c2;
    let mut hp = h; // h^{n}, n = 1
    let mut n = 1usize;
    loop {
        // add term n+1
        let hn1 = hp * h;
        val += c_np1 * hn1;
        der += (n as f64 + 1.0) * c_np1 * hp;
        let next = (x0 * c_n + c_nm1) / ((n as f64 + 2.0) * (n as f64 + 1.0));
        c_nm1 = c_n;
        c_n = c_np1;
        c_np1 = next;
        hp = hn1;
        n += 1;
        let tail = (c_np1 * hp * h).abs() + (c_n * hp).abs();
        if n > 4 && tail <= 1e-18 * (val.abs() + der.abs()) || n > 120 {
            break;
        }
    }
    (val, der)
}

fn march<const N: usize>(from: f64, to: f64, mut state: [(f64, f64); N]) -> [(f64, f64); N] {
    let span = to - from;
    if span == 0.0 {
        return state;
    }
    let steps = (span.abs() / TAYLOR_STEP).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    for i in 0..steps {
        let x0 = from + i as f64 * h;
        for s in state.iter_mut() {
            *s = taylor_step(x0, h, s.0, s.1);
        }
    }
    state
}

/// Coefficients `u_k` of the Airy asymptotic expansions.
fn u_coeffs(n: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(n);
    u.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let prev = u[k - 1];
        u.push(
            prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf),
        );
    }
    u
}

/// `sum_k sign^k c_k / zeta^k` truncated at the smallest term.
fn asymptotic_sum(coeffs: &[f64], zeta: f64, alternating: bool) -> f64 {
    let mut sum = 0.0;
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for (k, c) in coeffs.iter().enumerate() {
        let term = c / zk;
        if term.abs() > last {
            break;
        }
        let signed = if alternating && k % 2 == 1 { -term } else { term };
        sum += signed;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
        zk *= zeta;
    }
    sum
}

const N_ASYMPTOTIC: usize = 60;

fn v_from_u(u: &[f64]) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(k, uk)| {
            let kf = k as f64;
            -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk
        })
        .collect()
}

fn asymptotic_ai_positive(x: f64) -> (f64, f64) {
    let u = u_coeffs(N_ASYMPTOTIC);
    let v = v_from_u(&u);
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let x14 = x.powf(0.25);
    let e = (-zeta).exp();
    let ai = e / (2.0 * PI.sqrt() * x14) * asymptotic_sum(&u, zeta, true);
    let aip = -x14 * e / (2.0 * PI.sqrt()) * asymptotic_sum(&v, zeta, true);
    (ai, aip)
}

fn asymptotic_bi_positive(x: f64) -> (f64, f64) {
    let u = u_coeffs(N_ASYMPTOTIC);
    let v = v_from_u(&u);
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let x14 = x.powf(0.25);
    let e = zeta.exp();
    let bi = e / (PI.sqrt() * x14) * asymptotic_sum(&u, zeta, false);
    let bip = x14 * e / PI.sqrt() * asymptotic_sum(&v, zeta, false);
    (bi, bip)
}

/// Even/odd split of an asymptotic series in `1/zeta`, with alternating
/// signs inside each half: returns `(sum (-1)^k c_{2k}/zeta^{2k},
/// sum (-1)^k c_{2k+1}/zeta^{2k+1})`.
fn split_sums(c: &[f64], zeta: f64) -> (f64, f64) {
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for (k, ck) in c.iter().enumerate() {
        let term = ck / zk;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * term;
        } else {
            odd += sign * term;
        }
        if last < 1e-17 {
            break;
        }
        zk *= zeta;
    }
    (even, odd)
}

fn asymptotic_negative(z: f64) -> AiryValue {
    let u = u_coeffs(N_ASYMPTOTIC);
    let v = v_from_u(&u);
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let z14 = z.powf(0.25);
    let phase = zeta - PI / 4.0;
    let (s, c) = phase.sin_cos();
    let (ue, uo) = split_sums(&u, zeta);
    let (ve, vo) = split_sums(&v, zeta);
    let pre = 1.0 / (PI.sqrt() * z14);
    let pre_d = z14 / PI.sqrt();
    AiryValue {
        x: -z,
        ai: pre * (c * ue + s * uo),
        ai_prime: pre_d * (s * ve - c * vo),
        bi: pre * (-s * ue + c * uo),
        bi_prime: pre_d * (c * ve + s * vo),
    }
}

/// `Ai(x)` alone, for callers that only need the decaying solution.
pub fn ai(x: f64) -> Result<f64> {
    eval_airy(x).map(|v| v.ai)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AiryZeros {
    /// `a_1 < a_2 < ...`; `-a_k` are the zeros of `Ai`.
    pub a: Vec<f64>,
}

impl AiryZeros {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `a_k`, one-based.
    pub fn get(&self, k: usize) -> f64 {
        self.a[k - 1]
    }
}

pub const MAX_ZEROS: usize = 50;

/// First `count` zeros of `Ai`, returned as positive numbers `a_k`.
///
/// Sign changes are located by scanning `[-(count+2)·3, 0]` in steps no wider
/// than a quarter of the local zero spacing `π/√|x|` (capped at 1), then each
/// bracket is bisected down to adjacent floating point numbers.
pub fn airy_zeros(count: usize) -> Result<AiryZeros> {
    if !(1..=MAX_ZEROS).contains(&count) {
        return Err(range_err(
            "K",
            count as f64,
            format!("[1, {MAX_ZEROS}]"),
        ));
    }
    let limit = -((count + 2) as f64) * 3.0;
    let mut zeros = Vec::with_capacity(count);
    let mut x_hi = 0.0;
    let mut f_hi = eval_unchecked(x_hi).ai;
    while zeros.len() < count && x_hi > limit {
        let width = (0.25 * PI / x_hi.abs().max(1.0).sqrt()).min(1.0);
        let x_lo = (x_hi - width).max(limit);
        let f_lo = eval_unchecked(x_lo).ai;
        if f_lo == 0.0 {
            zeros.push(-x_lo);
        } else if f_lo.signum() != f_hi.signum() && f_hi != 0.0 {
            zeros.push(-bisect_ai(x_lo, x_hi, f_lo));
        }
        x_hi = x_lo;
        f_hi = f_lo;
    }
    debug_assert_eq!(zeros.len(), count);
    Ok(AiryZeros { a: zeros })
}

fn bisect_ai(mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let s_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-15 {
            break;
        }
        let fm = eval_unchecked(mid).ai;
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `v_k(x) = Ai(x - a_k) / ||Ai(· - a_k)||_{L²(0,∞)}` sampled on `[0, X_max]`.
#[derive(Debug, Clone, Serialize)]
pub struct HalfLineEigenfunction {
    pub k: usize,
    /// `a_k`, the Dirichlet eigenvalue on the half-line.
    pub eigenvalue: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub norm_constant: f64,
}

impl HalfLineEigenfunction {
    /// Evaluate `v_k` at an arbitrary point of `[0, ∞)` (clamped to the
    /// admissible Airy range).
    pub fn eval(&self, x: f64) -> f64 {
        let arg = (x - self.eigenvalue).min(AIRY_X_LIMIT);
        eval_unchecked(arg).ai / self.norm_constant
    }

    pub fn step(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// `∫_0^{X_max} v_k²`.
    pub fn mass(&self) -> f64 {
        let sq: Vec<f64> = self.v.iter().map(|v| v * v).collect();
        simpson(&sq, self.step())
    }

    /// `∫_0^{X_max} x v_k²`, the Hellmann-Feynman moment (→ 2 a_k / 3).
    pub fn first_moment(&self) -> f64 {
        let w: Vec<f64> = self.x.iter().zip(&self.v).map(|(x, v)| x * v * v).collect();
        simpson(&w, self.step())
    }

    /// Number of sign changes strictly inside `(0, X_max)`.
    pub fn interior_sign_changes(&self) -> usize {
        count_sign_changes(&self.v)
    }
}

pub(crate) fn count_sign_changes(ys: &[f64]) -> usize {
    let n = ys.len();
    if n < 3 {
        return 0;
    }
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let floor = 1e-12 * scale;
    let mut count = 0;
    let mut last = 0.0f64;
    for &y in &ys[1..n - 1] {
        if y.abs() <= floor {
            continue;
        }
        if last != 0.0 && y.signum() != last.signum() {
            count += 1;
        }
        last = y;
    }
    count
}

/// `||Ai(· - a_k)||_{L²(0,∞)}` from `∫_{-a}^∞ Ai² = Ai'(-a)²`, valid at zeros.
pub fn norm_constant_closed_form(a_k: f64) -> f64 {
    eval_unchecked(-a_k).ai_prime.abs()
}

pub fn half_line_eigenfunction(k: usize, x_max: f64) -> Result<HalfLineEigenfunction> {
    half_line_eigenfunction_with_step(k, x_max, DEFAULT_SAMPLE_STEP)
}

pub fn half_line_eigenfunction_with_step(
    k: usize,
    x_max: f64,
    step: f64,
) -> Result<HalfLineEigenfunction> {
    if k == 0 || k > MAX_ZEROS {
        return Err(range_err("k", k as f64, format!("[1, {MAX_ZEROS}]")));
    }
    let zeros = airy_zeros(k)?;
    let a_k = zeros.get(k);
    eigenfunction_from_zero(k, a_k, x_max, step)
}

pub(crate) fn eigenfunction_from_zero(
    k: usize,
    a_k: f64,
    x_max: f64,
    step: f64,
) -> Result<HalfLineEigenfunction> {
    let min = a_k + 10.0;
    if !(x_max.is_finite() && x_max >= min && x_max - a_k <= AIRY_X_LIMIT) {
        return Err(range_err(
            "X_max",
            x_max,
            format!("[a_{k} + 10, a_{k} + {AIRY_X_LIMIT}] = [{min}, {}]", a_k + AIRY_X_LIMIT),
        ));
    }
    if !(step > 0.0 && step <= 0.25) {
        return Err(range_err("step", step, "(0, 0.25]"));
    }
    let n = ((x_max / step).round() as usize).max(2) + 1;
    let xs = uniform_grid(0.0, x_max, n);
    let norm = norm_constant_closed_form(a_k);
    let mut v: Vec<f64> = xs.iter().map(|x| eval_unchecked(x - a_k).ai / norm).collect();
    v[0] = 0.0;
    Ok(HalfLineEigenfunction {
        k,
        eigenvalue: a_k,
        x: xs,
        v,
        norm_constant: norm,
    })
}

/// `∫_0^{X_max} x (v_hi² - v_lo²) dx` for two half-line eigenfunctions.
pub fn model_integral_pair(lo: usize, hi: usize, x_max: f64) -> Result<f64> {
    let top = lo.max(hi);
    if lo == 0 || top > MAX_ZEROS {
        return Err(range_err("k", top as f64, format!("[1, {MAX_ZEROS}]")));
    }
    let zeros = airy_zeros(top)?;
    let min = zeros.get(top) + 30.0;
    if x_max < min {
        return Err(range_err("X_max", x_max, format!("[a_{top} + 30 = {min}, ∞)")));
    }
    let v_lo = eigenfunction_from_zero(lo, zeros.get(lo), x_max, DEFAULT_SAMPLE_STEP)?;
    let v_hi = eigenfunction_from_zero(hi, zeros.get(hi), x_max, DEFAULT_SAMPLE_STEP)?;
    let integrand: Vec<f64> = v_lo
        .x
        .iter()
        .zip(v_lo.v.iter().zip(&v_hi.v))
        .map(|(x, (a, b))| x * (b * b - a * a))
        .collect();
    Ok(simpson(&integrand, v_lo.step()))
}

/// `∫_0^{X_max} x (v_2² - v_1²) dx`, which equals `2/3 (a_2 - a_1)`.
pub fn model_integral(x_max: f64) -> Result<f64> {
    model_integral_pair(1, 2, x_max)
}

/// Sample `(x, Ai, Ai', Bi, Bi')` on `[x_min, x_max]` with the given step.
pub fn airy_table(x_min: f64, x_max: f64, step: f64) -> Result<Vec<AiryValue>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(range_err("step", step, "(0, ∞)"));
    }
    if !(x_min <= x_max) {
        return Err(range_err("x_min", x_min, format!("(-∞, x_max = {x_max}]")));
    }
    let n = ((x_max - x_min) / step + 1e-9).floor() as usize + 1;
    (0..n)
        .map(|i| eval_airy(x_min + i as f64 * step))
        .collect()
}
