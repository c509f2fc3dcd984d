//! Quadrature and grid helpers shared by every module.
//!
//! All sampled functions in the crate live on uniform grids, so composite
//! Simpson (with a 3/8 closing panel for an odd interval count) is all we need.

use crate::error::{Error, Result};

/// `n` equally spaced points covering `[a, b]`, both endpoints included.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two points");
    let h = (b - a) / (n - 1) as f64;
    let mut xs: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
    // pin the right endpoint exactly
    xs[n - 1] = b;
    xs
}

/// Composite Simpson on equally spaced samples with spacing `h`.
///
/// Falls back to the trapezoid rule for two points and closes with Simpson's
/// 3/8 panel when the number of intervals is odd. Error is O(h^4) for smooth
/// integrands.
pub fn simpson(ys: &[f64], h: f64) -> f64 {
    let n = ys.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (ys[0] + ys[1]),
        3 => h / 3.0 * (ys[0] + 4.0 * ys[1] + ys[2]),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals % 2 == 0 {
                (n - 1, false)
            } else {
                (n - 4, true)
            };
            let mut total = 0.0;
            if even_end > 0 {
                let mut s = ys[0] + ys[even_end];
                for (i, y) in ys.iter().enumerate().take(even_end).skip(1) {
                    s += if i % 2 == 1 { 4.0 * y } else { 2.0 * y };
                }
                total = h / 3.0 * s;
            }
            if tail {
                let j = even_end;
                total += 3.0 * h / 8.0 * (ys[j] + 3.0 * ys[j + 1] + 3.0 * ys[j + 2] + ys[j + 3]);
            }
            total
        }
    }
}

/// Spacing of a uniform grid, checking that it really is uniform.
pub fn uniform_step(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::Shape(format!(
            "grid needs at least 2 points, got {}",
            xs.len()
        )));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let tol = 1e-9 * h.abs().max(f64::MIN_POSITIVE) + 1e-12 * xs[0].abs().max(xs[xs.len() - 1].abs());
    for w in xs.windows(2) {
        if ((w[1] - w[0]) - h).abs() > tol.max(1e-6 * h.abs()) {
            return Err(Error::Shape("grid is not uniform".into()));
        }
    }
    Ok(h)
}

/// Simpson integral of samples over a uniform grid.
pub fn integrate_samples(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "{} abscissae vs {} samples",
            xs.len(),
            ys.len()
        )));
    }
    let h = uniform_step(xs)?;
    Ok(simpson(ys, h))
}

/// A function sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Sampled {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Sampled {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "{} abscissae vs {} samples",
                x.len(),
                y.len()
            )));
        }
        Ok(Sampled { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// True when both functions live on the same abscissae.
    pub fn same_grid(&self, other: &Sampled) -> bool {
        self.x.len() == other.x.len()
            && self
                .x
                .iter()
                .zip(&other.x)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    }
}

/// First derivative of uniform samples, fourth order everywhere (one-sided
/// stencils at the two points nearest each end).
pub fn derivative4(ys: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = ys.len();
    if n < 6 {
        return Err(Error::Shape(format!("4th-order stencils need 6 points, got {n}")));
    }
    let d = |i: usize| -> f64 {
        if i >= 2 && i + 2 < n {
            ys[i - 2] - 8.0 * ys[i - 1] + 8.0 * ys[i + 1] - ys[i + 2]
        } else if i == 0 {
            -25.0 * ys[0] + 48.0 * ys[1] - 36.0 * ys[2] + 16.0 * ys[3] - 3.0 * ys[4]
        } else if i == 1 {
            -3.0 * ys[0] - 10.0 * ys[1] + 18.0 * ys[2] - 6.0 * ys[3] + ys[4]
        } else if i == n - 2 {
            3.0 * ys[n - 1] + 10.0 * ys[n - 2] - 18.0 * ys[n - 3] + 6.0 * ys[n - 4] - ys[n - 5]
        } else {
            25.0 * ys[n - 1] - 48.0 * ys[n - 2] + 36.0 * ys[n - 3] - 16.0 * ys[n - 4] + 3.0 * ys[n - 5]
        }
    };
    Ok((0..n).map(|i| d(i) / (12.0 * h)).collect())
}

/// Second derivative of uniform samples, fourth order everywhere.
pub fn second_derivative4(ys: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = ys.len();
    if n < 6 {
        return Err(Error::Shape(format!("4th-order stencils need 6 points, got {n}")));
    }
    const EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
    const EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
    let d = |i: usize| -> f64 {
        if i >= 2 && i + 2 < n {
            -ys[i - 2] + 16.0 * ys[i - 1] - 30.0 * ys[i] + 16.0 * ys[i + 1] - ys[i + 2]
        } else if i < 2 {
            let c = if i == 0 { EDGE0 } else { EDGE1 };
            (0..6).map(|j| c[j] * ys[j]).sum()
        } else {
            let c = if i == n - 1 { EDGE0 } else { EDGE1 };
            (0..6).map(|j| c[j] * ys[n - 1 - j]).sum()
        }
    };
    Ok((0..n).map(|i| d(i) / (12.0 * h * h)).collect())
}

/// Composite Gauss-Legendre (5 nodes per panel) for a callable on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics_on_any_point_count() {
        for n in 2..12 {
            let xs = uniform_grid(0.0, 2.0, n);
            let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x + 1.0).collect();
            let exact = 4.0 - 2.0 + 2.0;
            let got = integrate_samples(&xs, &ys).unwrap();
            if n == 2 {
                assert!((got - exact).abs() < 5.0);
            } else {
                assert!((got - exact).abs() < 1e-12, "n = {n}: {got}");
            }
        }
    }

    #[test]
    fn simpson_error_is_fourth_order() {
        let err = |n: usize| {
            let xs = uniform_grid(0.0, 1.0, n);
            let ys: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            (integrate_samples(&xs, &ys).unwrap() - (1f64.exp() - 1.0)).abs()
        };
        let ratio = err(33) / err(65);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn mismatched_lengths_are_a_shape_error() {
        let xs = uniform_grid(0.0, 1.0, 5);
        assert!(matches!(
            integrate_samples(&xs, &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn fd_stencils_are_fourth_order() {
        let err = |n: usize| {
            let xs = uniform_grid(0.0, 1.0, n);
            let h = xs[1] - xs[0];
            let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).sin()).collect();
            let d1 = derivative4(&ys, h).unwrap();
            let d2 = second_derivative4(&ys, h).unwrap();
            xs.iter().enumerate().fold((0.0f64, 0.0f64), |(a, b), (i, x)| {
                (
                    a.max((d1[i] - 2.0 * (2.0 * x).cos()).abs()),
                    b.max((d2[i] + 4.0 * (2.0 * x).sin()).abs()),
                )
            })
        };
        let (a1, b1) = err(41);
        let (a2, b2) = err(81);
        assert!(a1 / a2 > 12.0, "{}", a1 / a2);
        assert!(b1 / b2 > 12.0, "{}", b1 / b2);
        assert!(derivative4(&[0.0; 5], 0.1).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_smooth_functions() {
        let v = gauss_legendre(|x| x.sin(), 0.0, std::f64::consts::PI, 8);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
