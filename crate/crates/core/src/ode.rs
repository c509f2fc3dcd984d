//! Dormand-Prince 5(4) with PI-free classic step control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive integrator state that can be carried across consecutive calls
/// (the last accepted step size is reused as the next initial guess).
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub tol: Tolerances,
    pub h: f64,
    pub steps: usize,
    /// Parameter echoed into stall diagnostics.
    pub tag: f64,
}

impl Dopri5 {
    pub fn new(tol: Tolerances, h0: f64) -> Self {
        Dopri5 {
            tol,
            h: h0,
            steps: 0,
            tag: 0.0,
        }
    }

    /// Advance `y` from `x0` to exactly `x1` (`x1 > x0`).
    pub fn integrate<const N: usize, F>(&mut self, f: &F, x0: f64, y: &mut [f64; N], x1: f64) -> Result<()>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut x = x0;
        let span = x1 - x0;
        if span <= 0.0 {
            return Ok(());
        }
        let h_min = 1e-15 * (x0.abs() + x1.abs()).max(span);
        let mut h = self.h.min(span).max(h_min);
        let mut k1 = f(x, y);
        loop {
            if self.steps >= self.tol.max_steps {
                return Err(Error::Stiffness {
                    x,
                    lambda: self.tag,
                    step: h,
                    steps: self.steps,
                });
            }
            let last = x + h >= x1 - 1e-14 * span.max(1e-300);
            if last {
                h = x1 - x;
            }
            let mut tmp = [0.0; N];
            for i in 0..N {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            let k2 = f(x + C2 * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = f(x + C3 * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = f(x + C4 * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = f(x + C5 * h, &tmp);
            for i in 0..N {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let k6 = f(x + h, &tmp);
            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            let k7 = f(x + h, &y_new);
            let mut err = 0.0f64;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            self.steps += 1;
            if !err.is_finite() {
                h *= 0.2;
                if h < h_min {
                    return Err(Error::Stiffness {
                        x,
                        lambda: self.tag,
                        step: h,
                        steps: self.steps,
                    });
                }
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                x = if last { x1 } else { x + h };
                *y = y_new;
                k1 = k7;
                if !last {
                    // keep the carried step independent of the clipped final step
                    self.h = h * factor;
                }
                if last {
                    return Ok(());
                }
                h = (h * factor).min(x1 - x);
            } else {
                h *= factor.min(1.0);
                if h < h_min {
                    return Err(Error::Stiffness {
                        x,
                        lambda: self.tag,
                        step: h,
                        steps: self.steps,
                    });
                }
            }
        }
    }
}
