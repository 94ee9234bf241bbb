//! Adaptive Dormand–Prince 5(4) integration for small real systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Components with index `>= joint_from` share one error scale, the largest of their
    /// magnitudes. Suits oscillating real/imaginary pairs.
    pub joint_from: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, h_init: 1e-3, h_max: f64::INFINITY, max_steps: 5_000_000, joint_from: usize::MAX }
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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` through every point of `targets` (monotone in the
/// direction of integration) and returns the state at each target.
pub fn integrate<const N: usize, F>(
    f: F,
    x0: f64,
    y0: [f64; N],
    targets: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(targets.len());
    let mut x = x0;
    let mut y = y0;
    let mut h = opts.h_init.abs();
    let mut k1 = f(x, &y);
    let mut steps = 0usize;
    let mut err_prev = 1e-4f64;
    for &target in targets {
        let dir = if target >= x { 1.0 } else { -1.0 };
        loop {
            let remaining = (target - x) * dir;
            if remaining <= 1e-14 * (1.0 + target.abs()) {
                break;
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepFailure { at: x, reason: "step budget exhausted".into() });
            }
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            let hs = h * dir;
            let k2 = f(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
            let k3 = f(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(x + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                x + hs,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let x_new = if last { target } else { x + hs };
            let k7 = f(x_new, &y_new);
            let mut joint = 0.0f64;
            for i in opts.joint_from.min(N)..N {
                joint = joint.max(y[i].abs()).max(y_new[i].abs());
            }
            let mut err = 0.0f64;
            for i in 0..N {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let mag = if i >= opts.joint_from { joint } else { y[i].abs().max(y_new[i].abs()) };
                let sc = opts.atol + opts.rtol * mag;
                err += (e / sc).powi(2);
            }
            err = (err / N as f64).sqrt();
            if !err.is_finite() {
                h *= 0.2;
                if h < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::StepFailure { at: x, reason: "non-finite state".into() });
                }
                continue;
            }
            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                err_prev = err.max(1e-4);
                let grown = h * fac.clamp(0.2, 5.0);
                if !last {
                    h = grown;
                } else {
                    h = h.max(grown);
                }
                h = h.min(opts.h_max);
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::StepFailure { at: x, reason: "step size underflow".into() });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
