//! Dormand–Prince 5(4) for small complex linear systems with renormalization.

use crate::error::{Error, Result};
use num_complex::Complex64;

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

pub const RTOL: f64 = 1e-10;
const ATOL_REL: f64 = 1e-12;
const MAX_STEPS: usize = 2_000_000;
/// Renormalization window for the solution norm.
const NORM_WINDOW: (f64, f64) = (1e-3, 1e3);
/// A drop of the norm by more than this factor in a single step signals lost digits.
const COLLAPSE: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
pub struct Solution<const N: usize> {
    pub y: [Complex64; N],
    /// `log` of the factor removed by renormalization: true solution is `y·exp(log_scale)`.
    pub log_scale: f64,
    pub steps: usize,
}

fn norm<const N: usize>(y: &[Complex64; N]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy<const N: usize>(y: &[Complex64; N], terms: &[(f64, &[Complex64; N])], h: f64) -> [Complex64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `f` must be linear in `y`, so rescaling the state is harmless; the
/// removed factors are accumulated in `log_scale`.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    t0: f64,
    t1: f64,
    y0: [Complex64; N],
    h_init: f64,
    h_max: f64,
) -> Result<Solution<N>> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut log_scale = 0.0;
    let n0 = norm(&y);
    if n0 == 0.0 || !n0.is_finite() {
        return Err(Error::SolverFailure("zero or non-finite initial state".into()));
    }
    let mut h = h_init.min(span).max(1e-12);
    let mut k1 = f(t, &y);
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        if steps >= MAX_STEPS {
            return Err(Error::StiffnessFailure { xi: t });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let hh = if last { remaining } else { h };
        let hs = hh * dir;
        let k2 = f(t + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
        let k3 = f(t + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
        let k4 = f(t + C4 * hs, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs));
        let k5 = f(t + C5 * hs, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs));
        let k6 = f(t + hs, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hs));
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hs);
        let k7 = f(t + hs, &y_new);
        let scale = ATOL_REL * norm(&y).max(norm(&y_new)) / RTOL;
        let mut err = 0.0f64;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            let sc = RTOL * (y[i].norm().max(y_new[i].norm()) + scale);
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < 1e-14 * span.max(1.0) {
                return Err(Error::StiffnessFailure { xi: t });
            }
            continue;
        }
        if err <= 1.0 {
            let before = norm(&y);
            t = if last { t1 } else { t + hs };
            y = y_new;
            k1 = k7;
            steps += 1;
            let after = norm(&y);
            if after < COLLAPSE * before {
                return Err(Error::PrecisionLoss { xi: t });
            }
            if !(NORM_WINDOW.0..=NORM_WINDOW.1).contains(&after) {
                log_scale += after.ln();
                let inv = 1.0 / after;
                for z in y.iter_mut() {
                    *z *= inv;
                }
                for z in k1.iter_mut() {
                    *z *= inv;
                }
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (hh * factor).min(h_max);
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::StiffnessFailure { xi: t });
        }
    }
    Ok(Solution { y, log_scale, steps })
}
