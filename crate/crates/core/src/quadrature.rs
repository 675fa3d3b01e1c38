//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum number of subintervals before giving up.
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` until the summed error estimate drops below `abs_tol`.
///
/// The interval is pre-split into `initial` equal panels; the panel with the
/// largest error is bisected until convergence.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, initial: usize) -> Result<Quadrature> {
    let initial = initial.max(1);
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(4 * initial);
    let w = (b - a) / initial as f64;
    for k in 0..initial {
        let lo = a + w * k as f64;
        let hi = if k + 1 == initial { b } else { lo + w };
        let (v, e) = gk15(&f, lo, hi);
        panels.push((lo, hi, v, e));
    }
    loop {
        let (value, error): (f64, f64) = panels.iter().fold((0.0, 0.0), |(s, e), p| (s + p.2, e + p.3));
        if !value.is_finite() {
            return Err(Error::QuadratureFailure { error_estimate: f64::NAN, intervals: panels.len() });
        }
        if error <= abs_tol {
            return Ok(Quadrature { value, error_estimate: error, intervals: panels.len() });
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure { error_estimate: error, intervals: panels.len() });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one panel");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::QuadratureFailure { error_estimate: error, intervals: panels.len() + 1 });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}
