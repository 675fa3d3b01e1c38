//! Branch roots `√γ·v = ½J(v)` and saddle-node folds of heteroclinic orbits.

use crate::error::{Error, Result};
use crate::fast_field::{jump_integral_derivative, jump_integral_j};
use crate::model::{ModelParams, ReactionSpec, Regime, V_FLOOR};
use rayon::prelude::*;
use serde::Serialize;

pub const SCAN_STEP: f64 = 1e-3;
pub const DEFAULT_V_MAX: f64 = 50.0;
const ROOT_TOL: f64 = 1e-10;
const TRANSVERSAL_TOL: f64 = 1e-6;
const FOLD_SCAN_STEP: f64 = 1e-2;

/// One front on a super-slow branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub gamma: f64,
    pub v0: f64,
    /// 1-based, ordered by `v0`.
    pub branch_index: usize,
    pub transversal: bool,
    pub residual: f64,
}

/// Saddle-node of heteroclinic orbits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldPoint {
    pub gamma_double: f64,
    pub v_fold: f64,
    pub contact_order: u32,
}

/// `g(v) = √γ·v − ½J(v)`.
pub fn existence_function(v: f64, gamma: f64, spec: &ReactionSpec) -> Result<f64> {
    Ok(gamma.sqrt() * v - 0.5 * jump_integral_j(v, spec)?.value)
}

/// `g'(v) = √γ − ½J'(v)`.
pub fn existence_derivative(v: f64, gamma: f64, spec: &ReactionSpec) -> Result<f64> {
    Ok(gamma.sqrt() - 0.5 * jump_integral_derivative(v, spec)?)
}

/// Amplitude `ε·½J(0)/√(−G1)` of the slow component of the regular front.
pub fn regular_front_v_peak(params: &ModelParams, spec: &ReactionSpec) -> Result<f64> {
    let g1 = match params.regime {
        Regime::Regular { g1 } => g1,
        Regime::SuperSlow { .. } => {
            return Err(Error::Regime("regular front amplitude needs the regular regime".into()))
        }
    };
    if !(g1 < 0.0) {
        return Err(Error::Regime(format!("G1 = {g1} must be negative")));
    }
    let eps2 = params.epsilon * params.epsilon;
    if -g1 < 10.0 * eps2 {
        return Err(Error::Regime(format!("|G1| = {} is not of order one (< 10 eps^2)", -g1)));
    }
    Ok(params.epsilon * 0.5 * jump_integral_j(0.0, spec)?.value / (-g1).sqrt())
}

/// Sign-change scan on `[lo, hi]` followed by bisection; returns bracketing pairs.
pub(crate) fn scan_brackets(
    f: impl Fn(f64) -> Result<f64> + Sync,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Vec<(f64, f64, f64, f64)>> {
    let n = ((hi - lo) / step).ceil() as usize;
    let xs: Vec<f64> = (0..=n).map(|k| (lo + step * k as f64).min(hi)).collect();
    let vals: Vec<f64> = xs.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..n {
        let (a, b) = (vals[k], vals[k + 1]);
        if a == 0.0 || a * b < 0.0 {
            out.push((xs[k], a, xs[k + 1], b));
        }
    }
    if vals[n] == 0.0 {
        out.push((xs[n], 0.0, xs[n], 0.0));
    }
    Ok(out)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut fa: f64, mut b: f64, tol: f64) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm.abs() < tol || (b - a) < 4.0 * f64::EPSILON * m.abs().max(1.0) {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// All roots of `g` on `(−0.9, v_max]`.
pub fn find_branches(params: &ModelParams, spec: &ReactionSpec, v_max: f64) -> Result<Vec<BranchPoint>> {
    let gamma = match params.regime {
        Regime::SuperSlow { gamma } if gamma > 0.0 => gamma,
        _ => return Err(Error::Regime("branch search needs the super-slow regime with gamma > 0".into())),
    };
    if !(v_max > 0.0 && v_max <= DEFAULT_V_MAX) {
        return Err(Error::InvalidParameter(format!("v_max = {v_max} outside (0, {DEFAULT_V_MAX}]")));
    }
    let g = |v: f64| existence_function(v, gamma, spec);
    let brackets = scan_brackets(g, V_FLOOR, v_max, SCAN_STEP)?;
    let mut roots = Vec::with_capacity(brackets.len());
    for (a, fa, b, _) in brackets {
        let mut v = bisect(&g, a, fa, b, ROOT_TOL)?;
        let mut gv = g(v)?;
        for _ in 0..4 {
            let dg = existence_derivative(v, gamma, spec)?;
            if dg == 0.0 {
                break;
            }
            let cand = v - gv / dg;
            if !(cand >= a && cand <= b) {
                break;
            }
            let gc = g(cand)?;
            if gc.abs() >= gv.abs() {
                break;
            }
            v = cand;
            gv = gc;
        }
        let dg = existence_derivative(v, gamma, spec)?;
        roots.push(BranchPoint {
            gamma,
            v0: v,
            branch_index: 0,
            transversal: dg.abs() > TRANSVERSAL_TOL,
            residual: gv.abs(),
        });
    }
    roots.sort_by(|a, b| a.v0.total_cmp(&b.v0));
    roots.dedup_by(|a, b| (a.v0 - b.v0).abs() < 1e-9);
    for (i, r) in roots.iter_mut().enumerate() {
        r.branch_index = i + 1;
    }
    Ok(roots)
}

/// `φ(v) = v·J'(v) − J(v)`; folds are its roots with `J'(v) > 0`.
fn tangency(v: f64, spec: &ReactionSpec) -> Result<f64> {
    Ok(v * jump_integral_derivative(v, spec)? - jump_integral_j(v, spec)?.value)
}

fn second_derivative_j(v: f64, spec: &ReactionSpec) -> Result<f64> {
    let h = 1e-4 * (1.0 + v.abs());
    Ok((jump_integral_derivative(v + h, spec)? - jump_integral_derivative(v - h, spec)?) / (2.0 * h))
}

/// Solves `{g = 0, g' = 0}` for `(γ, v)`; the first fold in the window is returned.
pub fn find_fold(spec: &ReactionSpec, v_window: (f64, f64)) -> Result<FoldPoint> {
    let (lo, hi) = v_window;
    let lo = lo.max(V_FLOOR);
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty fold window [{lo}, {hi}]")));
    }
    let phi = |v: f64| tangency(v, spec);
    for (a, fa, b, _) in scan_brackets(phi, lo, hi, FOLD_SCAN_STEP)? {
        let seed = bisect(&phi, a, fa, b, 1e-8)?;
        if jump_integral_derivative(seed, spec)? <= 0.0 {
            continue;
        }
        if let Some(fold) = newton_fold(spec, seed)? {
            return Ok(fold);
        }
    }
    Err(Error::NoFoldFound { lo, hi })
}

/// Damped Newton on `F1 = s·v − ½J(v)`, `F2 = s − ½J'(v)` with `s = √γ`.
pub(crate) fn newton_fold(spec: &ReactionSpec, v_seed: f64) -> Result<Option<FoldPoint>> {
    let residual = |s: f64, v: f64| -> Result<(f64, f64)> {
        Ok((s * v - 0.5 * jump_integral_j(v, spec)?.value, s - 0.5 * jump_integral_derivative(v, spec)?))
    };
    let mut v = v_seed;
    let mut s = 0.5 * jump_integral_derivative(v, spec)?;
    let (mut f1, mut f2) = residual(s, v)?;
    for _ in 0..50 {
        if f1.abs().max(f2.abs()) < 1e-12 {
            break;
        }
        let jpp = second_derivative_j(v, spec)?;
        // Jacobian [[v, s − ½J'], [1, −½J'']]
        let (a, b, c, d) = (v, s - 0.5 * jump_integral_derivative(v, spec)?, 1.0, -0.5 * jpp);
        let det = a * d - b * c;
        if det == 0.0 {
            return Ok(None);
        }
        let ds = (d * f1 - b * f2) / det;
        let dv = (-c * f1 + a * f2) / det;
        let norm0 = f1.abs().max(f2.abs());
        let mut t = 1.0;
        loop {
            let (sn, vn) = (s - t * ds, v - t * dv);
            if vn > -1.0 {
                let (g1, g2) = residual(sn, vn)?;
                if g1.abs().max(g2.abs()) < norm0 || t < 1e-3 {
                    s = sn;
                    v = vn;
                    f1 = g1;
                    f2 = g2;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-3 {
                return Ok(None);
            }
        }
    }
    if f1.abs().max(f2.abs()) > 1e-9 || s <= 0.0 {
        return Ok(None);
    }
    let contact_order = if second_derivative_j(v, spec)?.abs() > 1e-6 { 2 } else { 3 };
    Ok(Some(FoldPoint { gamma_double: s * s, v_fold: v, contact_order }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearG, PowerH};

    fn quad(h0: f64) -> ReactionSpec {
        ReactionSpec::new(PowerH::new(h0, 1).unwrap(), LinearG::new(0.0))
    }

    #[test]
    fn v_peak_examples() {
        let p = ModelParams::regular(0.1, 1.0, -1.0).unwrap();
        let v = regular_front_v_peak(&p, &quad(1.0)).unwrap();
        assert!((v - 0.1 * 2f64.sqrt() / 3.0).abs() < 1e-10);
        let c = ReactionSpec::new(PowerH::new(1.0, 0).unwrap(), LinearG::new(-1.0));
        assert!((regular_front_v_peak(&p, &c).unwrap() - 0.1 * 2f64.sqrt()).abs() < 1e-10);
        assert_eq!(regular_front_v_peak(&p, &quad(0.0)).unwrap(), 0.0);
        let tiny = ModelParams::regular(0.1, 1.0, -0.05).unwrap();
        assert!(matches!(regular_front_v_peak(&tiny, &quad(1.0)), Err(Error::Regime(_))));
    }

    #[test]
    fn constant_h_has_no_fold() {
        let c = ReactionSpec::new(PowerH::new(1.0, 0).unwrap(), LinearG::new(0.0));
        assert!(matches!(find_fold(&c, (-0.9, 50.0)), Err(Error::NoFoldFound { .. })));
    }

    #[test]
    fn negative_h0_has_no_fold() {
        assert!(matches!(find_fold(&quad(-1.0), (-0.9, 50.0)), Err(Error::NoFoldFound { .. })));
    }
}
