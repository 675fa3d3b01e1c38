//! Pseudo-arclength continuation of the regular branch as γ decreases.
//!
//! Unknowns are `σ = √γ` and `w = ln(1+v)`, so the branch stays inside
//! `v > −1` and large `v` (constant `H`) is reached in few steps.

use super::roots::{newton_fold, FoldPoint};
use crate::error::{Error, Result};
use crate::fast_field::{jump_integral_derivative, jump_integral_j};
use crate::model::ReactionSpec;
use serde::Serialize;

const MAX_STEPS: usize = 10_000;
const DS_INITIAL: f64 = 0.01;
const DS_MAX: f64 = 0.5;
const DS_MIN: f64 = 1e-10;
const CORRECTOR_TOL: f64 = 1e-11;
const CORRECTOR_ITERS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum DestabilizationType {
    /// The regular branch folds back at a saddle-node of heteroclinic orbits.
    TypeD { fold: FoldPoint },
    /// The regular branch survives down to the smallest γ.
    TypeE,
}

/// A continuation point `(γ, v0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuationPoint {
    pub gamma: f64,
    pub v0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationResult {
    pub kind: DestabilizationType,
    pub path: Vec<ContinuationPoint>,
}

struct Branch<'a> {
    spec: &'a ReactionSpec,
}

impl Branch<'_> {
    fn residual(&self, sigma: f64, w: f64) -> Result<f64> {
        let v = w.exp_m1();
        Ok(sigma * v - 0.5 * jump_integral_j(v, self.spec)?.value)
    }

    /// `(F, ∂F/∂σ, ∂F/∂w)`.
    fn eval(&self, sigma: f64, w: f64) -> Result<(f64, f64, f64)> {
        let v = w.exp_m1();
        let f = sigma * v - 0.5 * jump_integral_j(v, self.spec)?.value;
        let fw = w.exp() * (sigma - 0.5 * jump_integral_derivative(v, self.spec)?);
        Ok((f, v, fw))
    }

    /// Root in `w` at fixed σ, seeded from the small-amplitude guess `½J(0)/σ`.
    fn seed(&self, sigma: f64) -> Result<f64> {
        let guess = 0.5 * jump_integral_j(0.0, self.spec)?.value / sigma;
        let mut w = guess.max(-0.9).ln_1p();
        for _ in 0..100 {
            let (f, _, fw) = self.eval(sigma, w)?;
            if f.abs() < CORRECTOR_TOL {
                return Ok(w);
            }
            if fw == 0.0 {
                break;
            }
            let mut step = f / fw;
            // damp so that the level stays in a sane range
            step = step.clamp(-1.0, 1.0);
            let mut t = 1.0;
            loop {
                let wn = w - t * step;
                if self.residual(sigma, wn)?.abs() < f.abs() {
                    w = wn;
                    break;
                }
                t *= 0.5;
                if t < 1e-6 {
                    return Err(Error::NoConvergence { iterations: 100, residual: f.abs() });
                }
            }
        }
        let r = self.residual(sigma, w)?;
        if r.abs() < 1e-9 {
            Ok(w)
        } else {
            Err(Error::NoConvergence { iterations: 100, residual: r.abs() })
        }
    }

    fn tangent(&self, sigma: f64, w: f64, prev: Option<(f64, f64)>) -> Result<(f64, f64)> {
        let (_, fs, fw) = self.eval(sigma, w)?;
        let n = fs.hypot(fw);
        let mut t = (-fw / n, fs / n);
        match prev {
            Some((ps, pw)) => {
                if t.0 * ps + t.1 * pw < 0.0 {
                    t = (-t.0, -t.1);
                }
            }
            None => {
                if t.0 > 0.0 {
                    t = (-t.0, -t.1);
                }
            }
        }
        Ok(t)
    }

    /// Newton on `{F = 0, t·(x − x_pred) = 0}`.
    fn correct(&self, pred: (f64, f64), t: (f64, f64)) -> Result<Option<((f64, f64), usize)>> {
        let (mut s, mut w) = pred;
        for it in 0..CORRECTOR_ITERS {
            if !(w.is_finite() && w < 40.0) {
                return Ok(None);
            }
            let (f, fs, fw) = self.eval(s, w)?;
            let g = t.0 * (s - pred.0) + t.1 * (w - pred.1);
            if f.abs() < CORRECTOR_TOL && g.abs() < CORRECTOR_TOL {
                return Ok(Some(((s, w), it)));
            }
            let det = fs * t.1 - fw * t.0;
            if det == 0.0 || !det.is_finite() {
                return Ok(None);
            }
            let ds = (f * t.1 - fw * g) / det;
            let dw = (fs * g - t.0 * f) / det;
            s -= ds;
            w -= dw;
        }
        Ok(None)
    }
}

/// Continues the regular branch from `gamma_start` down to `gamma_end`.
///
/// A sign change of the σ-component of the tangent certifies a fold, which
/// is then located by the 2×2 fold solver.
pub fn continue_regular_branch(spec: &ReactionSpec, gamma_start: f64, gamma_end: f64) -> Result<ContinuationResult> {
    if !(gamma_start > gamma_end && gamma_end > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "continuation needs gamma_start > gamma_end > 0, got {gamma_start}, {gamma_end}"
        )));
    }
    let branch = Branch { spec };
    let sigma_end = gamma_end.sqrt();
    let mut x = (gamma_start.sqrt(), 0.0);
    x.1 = branch.seed(x.0)?;
    let mut path = vec![ContinuationPoint { gamma: x.0 * x.0, v0: x.1.exp_m1() }];
    let mut t = branch.tangent(x.0, x.1, None)?;
    let mut ds = DS_INITIAL;
    for _ in 0..MAX_STEPS {
        let pred = (x.0 + ds * t.0, x.1 + ds * t.1);
        let Some((next, iters)) = branch.correct(pred, t)? else {
            ds *= 0.5;
            if ds < DS_MIN {
                return Err(Error::ContinuationStall { gamma: x.0 * x.0, v0: x.1.exp_m1() });
            }
            continue;
        };
        let t_next = branch.tangent(next.0, next.1, Some(t))?;
        if t.0 < 0.0 && t_next.0 > 0.0 {
            let v_seed = 0.5 * (x.1.exp_m1() + next.1.exp_m1());
            let fold = newton_fold(spec, v_seed)?.ok_or(Error::ContinuationStall {
                gamma: next.0 * next.0,
                v0: next.1.exp_m1(),
            })?;
            path.push(ContinuationPoint { gamma: next.0 * next.0, v0: next.1.exp_m1() });
            return Ok(ContinuationResult { kind: DestabilizationType::TypeD { fold }, path });
        }
        if next.0 <= sigma_end {
            // land exactly on γ_end
            let w_end = solve_at_sigma(&branch, sigma_end, x.1, next.1)?;
            path.push(ContinuationPoint { gamma: gamma_end, v0: w_end.exp_m1() });
            return Ok(ContinuationResult { kind: DestabilizationType::TypeE, path });
        }
        x = next;
        t = t_next;
        path.push(ContinuationPoint { gamma: x.0 * x.0, v0: x.1.exp_m1() });
        if iters <= 3 {
            ds = (ds * 1.5).min(DS_MAX);
        }
    }
    Err(Error::ContinuationStall { gamma: x.0 * x.0, v0: x.1.exp_m1() })
}

/// Newton in `w` at fixed σ starting from the secant of the last step.
fn solve_at_sigma(branch: &Branch<'_>, sigma: f64, w_a: f64, w_b: f64) -> Result<f64> {
    let mut w = 0.5 * (w_a + w_b);
    for _ in 0..50 {
        let (f, _, fw) = branch.eval(sigma, w)?;
        if f.abs() < CORRECTOR_TOL {
            return Ok(w);
        }
        if fw == 0.0 {
            break;
        }
        w -= f / fw;
    }
    Ok(w)
}

/// Type D or E: does the regular branch fold before reaching the end of `gamma_scan`?
///
/// The scan must be descending; only its end points are used.
pub fn classify_destabilization_type(spec: &ReactionSpec, gamma_scan: &[f64]) -> Result<DestabilizationType> {
    let (Some(&first), Some(&last)) = (gamma_scan.first(), gamma_scan.last()) else {
        return Err(Error::InvalidParameter("empty gamma scan".into()));
    };
    if gamma_scan.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidParameter("gamma scan must be strictly descending".into()));
    }
    Ok(continue_regular_branch(spec, first, last)?.kind)
}

/// Default scan: `10^k`, from `10·γ_ref` (at least 100) down to `1e−4`.
pub fn default_gamma_scan(gamma_ref: f64) -> Vec<f64> {
    let hi = (10.0 * gamma_ref).max(100.0).log10().ceil() as i32;
    (-4..=hi).rev().map(|k| 10f64.powi(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearG, PowerH};

    fn spec(h0: f64, m: u32) -> ReactionSpec {
        ReactionSpec::new(PowerH::new(h0, m).unwrap(), LinearG::new(0.0))
    }

    #[test]
    fn quadratic_positive_folds() {
        let r = continue_regular_branch(&spec(1.0, 1), 100.0, 1e-4).unwrap();
        match r.kind {
            DestabilizationType::TypeD { fold } => {
                assert!((fold.gamma_double - 1.5).abs() < 1e-6);
                assert!((fold.v_fold - 2.0).abs() < 1e-5);
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn quadratic_negative_and_constant_reach_the_end() {
        for (h0, m) in [(-1.0, 1), (1.0, 0)] {
            let r = continue_regular_branch(&spec(h0, m), 100.0, 1e-4).unwrap();
            assert_eq!(r.kind, DestabilizationType::TypeE);
            let last = r.path.last().unwrap();
            assert!(last.v0.is_finite() && last.v0 > -1.0);
        }
    }

    #[test]
    fn zero_h_stays_at_zero() {
        let r = continue_regular_branch(&spec(0.0, 1), 10.0, 1e-4).unwrap();
        assert_eq!(r.kind, DestabilizationType::TypeE);
        assert!(r.path.iter().all(|p| p.v0.abs() < 1e-9));
    }
}
