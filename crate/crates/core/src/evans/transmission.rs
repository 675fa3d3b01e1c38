//! Slow transmission function from jump matching, edge-eigenvalue predictions
//! and the routing between the shooting and jump-matching evaluators.

use super::compound::{det_plus, evans_compound, EvansEvaluation, EvansMethod};
use super::linearization::{asymptotic_system, LinearizationContext};
use crate::error::{Error, Result};
use crate::essential_spectrum::tip_lambda_superslow;
use crate::fast_field::stability_integrals;
use crate::model::{ModelParams, ReactionSpec, Regime};
use num_complex::Complex64;
use serde::Serialize;

/// Half-width of the excluded neighbourhood of the negative real axis.
const BRANCH_CUT_TOL: f64 = 1e-8;
/// Queries within this many `ε²` of the super-slow tip use jump matching.
const TIP_WINDOW: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgePrediction {
    pub v0: f64,
    pub lambda_tilde_edge: f64,
    pub lambda_edge: f64,
    /// An edge eigenvalue exists only for `H0 > 0`.
    pub exists: bool,
}

fn gamma_of(params: &ModelParams) -> Result<f64> {
    match params.regime {
        Regime::SuperSlow { gamma } => Ok(gamma),
        Regime::Regular { .. } => Err(Error::Regime("jump matching needs the super-slow regime".into())),
    }
}

/// `z = λ̃(τ − H0/2) + γ`, rejected near the cut of the principal square root.
fn radicand(lambda_tilde: Complex64, params: &ModelParams, spec: &ReactionSpec) -> Result<Complex64> {
    let z = lambda_tilde * (params.tau - 0.5 * spec.h0()) + gamma_of(params)?;
    if z.re < 0.0 && z.im.abs() < BRANCH_CUT_TOL {
        return Err(Error::BranchCut { re: z.re, im: z.im });
    }
    Ok(z)
}

/// `t2 = 1 − (I1 + 2·I2) / (4·√z·(1+v0))` with the fast integrals by quadrature.
pub fn t2_jump_matching(lambda_tilde: Complex64, v0: f64, params: &ModelParams, spec: &ReactionSpec) -> Result<Complex64> {
    let z = radicand(lambda_tilde, params, spec)?;
    let forcing = stability_integrals(v0, spec)?.forcing();
    Ok(1.0 - forcing / (z.sqrt() * (4.0 * (1.0 + v0))))
}

/// Closed form of [`t2_jump_matching`] for `H = H0·U²`: `1 − H0·√((1+v0)/(2z))`.
pub fn t2_analytic(lambda_tilde: Complex64, v0: f64, params: &ModelParams, h0: f64) -> Result<Complex64> {
    let z = lambda_tilde * (params.tau - 0.5 * h0) + gamma_of(params)?;
    if z.re < 0.0 && z.im.abs() < BRANCH_CUT_TOL {
        return Err(Error::BranchCut { re: z.re, im: z.im });
    }
    Ok(1.0 - h0 * ((1.0 + v0) / (z * 2.0)).sqrt())
}

/// Zero of the closed-form `t2`: `λ̃_edge = (H0²(1+v0) − 2γ)/(2τ − H0)`.
pub fn lambda_edge_predict(v0: f64, params: &ModelParams, spec: &ReactionSpec) -> Result<EdgePrediction> {
    let gamma = gamma_of(params)?;
    let h0 = spec
        .quadratic_h0()
        .ok_or_else(|| Error::Precondition("edge prediction needs H = H0·U²".into()))?;
    let gap = 2.0 * params.tau - h0;
    if gap <= 0.01 {
        return Err(Error::Precondition(format!("2τ − H0 = {gap} must exceed 0.01")));
    }
    let lambda_tilde_edge = (h0 * h0 * (1.0 + v0) - 2.0 * gamma) / gap;
    let tip = -2.0 * gamma / gap;
    if h0 != 0.0 && lambda_tilde_edge <= tip {
        return Err(Error::Precondition(format!("edge {lambda_tilde_edge} does not lie right of the tip {tip}")));
    }
    let eps = params.epsilon;
    Ok(EdgePrediction { v0, lambda_tilde_edge, lambda_edge: eps * eps * lambda_tilde_edge, exists: h0 > 0.0 })
}

/// `γ` at which `t2(0) = 0` for a front at level `v0`: `((I1 + 2·I2)/(4(1+v0)))²`.
pub fn gamma_double_from_stability(v0: f64, spec: &ReactionSpec) -> Result<f64> {
    let forcing = stability_integrals(v0, spec)?.forcing();
    let r = forcing / (4.0 * (1.0 + v0));
    Ok(r * r)
}

/// Evans function with routing: super-slow queries near the tip of the
/// essential spectrum replace the shooting `t2` with the jump-matching one.
///
/// `D = t1·t2·det[E+]` in the routed case; `t1` still comes from shooting
/// the fast mode, which stays well conditioned at the tip.
pub fn evans(lambda: Complex64, ctx: &LinearizationContext) -> Result<EvansEvaluation> {
    let params = &ctx.params;
    let e = params.epsilon * params.epsilon;
    let near_tip = match tip_lambda_superslow(params, &ctx.spec) {
        Ok(tip) => (lambda - e * tip).norm() < TIP_WINDOW * e,
        Err(_) => false,
    };
    if !near_tip {
        return evans_compound(lambda, ctx);
    }
    let lt = lambda / e;
    let (t2, method) = match ctx.spec.quadratic_h0() {
        Some(h0) => (t2_analytic(lt, ctx.front.v0, params, h0)?, EvansMethod::AnalyticLeadingOrder),
        None => (t2_jump_matching(lt, ctx.front.v0, params, &ctx.spec)?, EvansMethod::JumpMatching),
    };
    let shot = evans_compound(lambda, ctx)?;
    let det = det_plus(&asymptotic_system(lambda, params, &ctx.spec)?);
    Ok(EvansEvaluation { lambda, d: shot.t1 * t2 * det, log_scale: shot.log_scale, t1: shot.t1, t2, method })
}
