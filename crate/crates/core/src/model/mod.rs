//! The model family
//!
//! ```text
//! U_t = ε² U_xx + (1 + V − U²) U
//! τ V_t = V_xx + (1 + V − U²) H(U², V) + G(V)
//! ```
//!
//! with the scalar parameters, the nonlinearities `H`, `G` and the split of a
//! general reaction term `F` into that form.

mod descriptor;
mod reaction;

pub use descriptor::{GDescriptor, HDescriptor, ModelDescriptor, RegimeDescriptor};
pub use reaction::{
    decompose_f, validate_reaction_spec, CubicG, DecomposedReaction, GFunction, HFunction,
    LinearG, PolynomialG, PowerH, ReactionSpec, TableH, ValidationCheck, ValidationReport,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Upper bound on ε beyond which the asymptotic theory is not trusted.
pub const EPSILON_MAX: f64 = 0.5;
/// ε above this value is accepted with a warning.
pub const EPSILON_WARN: f64 = 0.2;
pub const TAU_MIN: f64 = 1e-2;
pub const TAU_MAX: f64 = 1e2;
/// Lower validity floor for the slow level `v`; the fast front degenerates at `v = −1`.
pub const V_FLOOR: f64 = -0.9;

/// How the linear part of `G` scales with ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regime {
    /// `G'(0) = G1 < 0` of order one.
    Regular { g1: f64 },
    /// `G(V) = −ε² γ V`.
    SuperSlow { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub epsilon: f64,
    pub tau: f64,
    pub regime: Regime,
}

impl ModelParams {
    pub fn new(epsilon: f64, tau: f64, regime: Regime) -> Result<Self> {
        let p = Self { epsilon, tau, regime };
        p.validate()?;
        Ok(p)
    }

    pub fn regular(epsilon: f64, tau: f64, g1: f64) -> Result<Self> {
        Self::new(epsilon, tau, Regime::Regular { g1 })
    }

    pub fn super_slow(epsilon: f64, tau: f64, gamma: f64) -> Result<Self> {
        Self::new(epsilon, tau, Regime::SuperSlow { gamma })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= EPSILON_MAX) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} outside (0, {EPSILON_MAX}]",
                self.epsilon
            )));
        }
        if self.epsilon > EPSILON_WARN {
            log::warn!("epsilon = {} is large for the asymptotic regime", self.epsilon);
        }
        if !(TAU_MIN..=TAU_MAX).contains(&self.tau) {
            return Err(Error::InvalidParameter(format!(
                "tau = {} outside [{TAU_MIN}, {TAU_MAX}]",
                self.tau
            )));
        }
        match self.regime {
            Regime::Regular { g1 } if !(g1 < 0.0) => Err(Error::Regime(format!(
                "regular regime requires G1 < 0, got {g1}"
            ))),
            Regime::SuperSlow { gamma } if !gamma.is_finite() => {
                Err(Error::InvalidParameter("gamma must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// `G'(0)`, implied by the regime.
    pub fn g1(&self) -> f64 {
        match self.regime {
            Regime::Regular { g1 } => g1,
            Regime::SuperSlow { gamma } => -self.epsilon * self.epsilon * gamma,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self.regime {
            Regime::SuperSlow { gamma } => Some(gamma),
            Regime::Regular { .. } => None,
        }
    }

    /// Decay rate of the slow tails `V ∝ exp(−κ|x|)` on the x-scale.
    pub fn slow_decay_rate(&self) -> f64 {
        match self.regime {
            Regime::Regular { g1 } => (-g1).sqrt(),
            Regime::SuperSlow { gamma } => self.epsilon * gamma.abs().sqrt(),
        }
    }

    /// Same parameters with γ replaced, keeping ε and τ.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { regime: Regime::SuperSlow { gamma }, ..*self }
    }

    /// `(G(v), G'(v))`; the super-slow regime fixes `G = −ε²γV` whatever `spec` holds.
    pub fn slow_source(&self, spec: &ReactionSpec, v: f64) -> (f64, f64) {
        match self.regime {
            Regime::SuperSlow { gamma } => {
                let g1 = -self.epsilon * self.epsilon * gamma;
                (g1 * v, g1)
            }
            Regime::Regular { .. } => (spec.g(v), spec.dg_dv(v)),
        }
    }
}

/// Parameters together with the reaction nonlinearities.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub reaction: ReactionSpec,
}

impl Model {
    pub fn new(params: ModelParams, reaction: ReactionSpec) -> Self {
        Self { params, reaction }
    }

    /// Super-slow model with `H = h0·U²` and `G = −ε²γV`.
    pub fn super_slow_power(epsilon: f64, tau: f64, gamma: f64, h0: f64) -> Result<Self> {
        let params = ModelParams::super_slow(epsilon, tau, gamma)?;
        let g1 = params.g1();
        Ok(Self::new(params, ReactionSpec::new(PowerH::new(h0, 1)?, LinearG::new(g1))))
    }

    /// Regular model with `H = h0·(U²)^m` and `G = g1·V`.
    pub fn regular_power(epsilon: f64, tau: f64, g1: f64, h0: f64, m: u32) -> Result<Self> {
        let params = ModelParams::regular(epsilon, tau, g1)?;
        Ok(Self::new(params, ReactionSpec::new(PowerH::new(h0, m)?, LinearG::new(g1))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(ModelParams::regular(0.0, 1.0, -1.0).is_err());
        assert!(ModelParams::regular(0.6, 1.0, -1.0).is_err());
        assert!(ModelParams::regular(0.1, 1e-3, -1.0).is_err());
        assert!(ModelParams::regular(0.1, 2e2, -1.0).is_err());
        assert!(matches!(ModelParams::regular(0.1, 1.0, 0.0), Err(Error::Regime(_))));
        assert!(ModelParams::super_slow(0.1, 1.0, -0.1).is_ok());
    }

    #[test]
    fn super_slow_g1_is_implied() {
        let p = ModelParams::super_slow(0.1, 1.0, 2.0).unwrap();
        assert!((p.g1() + 0.02).abs() < 1e-15);
        assert!((p.slow_decay_rate() - 0.1 * 2f64.sqrt()).abs() < 1e-15);
    }
}
