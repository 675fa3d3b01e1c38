//! JSON model descriptor.
//!
//! ```json
//! {"epsilon": 0.1, "tau": 1.0,
//!  "regime": {"super_slow": {"gamma": 2.0}},
//!  "H": {"kind": "power", "h0": 1.0, "m": 1}}
//! ```
//!
//! `G` is optional: the super-slow regime fixes `G = −ε²γV` and rejects an
//! explicit `G`; the regular regime defaults to `G = g1·V`. A general
//! reaction term may be given as `"F": {"kind": "table", "coeffs": ...}`
//! instead of `H`/`G`. Unknown keys are rejected at every level.

use super::reaction::{
    CubicG, DecomposedReaction, GFunction, HFunction, LinearG, PolynomialG, PowerH, ReactionSpec, TableH,
};
use super::{Model, ModelParams, Regime};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimeDescriptor {
    SuperSlow { gamma: f64 },
    Regular { g1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HDescriptor {
    Power { h0: f64, m: u32 },
    /// `H = Σ coeffs[i][j]·(U²)^i·V^j`.
    Table { coeffs: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GDescriptor {
    Linear {
        g1: f64,
    },
    Cubic {
        g1: f64,
        #[serde(default)]
        g2: f64,
        #[serde(default)]
        g3: f64,
    },
    /// `G = Σ coeffs[k]·V^k`.
    Polynomial { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub epsilon: f64,
    pub tau: f64,
    pub regime: RegimeDescriptor,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<HDescriptor>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<GDescriptor>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<HDescriptor>,
}

impl ModelDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("model descriptor: {e}")))
    }

    pub fn params(&self) -> Result<ModelParams> {
        let regime = match self.regime {
            RegimeDescriptor::SuperSlow { gamma } => Regime::SuperSlow { gamma },
            RegimeDescriptor::Regular { g1 } => Regime::Regular { g1 },
        };
        ModelParams::new(self.epsilon, self.tau, regime)
    }

    /// Builds the model; structural checks of the reaction are left to
    /// [`super::validate_reaction_spec`].
    pub fn build(&self) -> Result<Model> {
        let params = self.params()?;
        let reaction = match (&self.f, &self.h) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter("give either F or H, not both".into()))
            }
            (Some(_), None) if self.g.is_some() => {
                return Err(Error::InvalidParameter("G is derived from F and must be omitted".into()))
            }
            (Some(HDescriptor::Power { .. }), None) => {
                return Err(Error::InvalidParameter("F must be a table".into()))
            }
            (Some(HDescriptor::Table { coeffs }), None) => {
                if matches!(self.regime, RegimeDescriptor::SuperSlow { .. }) {
                    return Err(Error::InvalidParameter(
                        "the super-slow regime fixes G = -eps^2 gamma V; use H instead of F".into(),
                    ));
                }
                let table = TableH::new(coeffs.clone());
                let spec = DecomposedReaction::new(move |u, v| table.h(u, v)).spec();
                check_g1(&params, spec.g1(), 1e-6)?;
                spec
            }
            (None, None) => return Err(Error::InvalidParameter("missing H".into())),
            (None, Some(h)) => {
                let h: Arc<dyn HFunction> = match h {
                    HDescriptor::Power { h0, m } => Arc::new(PowerH::new(*h0, *m)?),
                    HDescriptor::Table { coeffs } => Arc::new(TableH::new(coeffs.clone())),
                };
                let g: Arc<dyn GFunction> = match (&self.regime, &self.g) {
                    (RegimeDescriptor::SuperSlow { .. }, Some(_)) => {
                        return Err(Error::InvalidParameter(
                            "the super-slow regime fixes G = -eps^2 gamma V; omit G".into(),
                        ))
                    }
                    (_, None) => Arc::new(LinearG::new(params.g1())),
                    (_, Some(GDescriptor::Linear { g1 })) => Arc::new(LinearG::new(*g1)),
                    (_, Some(GDescriptor::Cubic { g1, g2, g3 })) => {
                        Arc::new(CubicG { g1: *g1, g2: *g2, g3: *g3 })
                    }
                    (_, Some(GDescriptor::Polynomial { coeffs })) => {
                        Arc::new(PolynomialG { coeffs: coeffs.clone() })
                    }
                };
                let spec = ReactionSpec::from_arcs(h, g);
                check_g1(&params, spec.g1(), 1e-12)?;
                spec
            }
        };
        Ok(Model::new(params, reaction))
    }
}

fn check_g1(params: &ModelParams, g1: f64, tol: f64) -> Result<()> {
    if (g1 - params.g1()).abs() > tol * params.g1().abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "G'(0) = {g1} disagrees with the regime's G1 = {}",
            params.g1()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_super_slow_power() {
        let d = ModelDescriptor::from_json(
            r#"{"epsilon":0.1,"tau":1,"regime":{"super_slow":{"gamma":2}},"H":{"kind":"power","h0":1,"m":1}}"#,
        )
        .unwrap();
        let m = d.build().unwrap();
        assert_eq!(m.reaction.quadratic_h0(), Some(1.0));
        assert!((m.reaction.g1() + 0.02).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys_everywhere() {
        for text in [
            r#"{"epsilon":0.1,"tau":1,"regime":{"regular":{"g1":-1}},"H":{"kind":"power","h0":1,"m":1},"extra":1}"#,
            r#"{"epsilon":0.1,"tau":1,"regime":{"regular":{"g1":-1,"x":0}},"H":{"kind":"power","h0":1,"m":1}}"#,
            r#"{"epsilon":0.1,"tau":1,"regime":{"regular":{"g1":-1}},"H":{"kind":"power","h0":1,"m":1,"n":2}}"#,
            r#"{"epsilon":0.1,"tau":1,"regime":{"regular":{"g1":-1}},"H":{"kind":"power","h0":1,"m":1},"G":{"kind":"linear","g1":-1,"g9":0}}"#,
            r#"{"epsilon":0.1,"tau":1,"regime":{"regluar":{"g1":-1}},"H":{"kind":"power","h0":1,"m":1}}"#,
        ] {
            assert!(ModelDescriptor::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn super_slow_rejects_explicit_g() {
        let d = ModelDescriptor::from_json(
            r#"{"epsilon":0.1,"tau":1,"regime":{"super_slow":{"gamma":2}},"H":{"kind":"power","h0":1,"m":1},"G":{"kind":"linear","g1":-0.02}}"#,
        )
        .unwrap();
        assert!(d.build().is_err());
    }

    #[test]
    fn regular_g1_mismatch_is_rejected() {
        let d = ModelDescriptor::from_json(
            r#"{"epsilon":0.1,"tau":1,"regime":{"regular":{"g1":-1}},"H":{"kind":"power","h0":1,"m":1},"G":{"kind":"cubic","g1":-2,"g3":1}}"#,
        )
        .unwrap();
        assert!(d.build().is_err());
    }

    #[test]
    fn f_table_round_trip() {
        // F = (1 + V − U²)·U² − V
        let d = ModelDescriptor::from_json(
            r#"{"epsilon":0.1,"tau":1,"regime":{"regular":{"g1":-1}},"F":{"kind":"table","coeffs":[[0,-1],[1,1],[-1]]}}"#,
        )
        .unwrap();
        let m = d.build().unwrap();
        assert!((m.reaction.h(4.0, 0.5) - 4.0).abs() < 1e-10);
        assert!((m.reaction.g(0.5) + 0.5).abs() < 1e-12);
    }
}
