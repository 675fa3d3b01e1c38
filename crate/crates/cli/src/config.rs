//! Run configuration.
//!
//! A config file is either a bare model descriptor or an object with a
//! `model` key plus optional per-command sections. Unknown keys are rejected
//! at every level.

use frontlab::evans::OracleConfig;
use frontlab::existence::DEFAULT_V_MAX;
use frontlab::model::{HDescriptor, ModelDescriptor, RegimeDescriptor};
use frontlab::pde_sim::SimConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Bad input: maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelDescriptor,
    #[serde(default)]
    pub front: FrontSection,
    #[serde(default)]
    pub branches: BranchesSection,
    #[serde(default)]
    pub fold: FoldSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub evans: EvansSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub classify: ClassifySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    pub fn from_model(model: ModelDescriptor) -> Self {
        Self {
            model,
            front: Default::default(),
            branches: Default::default(),
            fold: Default::default(),
            spectrum: Default::default(),
            evans: Default::default(),
            oracle: Default::default(),
            simulate: Default::default(),
            classify: Default::default(),
            sweep: None,
        }
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| invalid(format!("config is not valid JSON: {e}")))?;
        let wrapped = value.as_object().is_some_and(|o| o.contains_key("model"));
        if wrapped {
            serde_json::from_value(value).map_err(|e| invalid(format!("config: {e}")))
        } else {
            let model = serde_json::from_value(value).map_err(|e| invalid(format!("model descriptor: {e}")))?;
            Ok(Self::from_model(model))
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|_| invalid(format!("{} is not UTF-8", path.display())))?;
        Ok((Self::parse(text)?, bytes))
    }
}

/// Which stationary front the front-based commands use.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontSection {
    /// 1-based branch index in the super-slow regime.
    pub branch: usize,
    /// Explicit plateau level `v0`, bypassing the branch search.
    pub v0: Option<f64>,
    pub nodes: usize,
    pub half_width: Option<f64>,
    /// Newton-refine the composite front.
    pub refine: bool,
}

impl Default for FrontSection {
    fn default() -> Self {
        Self { branch: 1, v0: None, nodes: 4001, half_width: None, refine: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchesSection {
    pub v_max: f64,
}

impl Default for BranchesSection {
    fn default() -> Self {
        Self { v_max: DEFAULT_V_MAX }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoldSection {
    pub v_window: (f64, f64),
}

impl Default for FoldSection {
    fn default() -> Self {
        Self { v_window: (0.0, 20.0) }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// Wavenumbers; the library default grid when absent.
    pub k_grid: Option<Vec<f64>>,
}

/// Inclusive range sampled at `points` evenly spaced values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Span {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n).map(|i| self.from + (self.to - self.from) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ContourSpec {
    Circle { center: (f64, f64), radius: f64, points: usize },
    Rectangle { lo: (f64, f64), hi: (f64, f64) },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvansSection {
    /// Real and imaginary axes of a λ-grid scan.
    pub scan: Option<(Span, Span)>,
    /// Contours for winding counts.
    pub contours: Vec<ContourSpec>,
    /// Real brackets `[lo, hi]`, each holding one sign change of `D`.
    pub real_zeros: Vec<(f64, f64)>,
    /// Classify eigenfunction parity with the discretized operator.
    pub parity: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub n: usize,
    pub half_width: Option<f64>,
    pub shifts: Option<Vec<f64>>,
    pub re_floor: f64,
    pub parity: bool,
}

impl Default for OracleSection {
    fn default() -> Self {
        let d = OracleConfig::default();
        Self { n: d.n, half_width: d.half_width, shifts: d.shifts, re_floor: d.re_floor, parity: true }
    }
}

impl OracleSection {
    pub fn config(&self) -> OracleConfig {
        OracleConfig { n: self.n, half_width: self.half_width, shifts: self.shifts.clone(), re_floor: self.re_floor }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Plateau level of the initial front; taken from `front` when absent.
    pub v0: Option<f64>,
    /// Times at which the full state is written.
    pub snapshots: Vec<f64>,
    pub solver: SimConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    /// γ values for the destabilization scan; a default around the model's γ when absent.
    pub gamma_scan: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Branches,
    Fold,
    Spectrum,
    Edge,
}

/// One sweep axis: either explicit values or `from..=to` in steps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Axis {
    Values { values: Vec<f64> },
    Range { from: f64, to: f64, step: f64 },
}

impl Axis {
    pub fn values(&self) -> anyhow::Result<Vec<f64>> {
        match self {
            Axis::Values { values } => Ok(values.clone()),
            Axis::Range { from, to, step } => {
                if step.is_nan() || *step <= 0.0 || !from.is_finite() || !to.is_finite() {
                    return Err(invalid(format!("axis step must be positive, got {step}")));
                }
                if to < from {
                    return Ok(Vec::new());
                }
                // index arithmetic avoids accumulated drift; rounding to 12 digits
                // turns 1.7000000000000002 back into 1.7
                let count = ((to - from) / step + 1e-9).floor() as usize + 1;
                if count > MAX_JOBS {
                    return Err(invalid(format!("axis has {count} points, more than {MAX_JOBS}")));
                }
                Ok((0..count).map(|i| round12(from + i as f64 * step)).collect())
            }
        }
    }
}

pub const MAX_JOBS: usize = 1_000_000;

fn round12(x: f64) -> f64 {
    format!("{x:.12e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub gamma: Option<Axis>,
    pub h0: Option<Axis>,
    pub tau: Option<Axis>,
    pub epsilon: Option<Axis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub analysis: Analysis,
    pub axes: SweepAxes,
}

/// Named axis with its expanded values.
#[derive(Debug, Clone)]
pub struct Grid {
    pub names: Vec<&'static str>,
    pub values: Vec<Vec<f64>>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.values.iter().map(Vec::len).product()
    }

    /// Grid indices of job `k`, last axis fastest (lexicographic order).
    pub fn indices(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.values.len()];
        for (slot, axis) in idx.iter_mut().zip(&self.values).rev() {
            *slot = k % axis.len();
            k /= axis.len();
        }
        idx
    }
}

impl SweepSection {
    /// Expands the axes in the fixed order γ, H0, τ, ε.
    pub fn grid(&self, model: &ModelDescriptor) -> anyhow::Result<Grid> {
        let a = &self.axes;
        let mut names = Vec::new();
        let mut values = Vec::new();
        for (name, axis) in [("gamma", &a.gamma), ("h0", &a.h0), ("tau", &a.tau), ("epsilon", &a.epsilon)] {
            if let Some(axis) = axis {
                names.push(name);
                values.push(axis.values()?);
            }
        }
        if names.is_empty() {
            return Err(invalid("sweep has no axes"));
        }
        if a.gamma.is_some() && !matches!(model.regime, RegimeDescriptor::SuperSlow { .. }) {
            return Err(invalid("a gamma axis needs the super_slow regime"));
        }
        if a.h0.is_some() && !matches!(model.h, Some(HDescriptor::Power { .. })) {
            return Err(invalid("an h0 axis needs a power-law H"));
        }
        let grid = Grid { names, values };
        let total = grid.values.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.len()));
        match total {
            Some(0) => Err(invalid("sweep grid is empty")),
            Some(n) if n <= MAX_JOBS => Ok(grid),
            _ => Err(invalid(format!("sweep grid exceeds {MAX_JOBS} jobs"))),
        }
    }
}

/// The model descriptor at one grid point.
pub fn model_at(base: &ModelDescriptor, names: &[&str], point: &[f64]) -> ModelDescriptor {
    let mut m = base.clone();
    for (&name, &x) in names.iter().zip(point) {
        match name {
            "gamma" => m.regime = RegimeDescriptor::SuperSlow { gamma: x },
            "h0" => {
                if let Some(HDescriptor::Power { h0, .. }) = &mut m.h {
                    *h0 = x;
                }
            }
            "tau" => m.tau = x,
            "epsilon" => m.epsilon = x,
            _ => unreachable!("unknown axis {name}"),
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODEL: &str =
        r#"{"epsilon":0.1,"tau":1,"regime":{"super_slow":{"gamma":2}},"H":{"kind":"power","h0":1,"m":1}}"#;

    #[test]
    fn bare_descriptor_and_wrapped_config_agree() {
        let bare = RunConfig::parse(MODEL).unwrap();
        let wrapped = RunConfig::parse(&format!(r#"{{"model":{MODEL}}}"#)).unwrap();
        assert_eq!(bare.model, wrapped.model);
    }

    #[test]
    fn unknown_section_keys_are_rejected() {
        for extra in [r#""front":{"branhc":2}"#, r#""simulate":{"solver":{"N":64}}"#, r#""plot":{}"#] {
            let text = format!(r#"{{"model":{MODEL},{extra}}}"#);
            assert!(RunConfig::parse(&text).unwrap_err().is::<Invalid>(), "{extra}");
        }
    }

    #[test]
    fn range_axis_hits_the_endpoint() {
        let v = Axis::Range { from: 1.0, to: 3.0, step: 0.1 }.values().unwrap();
        assert_eq!(v.len(), 21);
        assert_eq!(v[20], 3.0);
        assert_eq!(v[7], 1.7);
        assert!(Axis::Range { from: 1.0, to: 0.0, step: 0.1 }.values().unwrap().is_empty());
    }

    #[test]
    fn grid_order_is_lexicographic() {
        let g = Grid { names: vec!["a", "b"], values: vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]] };
        let order: Vec<_> = (0..g.len()).map(|k| g.indices(k)).collect();
        assert_eq!(order[0], [0, 0]);
        assert_eq!(order[2], [0, 2]);
        assert_eq!(order[3], [1, 0]);
    }
}
