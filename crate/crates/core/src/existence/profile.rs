//! Front profiles on a symmetric x-grid and the composite asymptotic construction.

use crate::error::{Error, Result};
use crate::fast_field::FastFront;
use crate::grid;
use crate::model::{ModelParams, Regime};
use serde::Serialize;
use std::io::Write;

pub const MIN_NODES: usize = 512;
/// Slow decay lengths covered by the default half-width.
pub const DEFAULT_DECAY_LENGTHS: f64 = 16.0;
/// Smallest accepted coverage `κL`.
pub const MIN_DECAY_LENGTHS: f64 = 10.0;
/// Fast-core spacing in units of ε.
const CORE_SPACING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Construction {
    CompositeAsymptotic,
    BvpRefined,
}

/// Stationary front sampled on a grid symmetric about `x = 0`.
///
/// Derivatives are stored alongside the values so that evaluation between
/// nodes is a cubic Hermite interpolant.
#[derive(Debug, Clone, Serialize)]
pub struct FrontProfile {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub ux: Vec<f64>,
    pub vx: Vec<f64>,
    pub v0: f64,
    pub construction: Construction,
    pub params: ModelParams,
}

/// Cubic Hermite interpolation of `(f, f')` on `[x0, x1]`.
#[inline]
fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let val = h00 * f0 + h * h10 * d0 + h01 * f1 + h * h11 * d1;
    let der = ((6.0 * t2 - 6.0 * t) * f0 + h * (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * f1
        + h * (3.0 * t2 - 2.0 * t) * d1)
        / h;
    (val, der)
}

impl FrontProfile {
    pub fn half_width(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `(U, V, U_x, V_x)` at `x`; constant continuation outside `[−L, L]`.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        let n = self.x.len();
        if x <= self.x[0] {
            return [self.u[0], self.v[0], 0.0, 0.0];
        }
        if x >= self.x[n - 1] {
            return [self.u[n - 1], self.v[n - 1], 0.0, 0.0];
        }
        let i = self.x.partition_point(|&xi| xi <= x).saturating_sub(1).min(n - 2);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (u, ux) = hermite(x0, x1, self.u[i], self.u[i + 1], self.ux[i], self.ux[i + 1], x);
        let (v, vx) = hermite(x0, x1, self.v[i], self.v[i + 1], self.vx[i], self.vx[i + 1], x);
        [u, v, ux, vx]
    }

    /// `max |U(x) + U(−x)|` and `max |V(x) − V(−x)|` over mirrored nodes.
    pub fn symmetry_defect(&self) -> (f64, f64) {
        let n = self.x.len();
        let mut du = 0.0f64;
        let mut dv = 0.0f64;
        for i in 0..n / 2 {
            let j = n - 1 - i;
            du = du.max((self.u[i] + self.u[j]).abs());
            dv = dv.max((self.v[i] - self.v[j]).abs());
        }
        (du, dv)
    }

    pub fn v_max_abs(&self) -> f64 {
        self.v.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// CSV with a leading `#` metadata line and columns `x,U,V`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let regime = match self.params.regime {
            Regime::Regular { g1 } => format!("regular g1={g1}"),
            Regime::SuperSlow { gamma } => format!("super_slow gamma={gamma}"),
        };
        writeln!(
            out,
            "# construction={:?} epsilon={} tau={} {} v0={} L={}",
            self.construction,
            self.params.epsilon,
            self.params.tau,
            regime,
            self.v0,
            self.half_width()
        )?;
        writeln!(out, "x,U,V")?;
        for i in 0..self.x.len() {
            writeln!(out, "{:.17e},{:.17e},{:.17e}", self.x[i], self.u[i], self.v[i])?;
        }
        Ok(())
    }
}

/// Default half-width `max(50, 16/κ)` with κ the slow decay rate.
pub fn default_half_width(params: &ModelParams) -> f64 {
    let kappa = params.slow_decay_rate();
    if kappa > 0.0 {
        (DEFAULT_DECAY_LENGTHS / kappa).max(50.0)
    } else {
        50.0
    }
}

/// C¹ smoothstep: 1 for `|x| ≤ a`, 0 for `|x| ≥ b`; returns `(χ, χ')`.
fn blend(x: f64, a: f64, b: f64) -> (f64, f64) {
    let r = x.abs();
    if r <= a {
        return (1.0, 0.0);
    }
    if r >= b {
        return (0.0, 0.0);
    }
    let s = (r - a) / (b - a);
    let chi = 1.0 - s * s * (3.0 - 2.0 * s);
    let dchi = -6.0 * s * (1.0 - s) / (b - a) * x.signum();
    (chi, dchi)
}

/// Fast core `u0(x/ε; v0)` blended into the slow tails `±√(1+V)` over
/// `|x| ∈ [√ε, 2√ε]`, with `V = v0·exp(−κ|x|)`.
///
/// `n` is rounded up to an odd count so that `x = 0` is a node.
pub fn build_composite_front(v0: f64, params: &ModelParams, half_width: Option<f64>, n: usize) -> Result<FrontProfile> {
    params.validate()?;
    if n < MIN_NODES {
        return Err(Error::Grid(format!("need at least {MIN_NODES} nodes, got {n}")));
    }
    if !(v0 > -1.0 && v0.is_finite()) {
        return Err(Error::Domain(format!("front level v0 = {v0} must exceed -1")));
    }
    let eps = params.epsilon;
    let kappa = params.slow_decay_rate();
    if let Regime::SuperSlow { gamma } = params.regime {
        if gamma == 0.0 {
            return Err(Error::Grid("gamma = 0 gives no slow decay".into()));
        }
    }
    let l = half_width.unwrap_or_else(|| default_half_width(params));
    if !(l > 0.0) || kappa * l < MIN_DECAY_LENGTHS {
        return Err(Error::Grid(format!(
            "half-width {l} covers {:.2} slow decay lengths, need {MIN_DECAY_LENGTHS}",
            kappa * l
        )));
    }
    let n = n | 1;
    let x = grid::stretched(l, n, CORE_SPACING * eps)?;
    let fast = FastFront::new(v0)?;
    let (a, b) = (eps.sqrt(), 2.0 * eps.sqrt());
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut ux = Vec::with_capacity(n);
    let mut vx = Vec::with_capacity(n);
    for &xi in &x {
        let sgn = if xi > 0.0 { 1.0 } else if xi < 0.0 { -1.0 } else { 0.0 };
        let decay = (-kappa * xi.abs()).exp();
        let vv = v0 * decay;
        let vvx = -kappa * sgn * vv;
        let slow = (1.0 + vv).max(0.0).sqrt() * sgn;
        let slow_x = if slow == 0.0 { 0.0 } else { 0.5 * vvx / slow.abs() * sgn };
        let core = fast.u0(xi / eps);
        let core_x = fast.p0(xi / eps) / eps;
        let (chi, dchi) = blend(xi, a, b);
        u.push(chi * core + (1.0 - chi) * slow);
        ux.push(chi * core_x + (1.0 - chi) * slow_x + dchi * (core - slow));
        v.push(vv);
        vx.push(vvx);
    }
    Ok(FrontProfile { x, u, v, ux, vx, v0, construction: Construction::CompositeAsymptotic, params: *params })
}
