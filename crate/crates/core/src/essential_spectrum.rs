//! Essential spectrum of the background states `(±1, 0)`.
//!
//! Both states share the dispersion relation
//!
//! ```text
//! Q(λ, k) = (λ + k² + 2)(ε²τλ + k² − ε²(H0 + G1)) + 2ε²H0 = 0
//! ```
//!
//! with `k` the wavenumber on the fast scale.

use crate::error::{Error, Result};
use crate::model::{ModelParams, ReactionSpec, Regime};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// Tolerance on the threshold quantities for the two boundary regimes.
pub const BOUNDARY_TOL: f64 = 1e-8;
const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub k: f64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumRegime {
    AllReal,
    BoundaryH0Zero,
    TwoComplexBands,
    BoundaryKMinusZero,
    MergedComplexBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityMargins {
    /// `G1`, must be negative.
    pub g1: f64,
    /// `H0 + G1 − 2τ`, must be negative.
    pub trace: f64,
    /// `max Re λ` over the k-grid.
    pub grid_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub stable: bool,
    pub regime: SpectrumRegime,
    pub k_minus: Option<f64>,
    pub k_plus: Option<f64>,
    /// Roots at `k = 0`, the tips of the two spectral curves.
    pub tip_lambda_plus: Complex64,
    pub tip_lambda_minus: Complex64,
    pub margin: f64,
}

/// Coefficients of the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub e: f64,
    pub tau: f64,
    pub h0: f64,
    pub g1: f64,
}

impl Dispersion {
    pub fn new(params: &ModelParams, spec: &ReactionSpec) -> Self {
        Self { e: params.epsilon * params.epsilon, tau: params.tau, h0: spec.h0(), g1: params.g1() }
    }

    /// `(a, b, c)` of `aλ² + bλ + c`.
    pub fn coefficients(&self, k: f64) -> (f64, f64, f64) {
        let kk = k * k;
        let s = self.h0 + self.g1;
        let a = self.e * self.tau;
        let b = self.e * self.tau * (kk + 2.0) + kk - self.e * s;
        let c = (kk + 2.0) * (kk - self.e * s) + 2.0 * self.e * self.h0;
        (a, b, c)
    }

    pub fn eval(&self, lambda: Complex64, k: f64) -> Complex64 {
        let kk = k * k;
        (lambda + kk + 2.0) * (lambda * (self.e * self.tau) + kk - self.e * (self.h0 + self.g1))
            + 2.0 * self.e * self.h0
    }

    /// `b² − 4ac`, in the factored form `(K(eτ−1) + e(2τ+H0+G1))² − 8e²τH0`.
    pub fn discriminant(&self, k: f64) -> f64 {
        let kk = k * k;
        let lin = kk * (self.e * self.tau - 1.0) + self.e * (2.0 * self.tau + self.h0 + self.g1);
        lin * lin - 8.0 * self.e * self.e * self.tau * self.h0
    }

    /// Roots ordered by descending real part, then descending imaginary part.
    pub fn roots(&self, k: f64) -> (Complex64, Complex64) {
        let (a, b, c) = self.coefficients(k);
        let d = self.discriminant(k);
        if d >= 0.0 {
            // cancellation-free real roots
            let q = -0.5 * (b + b.signum() * d.sqrt());
            let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { (0.0, -b / a) };
            let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
            (Complex64::new(hi, 0.0), Complex64::new(lo, 0.0))
        } else {
            let re = -b / (2.0 * a);
            let im = (-d).sqrt() / (2.0 * a);
            (Complex64::new(re, im), Complex64::new(re, -im))
        }
    }
}

pub fn char_roots(k: f64, params: &ModelParams, spec: &ReactionSpec) -> (Complex64, Complex64) {
    Dispersion::new(params, spec).roots(k)
}

/// `k ↦ (λ1, λ2)` over a grid.
pub fn dispersion(params: &ModelParams, spec: &ReactionSpec, k_grid: &[f64]) -> Vec<DispersionPoint> {
    let d = Dispersion::new(params, spec);
    k_grid
        .iter()
        .map(|&k| {
            let (lambda1, lambda2) = d.roots(k);
            DispersionPoint { k, lambda1, lambda2 }
        })
        .collect()
}

/// 4001 uniform points on `[−5, 5]`.
pub fn default_k_grid() -> Vec<f64> {
    (0..4001).map(|i| -5.0 + 0.0025 * i as f64).collect()
}

/// Stable iff `G1 < 0` and `H0 + G1 − 2τ < 0`.
pub fn stability_verdict(params: &ModelParams, spec: &ReactionSpec, k_grid: &[f64]) -> (bool, StabilityMargins) {
    let g1 = params.g1();
    let trace = spec.h0() + g1 - 2.0 * params.tau;
    let grid_max = dispersion(params, spec, k_grid).iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.lambda1.re));
    (g1 < 0.0 && trace < 0.0, StabilityMargins { g1, trace, grid_max })
}

/// `H0` at which `k⁻` reaches zero: `(√(2τ) − √(−G1))²`.
pub fn kminus_threshold(tau: f64, g1: f64) -> f64 {
    let d = (2.0 * tau).sqrt() - (-g1).sqrt();
    d * d
}

fn bisect_discriminant(d: &Dispersion, mut a: f64, mut b: f64) -> f64 {
    let mut fa = d.discriminant(a);
    while b - a > BISECTION_TOL {
        let m = 0.5 * (a + b);
        let fm = d.discriminant(m);
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn classify_regime(params: &ModelParams, spec: &ReactionSpec, k_grid: &[f64]) -> Result<SpectrumReport> {
    let (stable, margins) = stability_verdict(params, spec, k_grid);
    if !stable {
        return Err(Error::Precondition(format!(
            "essential spectrum is unstable (G1 = {}, H0 + G1 − 2τ = {})",
            margins.g1, margins.trace
        )));
    }
    let d = Dispersion::new(params, spec);
    let (tip_plus, tip_minus) = d.roots(0.0);
    let threshold = kminus_threshold(params.tau, d.g1);
    let h0 = d.h0;
    let mut k_minus = None;
    let mut k_plus = None;
    let regime = if h0.abs() <= BOUNDARY_TOL {
        SpectrumRegime::BoundaryH0Zero
    } else if h0 < 0.0 {
        SpectrumRegime::AllReal
    } else {
        // Δ is a parabola in K = k² with its minimum at K* = e(2τ+H0+G1)/(1−eτ).
        let alpha = 1.0 - d.e * d.tau;
        let k_star = (d.e * (2.0 * d.tau + h0 + d.g1) / alpha).max(0.0).sqrt();
        let mut hi = k_star.max(1.0);
        while d.discriminant(hi) < 0.0 {
            hi *= 2.0;
        }
        if alpha > 0.0 && d.discriminant(k_star) < 0.0 {
            k_plus = Some(bisect_discriminant(&d, k_star, hi));
        }
        if (h0 - threshold).abs() <= BOUNDARY_TOL {
            k_minus = Some(0.0);
            SpectrumRegime::BoundaryKMinusZero
        } else if h0 < threshold {
            if k_plus.is_some() {
                k_minus = Some(bisect_discriminant(&d, 0.0, k_star));
            }
            SpectrumRegime::TwoComplexBands
        } else {
            SpectrumRegime::MergedComplexBand
        }
    };
    Ok(SpectrumReport {
        stable,
        regime,
        k_minus,
        k_plus,
        tip_lambda_plus: tip_plus,
        tip_lambda_minus: tip_minus,
        margin: margins.grid_max,
    })
}

/// Scaled tip `λ̃ = −2γ/(2τ − H0)` of the super-slow essential spectrum; `λ = ε²λ̃`.
pub fn tip_lambda_superslow(params: &ModelParams, spec: &ReactionSpec) -> Result<f64> {
    let gamma = match params.regime {
        Regime::SuperSlow { gamma } => gamma,
        Regime::Regular { .. } => return Err(Error::Regime("tip formula needs the super-slow regime".into())),
    };
    let gap = 2.0 * params.tau - spec.h0();
    if gap <= 0.01 {
        return Err(Error::Precondition(format!("2τ − H0 = {gap} must exceed 0.01")));
    }
    Ok(-2.0 * gamma / gap)
}

/// CSV with columns `k,re_lambda1,im_lambda1,re_lambda2,im_lambda2`.
pub fn write_dispersion_csv(points: &[DispersionPoint], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "k,re_lambda1,im_lambda1,re_lambda2,im_lambda2")?;
    for p in points {
        writeln!(
            out,
            "{},{:.15e},{:.15e},{:.15e},{:.15e}",
            p.k, p.lambda1.re, p.lambda1.im, p.lambda2.re, p.lambda2.im
        )?;
    }
    Ok(())
}
