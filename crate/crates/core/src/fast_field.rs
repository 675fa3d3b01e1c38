//! Closed-form fast-field objects and the quadratures over the fast field.
//!
//! The fast front at slow level `v0` is
//! `u0 = √(1+v0)·tanh(√((1+v0)/2)·ξ)`, `p0 = ∂ξ u0`.

use crate::error::{Error, Result};
use crate::model::ReactionSpec;
use crate::quadrature::integrate;
use std::f64::consts::SQRT_2;

/// Absolute tolerance of every fast-field quadrature.
pub const FAST_ABS_TOL: f64 = 1e-10;
/// Truncation half-width is `XI_CUTOFF / √(1+v0)`.
pub const XI_CUTOFF: f64 = 40.0;
const INITIAL_PANELS: usize = 8;

fn check_level(v0: f64) -> Result<f64> {
    if v0 > -1.0 && v0.is_finite() {
        Ok(1.0 + v0)
    } else {
        Err(Error::Domain(format!("slow level v0 = {v0} must exceed -1")))
    }
}

/// Fast heteroclinic front at a fixed slow level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastFront {
    v0: f64,
    amp: f64,
    rate: f64,
}

impl FastFront {
    pub fn new(v0: f64) -> Result<Self> {
        let s = check_level(v0)?;
        Ok(Self { v0, amp: s.sqrt(), rate: (0.5 * s).sqrt() })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    #[inline]
    pub fn u0(&self, xi: f64) -> f64 {
        self.amp * (self.rate * xi).tanh()
    }

    #[inline]
    pub fn p0(&self, xi: f64) -> f64 {
        let sech = 1.0 / (self.rate * xi).cosh();
        (1.0 + self.v0) / SQRT_2 * sech * sech
    }

    /// `(u0 + ξ·u0')/(2(1+v0))`, the bounded solution of
    /// `u'' + (1+v0−3u0²)u + u0 = 0`.
    #[inline]
    pub fn u_in(&self, xi: f64) -> f64 {
        (self.u0(xi) + xi * self.p0(xi)) / (2.0 * (1.0 + self.v0))
    }

    /// Quadrature truncation half-width in ξ.
    pub fn cutoff(&self) -> f64 {
        XI_CUTOFF / self.amp
    }
}

pub fn fast_front_eval(xi: f64, v0: f64) -> Result<(f64, f64)> {
    let f = FastFront::new(v0)?;
    Ok((f.u0(xi), f.p0(xi)))
}

pub fn u_inhomogeneous(xi: f64, v0: f64) -> Result<f64> {
    Ok(FastFront::new(v0)?.u_in(xi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastQuadratureResult {
    pub value: f64,
    /// Bound on the discarded tails beyond the cutoff.
    pub truncation_bound: f64,
    pub abs_tol: f64,
    pub error_estimate: f64,
}

/// Integrates an even integrand over `[−Ξ, Ξ]`.
fn even_integral(front: &FastFront, f: impl Fn(f64) -> f64) -> Result<FastQuadratureResult> {
    let cut = front.cutoff();
    let q = integrate(&f, 0.0, cut, 0.5 * FAST_ABS_TOL, INITIAL_PANELS)?;
    // integrands decay like sech², i.e. at rate 2·rate
    let truncation_bound = 2.0 * f(cut).abs() / (2.0 * front.rate);
    Ok(FastQuadratureResult {
        value: 2.0 * q.value,
        truncation_bound,
        abs_tol: FAST_ABS_TOL,
        error_estimate: 2.0 * q.error_estimate,
    })
}

/// `J(v0) = ∫ (1+v0−u0²)·H(u0², v0) dξ`.
pub fn jump_integral_j(v0: f64, spec: &ReactionSpec) -> Result<FastQuadratureResult> {
    let front = FastFront::new(v0)?;
    let s = 1.0 + v0;
    even_integral(&front, |xi| {
        let u2 = front.u0(xi).powi(2);
        (s - u2) * spec.h(u2, v0)
    })
}

/// `J'(v0) = (I1 + 2·I2)/(2(1+v0))`, differentiating under the integral.
pub fn jump_integral_derivative(v0: f64, spec: &ReactionSpec) -> Result<f64> {
    let front = FastFront::new(v0)?;
    let s = 1.0 + v0;
    let q = even_integral(&front, |xi| {
        let u2 = front.u0(xi).powi(2);
        let w = s - u2;
        w * (spec.h(u2, v0) + 2.0 * (u2 * spec.dh_dusq(u2, v0) + s * spec.dh_dv(u2, v0)))
    })?;
    Ok(q.value / (2.0 * s))
}

/// Leading-order splitting distance of the unstable and stable manifolds.
pub fn melnikov_splitting(q0: f64) -> f64 {
    -q0 * SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityIntegrals {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl StabilityIntegrals {
    /// `I1 + 2·I2`, the combination entering the slow transmission function.
    pub fn forcing(&self) -> f64 {
        self.i1 + 2.0 * self.i2
    }
}

/// ```text
/// I1 = ∫ (1+v0−u0²) H dξ
/// I2 = ∫ (1+v0−u0²) [u0² ∂H/∂U² + (1+v0) ∂H/∂V] dξ
/// I3 = ∫ [(1+v0−u0²) ∂H/∂U² − H] ξ u0 u0' dξ
/// ```
/// Each is computed by its own quadrature; `I3 = −I1/2` is a consistency check.
pub fn stability_integrals(v0: f64, spec: &ReactionSpec) -> Result<StabilityIntegrals> {
    let front = FastFront::new(v0)?;
    let s = 1.0 + v0;
    let i1 = even_integral(&front, |xi| {
        let u2 = front.u0(xi).powi(2);
        (s - u2) * spec.h(u2, v0)
    })?
    .value;
    let i2 = even_integral(&front, |xi| {
        let u2 = front.u0(xi).powi(2);
        (s - u2) * (u2 * spec.dh_dusq(u2, v0) + s * spec.dh_dv(u2, v0))
    })?
    .value;
    let i3 = even_integral(&front, |xi| {
        let u = front.u0(xi);
        let u2 = u * u;
        ((s - u2) * spec.dh_dusq(u2, v0) - spec.h(u2, v0)) * xi * u * front.p0(xi)
    })?
    .value;
    Ok(StabilityIntegrals { i1, i2, i3 })
}

/// `(λ1f, λ2f, essential edge) = (0, −3(1+v0)/2, −2(1+v0))`.
pub fn fast_eigenvalues(v0: f64) -> Result<(f64, f64, f64)> {
    let s = check_level(v0)?;
    Ok((0.0, -1.5 * s, -2.0 * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearG, PowerH};

    fn quad(h0: f64) -> ReactionSpec {
        ReactionSpec::new(PowerH::new(h0, 1).unwrap(), LinearG::new(-1.0))
    }

    #[test]
    fn front_values() {
        let (u, p) = fast_front_eval(0.0, 0.0).unwrap();
        assert_eq!(u, 0.0);
        assert!((p - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let (u, p) = fast_front_eval(1e3, 3.0).unwrap();
        assert!((u - 2.0).abs() < 1e-15 && p.abs() < 1e-15);
        assert!(fast_front_eval(0.0, -1.0).is_err());
        assert!(u_inhomogeneous(0.0, 0.0).unwrap().abs() < 1e-16);
        assert_eq!(fast_eigenvalues(2.0).unwrap(), (0.0, -4.5, -6.0));
    }

    #[test]
    fn melnikov_is_linear() {
        assert_eq!(melnikov_splitting(0.0), 0.0);
        assert!((melnikov_splitting(1.0) + SQRT_2).abs() < 1e-15);
        assert!((melnikov_splitting(-2.0) - 2.0 * SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn j_vanishes_for_zero_h() {
        let j = jump_integral_j(1.3, &quad(0.0)).unwrap();
        assert_eq!(j.value, 0.0);
    }

    #[test]
    fn j_derivative_matches_difference_quotient() {
        let spec = quad(1.0);
        for v in [-0.5, 0.0, 2.0, 7.0] {
            let h = 1e-4;
            let fd = (jump_integral_j(v + h, &spec).unwrap().value
                - jump_integral_j(v - h, &spec).unwrap().value)
                / (2.0 * h);
            let an = jump_integral_derivative(v, &spec).unwrap();
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "v={v}: {fd} vs {an}");
        }
    }

    #[test]
    fn truncation_is_negligible() {
        let r = jump_integral_j(0.0, &quad(1.0)).unwrap();
        assert!(r.truncation_bound < 1e-20);
        assert!(r.error_estimate <= r.abs_tol);
    }
}
