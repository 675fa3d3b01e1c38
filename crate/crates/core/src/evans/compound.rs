//! Evans function by the compound-matrix method.
//!
//! The unstable 2-plane at `−∞` and the stable 2-plane at `+∞` are carried
//! as 2-vectors in `Λ²ℂ⁴ ≅ ℂ⁶` with coordinates ordered `12, 13, 14, 23, 24, 34`.
//! Each is integrated in the frame rotating with its asymptotic growth rate,
//! so the state stays O(1) in the tails.

use super::linearization::{asymptotic_system, det4, mat_vec, AsymptoticSystem, CMat4, CVec4, LinearizationContext};
use super::ode::{integrate, Solution};
use crate::error::Result;
use num_complex::Complex64;
use serde::Serialize;

pub type C6 = [Complex64; 6];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
const H_INIT: f64 = 0.05;
const H_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvansMethod {
    CompoundMatrix,
    JumpMatching,
    AnalyticLeadingOrder,
}

/// `D = d·exp(log_scale)`; `t1`, `t2` are NaN when not extracted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvansEvaluation {
    pub lambda: Complex64,
    pub d: Complex64,
    pub log_scale: f64,
    pub t1: Complex64,
    pub t2: Complex64,
    pub method: EvansMethod,
}

impl EvansEvaluation {
    pub fn value(&self) -> Complex64 {
        self.d * self.log_scale.exp()
    }
}

pub fn wedge2(a: &CVec4, b: &CVec4) -> C6 {
    PAIRS.map(|(i, j)| a[i] * b[j] - a[j] * b[i])
}

/// `w ∧ z` for two 2-vectors, as the coefficient of `e1∧e2∧e3∧e4`.
pub fn wedge4(w: &C6, z: &C6) -> Complex64 {
    w[0] * z[5] - w[1] * z[4] + w[2] * z[3] + w[3] * z[2] - w[4] * z[1] + w[5] * z[0]
}

/// Induced action of `A` on 2-vectors: `(A^{(2)} w)` for `w = a∧b` is `Aa∧b + a∧Ab`.
pub fn compound_matrix(a: &CMat4) -> [[Complex64; 6]; 6] {
    let mut m = [[ZERO; 6]; 6];
    for (col, &(k, l)) in PAIRS.iter().enumerate() {
        let mut ek = [ZERO; 4];
        let mut el = [ZERO; 4];
        ek[k] = Complex64::new(1.0, 0.0);
        el[l] = Complex64::new(1.0, 0.0);
        let ak = mat_vec(a, &ek);
        let al = mat_vec(a, &el);
        let w1 = wedge2(&ak, &el);
        let w2 = wedge2(&ek, &al);
        for row in 0..6 {
            m[row][col] = w1[row] + w2[row];
        }
    }
    m
}

fn apply6(m: &[[Complex64; 6]; 6], y: &C6, shift: Complex64) -> C6 {
    let mut out = [ZERO; 6];
    for i in 0..6 {
        let mut s = -shift * y[i];
        for j in 0..6 {
            s += m[i][j] * y[j];
        }
        out[i] = s;
    }
    out
}

/// Shifted 2-vector flow from `from` to `to`.
fn flow6(ctx: &LinearizationContext, lambda: Complex64, shift: Complex64, from: f64, to: f64, y0: C6) -> Result<Solution<6>> {
    integrate(
        |xi, y| apply6(&compound_matrix(&ctx.assemble(xi, lambda)), y, shift),
        from,
        to,
        y0,
        H_INIT,
        H_MAX,
    )
}

/// Shifted single-vector flow.
fn flow4(ctx: &LinearizationContext, lambda: Complex64, shift: Complex64, from: f64, to: f64, y0: CVec4) -> Result<Solution<4>> {
    integrate(
        |xi, y| {
            let mut out = mat_vec(&ctx.assemble(xi, lambda), y);
            for i in 0..4 {
                out[i] -= shift * y[i];
            }
            out
        },
        from,
        to,
        y0,
        H_INIT,
        H_MAX,
    )
}

pub(crate) fn start_xi(ctx: &LinearizationContext) -> f64 {
    ctx.tail_start()
}

/// `D(λ)` alone: two integrations meeting at `ξ = 0`.
pub fn evans_value(lambda: Complex64, ctx: &LinearizationContext) -> Result<EvansEvaluation> {
    let asym = asymptotic_system(lambda, &ctx.params, &ctx.spec)?;
    let (dm, dp) = half_flows(lambda, ctx, &asym)?;
    let d = wedge4(&dm.y, &dp.y);
    Ok(EvansEvaluation {
        lambda,
        d,
        log_scale: dm.log_scale + dp.log_scale,
        t1: Complex64::new(f64::NAN, f64::NAN),
        t2: Complex64::new(f64::NAN, f64::NAN),
        method: EvansMethod::CompoundMatrix,
    })
}

fn half_flows(lambda: Complex64, ctx: &LinearizationContext, asym: &AsymptoticSystem) -> Result<(Solution<6>, Solution<6>)> {
    let x = start_xi(ctx);
    let l = asym.big_lambda;
    let minus = flow6(ctx, lambda, l[0] + l[1], -x, 0.0, wedge2(&asym.e_minus[0], &asym.e_minus[1]))?;
    let plus = flow6(ctx, lambda, l[2] + l[3], x, 0.0, wedge2(&asym.e_plus[2], &asym.e_plus[3]))?;
    Ok((minus, plus))
}

/// `D(λ)` together with the transmission coefficients.
///
/// `t1` is the coefficient of `E1+` in the continuation of the fastest
/// mode from `−∞`; `t1·t2` is the `E1+∧E2+` coefficient of the continued
/// unstable 2-plane, so `D = t1·t2·det[E+]` up to integration error.
/// The reported `t1` shares the scale factor `exp(log_scale)` of `D`, since
/// both grow exponentially with the length of the slow field.
pub fn evans_compound(lambda: Complex64, ctx: &LinearizationContext) -> Result<EvansEvaluation> {
    let asym = asymptotic_system(lambda, &ctx.params, &ctx.spec)?;
    let (dm, dp) = half_flows(lambda, ctx, &asym)?;
    let d = wedge4(&dm.y, &dp.y);
    let log_scale = dm.log_scale + dp.log_scale;
    let tr = transmission(lambda, ctx, &asym, &dm)?;
    let t1 = tr.t1 * (tr.t1_log - log_scale).exp();
    let t2 = if tr.t1.norm() > 0.0 {
        tr.t12 / tr.t1 * (tr.t12_log - tr.t1_log).exp()
    } else {
        Complex64::new(f64::NAN, f64::NAN)
    };
    Ok(EvansEvaluation { lambda, d, log_scale, t1, t2, method: EvansMethod::CompoundMatrix })
}

/// Mantissas and log-scales of `t1` and `t1·t2`.
pub(crate) struct Transmission {
    pub t1: Complex64,
    pub t1_log: f64,
    pub t12: Complex64,
    pub t12_log: f64,
}

/// Continues the `−∞` solutions to `+Ξ` and projects onto the `+∞` eigenbasis.
pub(crate) fn transmission(
    lambda: Complex64,
    ctx: &LinearizationContext,
    asym: &AsymptoticSystem,
    minus_at_zero: &Solution<6>,
) -> Result<Transmission> {
    let x = start_xi(ctx);
    let l = asym.big_lambda;
    let cont = flow6(ctx, lambda, l[0] + l[1], 0.0, x, minus_at_zero.y)?;
    let w34 = wedge2(&asym.e_plus[2], &asym.e_plus[3]);
    let t12 = wedge4(&cont.y, &w34) / det_plus(asym);
    let fast = flow4(ctx, lambda, l[0], -x, x, asym.e_minus[0])?;
    let ell = asym.l_plus[0];
    let t1 = (0..4).map(|k| ell[k] * fast.y[k]).sum::<Complex64>();
    Ok(Transmission { t1, t1_log: fast.log_scale, t12, t12_log: minus_at_zero.log_scale + cont.log_scale })
}

pub fn det_plus(asym: &AsymptoticSystem) -> Complex64 {
    det4(&asym.e_plus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(i: usize) -> CVec4 {
        let mut e = [ZERO; 4];
        e[i] = Complex64::new(1.0, 0.0);
        e
    }

    #[test]
    fn wedge_of_complementary_planes_is_the_determinant() {
        let cols: [CVec4; 4] = std::array::from_fn(|j| {
            std::array::from_fn(|i| Complex64::new((1 + i * j) as f64 * 0.3, (i as f64 - j as f64) * 0.1))
        });
        let lhs = wedge4(&wedge2(&cols[0], &cols[1]), &wedge2(&cols[2], &cols[3]));
        assert!((lhs - det4(&cols)).norm() < 1e-13);
        assert_eq!(wedge4(&wedge2(&basis(0), &basis(1)), &wedge2(&basis(2), &basis(3))), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn compound_matrix_is_the_derivation_on_two_vectors() {
        let a: CMat4 = std::array::from_fn(|i| std::array::from_fn(|j| Complex64::new((i * 4 + j) as f64 * 0.1 - 0.7, 0.05 * j as f64)));
        let x = [Complex64::new(1.0, 0.2), Complex64::new(-0.3, 0.0), Complex64::new(0.5, -1.0), Complex64::new(0.1, 0.1)];
        let y = [Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0), Complex64::new(-0.4, 0.3), Complex64::new(1.0, 0.0)];
        let m = compound_matrix(&a);
        let w = wedge2(&x, &y);
        let lhs = apply6(&m, &w, ZERO);
        let ax = mat_vec(&a, &x);
        let ay = mat_vec(&a, &y);
        let r1 = wedge2(&ax, &y);
        let r2 = wedge2(&x, &ay);
        for k in 0..6 {
            assert!((lhs[k] - r1[k] - r2[k]).norm() < 1e-13);
        }
    }
}
