//! Newton refinement of a front by Hermite–Simpson collocation of the
//! stationary system in the fast variable `ξ = x/ε`:
//!
//! ```text
//! u' = p,  p' = −(1+v−u²)u,  v' = εq,  q' = −ε[(1+v−u²)H(u²,v) + G(v)]
//! ```
//!
//! Reversibility `(u, p, v, q)(−ξ) = (−u, p, v, −q)` reduces the problem to
//! `[0, Ξ]` with `u(0) = q(0) = 0`. At `Ξ` the components along the two
//! unstable directions of the rest state `(1, 0, 0, 0)` are set to zero.

use super::profile::{Construction, FrontProfile};
use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::model::{ModelParams, ReactionSpec};
use nalgebra::{Matrix4, Vector4};

pub const MAX_NEWTON_STEPS: usize = 50;
pub const UPDATE_TOL: f64 = 1e-9;
const BAND: usize = 5;

type State = [f64; 4];

struct System<'a> {
    eps: f64,
    params: &'a ModelParams,
    spec: &'a ReactionSpec,
}

impl System<'_> {
    fn rhs(&self, y: &State) -> State {
        let [u, p, v, q] = *y;
        let u2 = u * u;
        let w = 1.0 + v - u2;
        let (g, _) = self.params.slow_source(self.spec, v);
        [p, -w * u, self.eps * q, -self.eps * (w * self.spec.h(u2, v) + g)]
    }

    fn jac(&self, y: &State) -> Matrix4<f64> {
        let [u, _, v, _] = *y;
        let u2 = u * u;
        let w = 1.0 + v - u2;
        let (_, dg) = self.params.slow_source(self.spec, v);
        let h = self.spec.h(u2, v);
        let fu = 2.0 * u * (-h + w * self.spec.dh_dusq(u2, v));
        let fv = h + w * self.spec.dh_dv(u2, v) + dg;
        let e = self.eps;
        Matrix4::new(
            0.0, 1.0, 0.0, 0.0, //
            -(1.0 + v - 3.0 * u2), 0.0, -u, 0.0, //
            0.0, 0.0, 0.0, e, //
            -e * fu, 0.0, -e * fv, 0.0,
        )
    }
}

/// Left eigenvectors of the unstable eigenvalues of `A` (real spectrum expected).
fn unstable_left_eigenvectors(a: &Matrix4<f64>) -> Result<[Vector4<f64>; 2]> {
    let eig = a.complex_eigenvalues();
    let mut lam: Vec<_> = eig.iter().copied().filter(|z| z.re > 0.0).collect();
    if lam.len() != 2 || lam.iter().any(|z| z.im.abs() > 1e-12 * z.norm().max(1.0)) {
        return Err(Error::SolverFailure(format!("rest state is not a real saddle: {eig:?}")));
    }
    lam.sort_by(|x, y| x.re.total_cmp(&y.re));
    let at = a.transpose();
    let mut out = [Vector4::zeros(); 2];
    for (k, z) in lam.iter().enumerate() {
        let m = at - Matrix4::identity() * z.re;
        let svd = m.svd(false, true);
        let vt = svd.v_t.ok_or_else(|| Error::SolverFailure("svd failed".into()))?;
        let (imin, _) = svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &s)| {
            if s < b.1 {
                (i, s)
            } else {
                b
            }
        });
        out[k] = vt.row(imin).transpose();
    }
    Ok(out)
}

/// Refines `seed` by damped Newton; converged when the sup-norm update drops below `1e−9`.
///
/// The mesh is the non-negative half of the seed's grid.
pub fn refine_front_bvp(seed: &FrontProfile, spec: &ReactionSpec) -> Result<FrontProfile> {
    let params = seed.params;
    let eps = params.epsilon;
    let sys = System { eps, params: &params, spec };
    let c = seed.len() / 2;
    if seed.len().is_multiple_of(2) || seed.x[c] != 0.0 {
        return Err(Error::Precondition("seed grid must have a node at x = 0".into()));
    }
    let xi: Vec<f64> = seed.x[c..].iter().map(|x| x / eps).collect();
    let m = xi.len() - 1;
    let n = 4 * (m + 1);
    let mut y: Vec<f64> = Vec::with_capacity(n);
    for i in c..seed.len() {
        y.extend_from_slice(&[seed.u[i], eps * seed.ux[i], seed.v[i], seed.vx[i]]);
    }
    y[0] = 0.0;
    y[3] = 0.0;
    let rest: State = [1.0, 0.0, 0.0, 0.0];
    let ell = unstable_left_eigenvectors(&sys.jac(&rest))?;

    let residual_norm = |y: &[f64]| -> f64 { assemble(&sys, &xi, y, &ell, &rest, false).1.iter().fold(0.0f64, |a, r| a.max(r.abs())) };
    let mut res = residual_norm(&y);
    for step in 0..MAX_NEWTON_STEPS {
        let (jac, r) = assemble(&sys, &xi, &y, &ell, &rest, true);
        let jac = jac.expect("jacobian requested");
        let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
        jac.factor()?.solve_in_place(&mut delta);
        let dmax = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        if !dmax.is_finite() {
            return Err(Error::NoConvergence { iterations: step, residual: res });
        }
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = y.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
            let r_trial = residual_norm(&trial);
            if r_trial.is_finite() && (r_trial < res || t * dmax < UPDATE_TOL) {
                y = trial;
                res = r_trial;
                break;
            }
            t *= 0.5;
            if t < 1.0 / 1024.0 {
                return Err(Error::NoConvergence { iterations: step + 1, residual: res });
            }
        }
        log::debug!("bvp newton step {step}: |dy| = {:.3e}, t = {t}, |R| = {res:.3e}", t * dmax);
        if t * dmax < UPDATE_TOL {
            return Ok(mirror(seed, &xi, &y, eps));
        }
    }
    Err(Error::NoConvergence { iterations: MAX_NEWTON_STEPS, residual: res })
}

/// Residual and (optionally) banded Jacobian.
///
/// Rows: `u(0)`, `q(0)`, then four collocation rows per interval, then the
/// two projections at `Ξ`.
fn assemble(
    sys: &System<'_>,
    xi: &[f64],
    y: &[f64],
    ell: &[Vector4<f64>; 2],
    rest: &State,
    with_jac: bool,
) -> (Option<BandMatrix<f64>>, Vec<f64>) {
    let m = xi.len() - 1;
    let n = 4 * (m + 1);
    let mut r = vec![0.0; n];
    let mut jac = with_jac.then(|| BandMatrix::zeros(n, BAND, BAND));
    let node = |i: usize| -> State { [y[4 * i], y[4 * i + 1], y[4 * i + 2], y[4 * i + 3]] };

    r[0] = y[0];
    r[1] = y[3];
    if let Some(j) = jac.as_mut() {
        j.set(0, 0, 1.0);
        j.set(1, 3, 1.0);
    }
    let mut f_next = sys.rhs(&node(0));
    let mut a_next = with_jac.then(|| sys.jac(&node(0)));
    for i in 0..m {
        let h = xi[i + 1] - xi[i];
        let (y0, y1) = (node(i), node(i + 1));
        let f0 = f_next;
        let f1 = sys.rhs(&y1);
        let mut ym = [0.0; 4];
        for k in 0..4 {
            ym[k] = 0.5 * (y0[k] + y1[k]) + h / 8.0 * (f0[k] - f1[k]);
        }
        let fm = sys.rhs(&ym);
        let row = 2 + 4 * i;
        for k in 0..4 {
            r[row + k] = y1[k] - y0[k] - h / 6.0 * (f0[k] + 4.0 * fm[k] + f1[k]);
        }
        if let Some(j) = jac.as_mut() {
            let a0 = a_next.unwrap();
            let a1 = sys.jac(&y1);
            let am = sys.jac(&ym);
            let id = Matrix4::<f64>::identity();
            let d0 = -id - (a0 + am * (id * 0.5 + a0 * (h / 8.0)) * 4.0) * (h / 6.0);
            let d1 = id - (a1 + am * (id * 0.5 - a1 * (h / 8.0)) * 4.0) * (h / 6.0);
            for k in 0..4 {
                for l in 0..4 {
                    j.set(row + k, 4 * i + l, d0[(k, l)]);
                    j.set(row + k, 4 * (i + 1) + l, d1[(k, l)]);
                }
            }
            a_next = Some(a1);
        }
        f_next = f1;
    }
    let last = node(m);
    for (k, l) in ell.iter().enumerate() {
        let row = n - 2 + k;
        r[row] = (0..4).map(|c| l[c] * (last[c] - rest[c])).sum();
        if let Some(j) = jac.as_mut() {
            for c in 0..4 {
                j.set(row, 4 * m + c, l[c]);
            }
        }
    }
    (jac, r)
}

fn mirror(seed: &FrontProfile, xi: &[f64], y: &[f64], eps: f64) -> FrontProfile {
    let m = xi.len() - 1;
    let total = 2 * m + 1;
    let mut x = vec![0.0; total];
    let mut u = vec![0.0; total];
    let mut v = vec![0.0; total];
    let mut ux = vec![0.0; total];
    let mut vx = vec![0.0; total];
    for i in 0..=m {
        let (uu, pp, vv, qq) = (y[4 * i], y[4 * i + 1], y[4 * i + 2], y[4 * i + 3]);
        let (r, l) = (m + i, m - i);
        x[r] = eps * xi[i];
        x[l] = -x[r];
        u[r] = uu;
        u[l] = -uu;
        ux[r] = pp / eps;
        ux[l] = pp / eps;
        v[r] = vv;
        v[l] = vv;
        vx[r] = qq;
        vx[l] = -qq;
    }
    FrontProfile { x, u, v: v.clone(), ux, vx, v0: v[m], construction: Construction::BvpRefined, params: seed.params }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::existence::profile::build_composite_front;
    use crate::model::{LinearG, PowerH};

    #[test]
    fn regular_front_refines() {
        let p = ModelParams::regular(0.1, 1.0, -1.0).unwrap();
        let spec = ReactionSpec::new(PowerH::new(1.0, 1).unwrap(), LinearG::new(-1.0));
        let seed = build_composite_front(0.0471, &p, None, 2001).unwrap();
        let f = refine_front_bvp(&seed, &spec).unwrap();
        let c = f.len() / 2;
        assert!((f.v[c] - 0.0471).abs() < 0.01, "{}", f.v[c]);
        assert!((f.u.last().unwrap() - 1.0).abs() < 1e-6);
        assert!(f.v.last().unwrap().abs() < 1e-6);
    }
}
