//! Discretized-operator eigenvalues, independent of the Evans machinery.
//!
//! The linearized operator is discretized by second-order finite differences
//! in ξ on a sinh-stretched symmetric grid with Neumann ends, giving the
//! banded generalized problem `A x = λ B x` with `B = diag(1, ε²τ)` per node.
//! Eigenvalues near a few real shifts come from shift-invert Arnoldi and are
//! polished by inverse iteration. Solving at `N` and `2N` on the
//! same map gives a Richardson value and an error estimate; a third solve on
//! a shorter domain measures how far each eigenvalue moves with truncation,
//! which is what separates the discretized essential spectrum from point
//! spectrum when its eigenvalues drift off the dispersion curves.

use super::linearization::LinearizationContext;
use crate::error::{Error, Result};
use crate::essential_spectrum::Dispersion;
use crate::grid;
use crate::linalg::BandMatrix;
use crate::model::Regime;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Center spacing in ξ at `N = 4096`; scales like `1/N`.
const H_CENTER_4096: f64 = 0.1;
const ARNOLDI_STEPS: usize = 60;
const INVERSE_STEPS: usize = 100;
const RITZ_PER_SHIFT: usize = 16;
const RESIDUAL_TOL: f64 = 1e-9;
/// Domain ratio of the extra solve that measures truncation sensitivity.
pub const TRUNCATION_RATIO: f64 = 0.75;
/// Eigenvalues within this many error estimates of `σ_ess` are labelled cluster.
pub const CLUSTER_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Intervals of the coarse grid; the fine grid has `2n`.
    pub n: usize,
    /// Half-width in ξ; defaults to the front's.
    pub half_width: Option<f64>,
    /// Real shifts for shift-invert; defaults depend on the regime.
    pub shifts: Option<Vec<f64>>,
    /// Eigenvalues with `Re λ` at or below this are dropped.
    pub re_floor: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n: 4096, half_width: None, shifts: None, re_floor: -2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEigenvalue {
    /// Richardson value `(4λ_2N − λ_N)/3`.
    pub value: Complex64,
    pub fine: Complex64,
    pub coarse: Complex64,
    pub error_estimate: f64,
    /// Shift of the coarse value when the domain shrinks by [`TRUNCATION_RATIO`].
    pub truncation_estimate: f64,
    /// Distance from `value` to the essential spectrum.
    pub essential_distance: f64,
    pub cluster: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub half_width: f64,
    pub eigenvalues: Vec<OracleEigenvalue>,
}

impl OracleReport {
    /// Isolated eigenvalues sorted by descending real part.
    pub fn isolated(&self) -> impl Iterator<Item = &OracleEigenvalue> {
        self.eigenvalues.iter().filter(|e| !e.cluster)
    }
}

/// Discretized eigenfunction on the symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvector {
    pub lambda: Complex64,
    pub xi: Vec<f64>,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

/// Assembled generalized problem on one grid.
struct Discretization {
    xi: Vec<f64>,
    a: BandMatrix<f64>,
    b: Vec<f64>,
    a_norm: f64,
}

impl Discretization {
    fn new(ctx: &LinearizationContext, half_width: f64, intervals: usize, h_center: f64) -> Result<Self> {
        let xi = grid::stretched(half_width, intervals + 1, h_center)?;
        let m = xi.len();
        let eps = ctx.epsilon();
        let e = eps * eps;
        let mut a = BandMatrix::zeros(2 * m, 2, 2);
        let mut b = vec![1.0; 2 * m];
        for i in 0..m {
            let k = ctx.coefficients_at(xi[i]);
            let (iu, iv) = (2 * i, 2 * i + 1);
            // second difference with mirrored ghost nodes at the ends
            let (wl, wr) = if i == 0 {
                (0.0, 2.0 / (xi[1] - xi[0]).powi(2))
            } else if i == m - 1 {
                (2.0 / (xi[m - 1] - xi[m - 2]).powi(2), 0.0)
            } else {
                let (hl, hr) = (xi[i] - xi[i - 1], xi[i + 1] - xi[i]);
                (2.0 / (hl * (hl + hr)), 2.0 / (hr * (hl + hr)))
            };
            for (off, row) in [(0usize, iu), (1, iv)] {
                a.add(row, row, -(wl + wr));
                if i > 0 {
                    a.add(row, 2 * (i - 1) + off, wl);
                }
                if i < m - 1 {
                    a.add(row, 2 * (i + 1) + off, wr);
                }
            }
            // λu = u'' + a·u + b·v,  ε²τλv = v'' − ε²c·u + ε²d·v
            a.add(iu, iu, k.a);
            a.add(iu, iv, k.b);
            a.add(iv, iu, -e * k.c);
            a.add(iv, iv, e * k.d);
            b[iv] = e * ctx.params.tau;
        }
        let a_norm = (0..2 * m)
            .map(|r| (r.saturating_sub(2)..=(r + 2).min(2 * m - 1)).map(|c| a.get(r, c).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self { xi, a, b, a_norm })
    }

    fn dim(&self) -> usize {
        self.b.len()
    }

    fn shifted(&self, sigma: Complex64) -> BandMatrix<Complex64> {
        let n = self.dim();
        let mut m = BandMatrix::zeros(n, 2, 2);
        for r in 0..n {
            for c in r.saturating_sub(2)..=(r + 2).min(n - 1) {
                let mut val = Complex64::new(self.a.get(r, c), 0.0);
                if r == c {
                    val -= sigma * self.b[r];
                }
                m.set(r, c, val);
            }
        }
        m
    }

    fn residual(&self, lambda: Complex64, x: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut r = 0.0f64;
        for i in 0..n {
            let mut s = -lambda * self.b[i] * x[i];
            for c in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                s += self.a.get(i, c) * x[c];
            }
            r = r.max(s.norm());
        }
        let xn = x.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        r / ((self.a_norm + lambda.norm()) * xn)
    }

    /// Ritz values of `(A − σB)⁻¹B` mapped back to `λ = σ + 1/μ`.
    fn arnoldi(&self, sigma: f64) -> Result<Vec<Complex64>> {
        let n = self.dim();
        let mut shifted = self.a.clone();
        for i in 0..n {
            shifted.add(i, i, -sigma * self.b[i]);
        }
        let lu = shifted.factor()?;
        let m = ARNOLDI_STEPS.min(n - 1);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let start = start_vector(n);
        let s = norm(&start);
        basis.push(start.iter().map(|x| x / s).collect());
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let mut k = m;
        for j in 0..m {
            let mut w: Vec<f64> = basis[j].iter().zip(&self.b).map(|(x, b)| x * b).collect();
            lu.solve_in_place(&mut w);
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                    h[(i, j)] += c;
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let beta = norm(&w);
            h[(j + 1, j)] = beta;
            if beta < 1e-12 * h[(0, 0)].abs().max(1e-300) {
                k = j + 1;
                break;
            }
            basis.push(w.iter().map(|x| x / beta).collect());
        }
        let hk = h.view((0, 0), (k, k)).into_owned();
        Ok(hk
            .complex_eigenvalues()
            .iter()
            .filter(|mu| mu.norm() > 0.0)
            .map(|mu| Complex64::new(sigma, 0.0) + 1.0 / mu)
            .collect())
    }

    /// Inverse iteration with the fixed shift `guess`.
    ///
    /// The shift is never updated, so the iteration cannot drift to a
    /// neighbouring eigenvalue of the dense cluster.
    fn polish(&self, guess: Complex64, scale: f64) -> Option<(Complex64, Vec<Complex64>)> {
        let n = self.dim();
        let lu = self.shifted(guess).factor().ok()?;
        let mut x: Vec<Complex64> = start_vector(n).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        let mut lambda = guess;
        for _ in 0..INVERSE_STEPS {
            let mut w: Vec<Complex64> = x.iter().zip(&self.b).map(|(x, b)| x * b).collect();
            lu.solve_in_place(&mut w);
            let xw: Complex64 = x.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            let xx: f64 = x.iter().map(|a| a.norm_sqr()).sum();
            let wn = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if !(wn.is_finite() && wn > 0.0) {
                return None;
            }
            x = w.into_iter().map(|a| a / wn).collect();
            let next = guess + xx / xw;
            let step = (next - lambda).norm();
            lambda = next;
            if step <= 1e-13 * lambda.norm().max(scale) {
                break;
            }
        }
        (self.residual(lambda, &x) < RESIDUAL_TOL).then_some((lambda, x))
    }

    fn eigenvalues(&self, shifts: &[f64], re_floor: f64, scale: f64) -> Result<Vec<Complex64>> {
        let mut ritz: Vec<Complex64> = Vec::new();
        for &s in shifts {
            let mut near: Vec<Complex64> =
                self.arnoldi(s)?.into_iter().filter(|l| l.re > re_floor && l.is_finite()).collect();
            // only the Ritz values nearest the shift are converged
            near.sort_by(|a, b| (a - s).norm().total_cmp(&(b - s).norm()));
            near.truncate(RITZ_PER_SHIFT);
            for l in near {
                if ritz.iter().all(|r| (r - l).norm() > 1e-6 * l.norm().max(scale)) {
                    ritz.push(l);
                }
            }
        }
        let mut found: Vec<Complex64> = ritz.par_iter().filter_map(|&g| self.polish(g, scale).map(|p| p.0)).collect();
        found.retain(|l| l.re > re_floor);
        found.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        let mut out: Vec<Complex64> = Vec::new();
        for l in found {
            if out.iter().all(|o| (o - l).norm() > 1e-8 * l.norm().max(scale)) {
                out.push(l);
            }
        }
        Ok(out)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Deterministic start vector with components of both parities.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * (0.37 * i as f64).sin() + 0.25 * (1.3 * i as f64).cos()).collect()
}

fn default_shifts(ctx: &LinearizationContext) -> Vec<f64> {
    let e = ctx.epsilon().powi(2);
    match ctx.params.regime {
        Regime::SuperSlow { .. } => vec![0.5 * e, -2.0 * e, -0.5, -1.0, -1.5],
        Regime::Regular { .. } => vec![0.05, -0.5, -1.0, -1.5],
    }
}

/// Coarse grid spacing at the center for `n` intervals.
fn h_center(n: usize) -> f64 {
    H_CENTER_4096 * 4096.0 / n as f64
}

/// Distance from `λ` to the dispersion curves `{λ1,2(k)}`.
pub fn essential_distance(d: &Dispersion, lambda: Complex64) -> f64 {
    let dist = |k: f64| {
        let (a, b) = d.roots(k);
        (a - lambda).norm().min((b - lambda).norm())
    };
    // log-spaced wavenumbers resolve both the slow (k ~ ε) and fast scales
    let ks: Vec<f64> = std::iter::once(0.0).chain((0..6000).map(|i| 10f64.powf(-8.0 + 11.0 * i as f64 / 5999.0))).collect();
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, &k) in ks.iter().enumerate() {
        let dk = dist(k);
        if dk < best {
            best = dk;
            best_i = i;
        }
    }
    let (mut a, mut b) = (ks[best_i.saturating_sub(1)], ks[(best_i + 1).min(ks.len() - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let e = a + g * (b - a);
        if dist(c) < dist(e) {
            b = e;
        } else {
            a = c;
        }
    }
    best.min(dist(0.5 * (a + b)))
}

/// Eigenvalues with `Re λ > re_floor` near the configured shifts.
pub fn discrete_spectrum_oracle(ctx: &LinearizationContext, config: &OracleConfig) -> Result<OracleReport> {
    if config.n < 16 {
        return Err(Error::Grid(format!("oracle needs at least 16 intervals, got {}", config.n)));
    }
    let half_width = config.half_width.unwrap_or_else(|| ctx.xi_max());
    let shifts = config.shifts.clone().unwrap_or_else(|| default_shifts(ctx));
    let scale = ctx.epsilon().powi(2);
    let grids = [
        (half_width, config.n, h_center(config.n)),
        (half_width, 2 * config.n, 0.5 * h_center(config.n)),
        (TRUNCATION_RATIO * half_width, config.n, h_center(config.n)),
    ];
    let sets: Vec<Vec<Complex64>> = grids
        .par_iter()
        .map(|&(l, n, h)| Discretization::new(ctx, l, n, h)?.eigenvalues(&shifts, config.re_floor, scale))
        .collect::<Result<_>>()?;
    let (lc, lf, lt) = (&sets[0], &sets[1], &sets[2]);
    let nearest = |set: &[Complex64], z: Complex64| set.iter().copied().min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()));
    let disp = Dispersion::new(&ctx.params, &ctx.spec);
    let eigenvalues = lf
        .par_iter()
        .map(|&f| {
            let (value, coarse, error_estimate) = match nearest(lc, f) {
                Some(c) => ((4.0 * f - c) / 3.0, c, (f - c).norm() / 3.0),
                None => (f, Complex64::new(f64::NAN, f64::NAN), f64::INFINITY),
            };
            let truncation_estimate = match (nearest(lt, f), nearest(lc, f)) {
                (Some(t), Some(c)) => (t - c).norm(),
                _ => f64::INFINITY,
            };
            let essential_distance = essential_distance(&disp, value);
            OracleEigenvalue {
                value,
                fine: f,
                coarse,
                error_estimate,
                truncation_estimate,
                essential_distance,
                cluster: essential_distance <= CLUSTER_FACTOR * (error_estimate + truncation_estimate),
            }
        })
        .collect();
    Ok(OracleReport { n: config.n, half_width, eigenvalues })
}

/// Eigenfunction for the eigenvalue nearest `guess` on the fine oracle grid.
pub fn oracle_eigenvector(ctx: &LinearizationContext, config: &OracleConfig, guess: Complex64) -> Result<Eigenvector> {
    let half_width = config.half_width.unwrap_or_else(|| ctx.xi_max());
    let disc = Discretization::new(ctx, half_width, 2 * config.n, 0.5 * h_center(config.n))?;
    let (lambda, x) = disc
        .polish(guess, ctx.epsilon().powi(2))
        .ok_or_else(|| Error::SolverFailure(format!("inverse iteration from {guess} did not converge")))?;
    let m = disc.xi.len();
    let u = (0..m).map(|i| x[2 * i]).collect();
    let v = (0..m).map(|i| x[2 * i + 1]).collect();
    Ok(Eigenvector { lambda, xi: disc.xi, u, v })
}
