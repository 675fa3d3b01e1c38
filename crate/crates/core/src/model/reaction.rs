use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// `H(U², V)` with its first partial derivatives.
pub trait HFunction: Send + Sync + fmt::Debug {
    fn h(&self, u_sq: f64, v: f64) -> f64;
    fn dh_dusq(&self, u_sq: f64, v: f64) -> f64;
    fn dh_dv(&self, u_sq: f64, v: f64) -> f64;

    /// `(h0, m)` when `H = h0·(U²)^m`; enables closed-form shortcuts.
    fn as_power(&self) -> Option<(f64, u32)> {
        None
    }
}

/// `G(V)` with its derivative.
pub trait GFunction: Send + Sync + fmt::Debug {
    fn g(&self, v: f64) -> f64;
    fn dg_dv(&self, v: f64) -> f64;
}

/// `H = h0·(U²)^m`, `m ∈ {0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerH {
    pub h0: f64,
    pub m: u32,
}

impl PowerH {
    pub fn new(h0: f64, m: u32) -> Result<Self> {
        if m > 2 {
            return Err(Error::InvalidParameter(format!("power H exponent m = {m} not in {{0,1,2}}")));
        }
        Ok(Self { h0, m })
    }
}

impl HFunction for PowerH {
    fn h(&self, u_sq: f64, _v: f64) -> f64 {
        self.h0 * u_sq.powi(self.m as i32)
    }
    fn dh_dusq(&self, u_sq: f64, _v: f64) -> f64 {
        match self.m {
            0 => 0.0,
            m => self.h0 * m as f64 * u_sq.powi(m as i32 - 1),
        }
    }
    fn dh_dv(&self, _u_sq: f64, _v: f64) -> f64 {
        0.0
    }
    fn as_power(&self) -> Option<(f64, u32)> {
        Some((self.h0, self.m))
    }
}

/// Polynomial table `H = Σ c[i][j]·(U²)^i·V^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableH {
    pub coeffs: Vec<Vec<f64>>,
}

impl TableH {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Self {
        Self { coeffs }
    }

    fn eval(&self, u_sq: f64, v: f64, du: u32, dv: u32) -> f64 {
        let mut sum = 0.0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                let (i, j) = (i as u32, j as u32);
                if c == 0.0 || i < du || j < dv {
                    continue;
                }
                let fi = falling(i, du);
                let fj = falling(j, dv);
                sum += c * fi * fj * u_sq.powi((i - du) as i32) * v.powi((j - dv) as i32);
            }
        }
        sum
    }
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|r| (n - r) as f64).product()
}

impl HFunction for TableH {
    fn h(&self, u_sq: f64, v: f64) -> f64 {
        self.eval(u_sq, v, 0, 0)
    }
    fn dh_dusq(&self, u_sq: f64, v: f64) -> f64 {
        self.eval(u_sq, v, 1, 0)
    }
    fn dh_dv(&self, u_sq: f64, v: f64) -> f64 {
        self.eval(u_sq, v, 0, 1)
    }
    fn as_power(&self) -> Option<(f64, u32)> {
        let mut nz = self
            .coeffs
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &c)| (i, j, c)))
            .filter(|&(_, _, c)| c != 0.0);
        match (nz.next(), nz.next()) {
            (Some((i, 0, c)), None) if i <= 2 => Some((c, i as u32)),
            (None, _) => Some((0.0, 0)),
            _ => None,
        }
    }
}

/// `G = g1·V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearG {
    pub g1: f64,
}

impl LinearG {
    pub fn new(g1: f64) -> Self {
        Self { g1 }
    }
}

impl GFunction for LinearG {
    fn g(&self, v: f64) -> f64 {
        self.g1 * v
    }
    fn dg_dv(&self, _v: f64) -> f64 {
        self.g1
    }
}

/// `G = g1·V + g2·V² + g3·V³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicG {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl GFunction for CubicG {
    fn g(&self, v: f64) -> f64 {
        v * (self.g1 + v * (self.g2 + v * self.g3))
    }
    fn dg_dv(&self, v: f64) -> f64 {
        self.g1 + v * (2.0 * self.g2 + 3.0 * v * self.g3)
    }
}

/// `G = Σ c[k]·V^k`; unlike the other built-ins it may violate `G(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialG {
    pub coeffs: Vec<f64>,
}

impl GFunction for PolynomialG {
    fn g(&self, v: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * v + c)
    }
    fn dg_dv(&self, v: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * v + k as f64 * c)
    }
}

/// Immutable pair `(H, G)` with the cached constants `H0 = H(1,0)` and `G1 = G'(0)`.
#[derive(Clone)]
pub struct ReactionSpec {
    h: Arc<dyn HFunction>,
    g: Arc<dyn GFunction>,
    h0: f64,
    g1: f64,
}

impl fmt::Debug for ReactionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionSpec")
            .field("h", &self.h)
            .field("g", &self.g)
            .field("h0", &self.h0)
            .field("g1", &self.g1)
            .finish()
    }
}

impl ReactionSpec {
    pub fn new(h: impl HFunction + 'static, g: impl GFunction + 'static) -> Self {
        Self::from_arcs(Arc::new(h), Arc::new(g))
    }

    pub fn from_arcs(h: Arc<dyn HFunction>, g: Arc<dyn GFunction>) -> Self {
        let h0 = h.h(1.0, 0.0);
        let g1 = g.dg_dv(0.0);
        Self { h, g, h0, g1 }
    }

    /// Same `H`, different `G`.
    pub fn with_g(&self, g: impl GFunction + 'static) -> Self {
        Self::from_arcs(self.h.clone(), Arc::new(g))
    }

    #[inline]
    pub fn h(&self, u_sq: f64, v: f64) -> f64 {
        self.h.h(u_sq, v)
    }
    #[inline]
    pub fn dh_dusq(&self, u_sq: f64, v: f64) -> f64 {
        self.h.dh_dusq(u_sq, v)
    }
    #[inline]
    pub fn dh_dv(&self, u_sq: f64, v: f64) -> f64 {
        self.h.dh_dv(u_sq, v)
    }
    #[inline]
    pub fn g(&self, v: f64) -> f64 {
        self.g.g(v)
    }
    #[inline]
    pub fn dg_dv(&self, v: f64) -> f64 {
        self.g.dg_dv(v)
    }
    pub fn h0(&self) -> f64 {
        self.h0
    }
    pub fn g1(&self) -> f64 {
        self.g1
    }

    /// Full reaction term `F = (1 + V − U²)·H + G`.
    #[inline]
    pub fn f(&self, u_sq: f64, v: f64) -> f64 {
        (1.0 + v - u_sq) * self.h(u_sq, v) + self.g(v)
    }

    /// `h0` when `H = h0·U²`.
    pub fn quadratic_h0(&self) -> Option<f64> {
        match self.h.as_power() {
            Some((h0, 1)) => Some(h0),
            _ => None,
        }
    }

    pub fn power_h(&self) -> Option<(f64, u32)> {
        self.h.as_power()
    }
}

/// Result of one structural check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
    pub h0: f64,
    pub g1: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const G_ZERO_TOL: f64 = 1e-12;
const DERIV_TOL: f64 = 1e-6;
const NONDEGENERACY_TOL: f64 = 1e-10;
const PROBE_USQ: (f64, f64) = (0.0, 9.0);
const PROBE_V: (f64, f64) = (-0.9, 9.0);

/// Twenty fixed probe points on `[0,9]×[−0.9,9]` (additive-recurrence sequence).
pub(crate) fn probe_points() -> [(f64, f64); 20] {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_3;
    let mut pts = [(0.0, 0.0); 20];
    for (k, p) in pts.iter_mut().enumerate() {
        let s = (0.5 + A1 * k as f64).fract();
        let t = (0.5 + A2 * k as f64).fract();
        *p = (
            PROBE_USQ.0 + (PROBE_USQ.1 - PROBE_USQ.0) * s,
            PROBE_V.0 + (PROBE_V.1 - PROBE_V.0) * t,
        );
    }
    pts
}

fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn finite(what: &'static str, u_sq: f64, v: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteEvaluation { what, u_sq, v })
    }
}

/// Checks `G(0) = 0`, derivative consistency and non-degeneracy of `H(1+v, v)`.
pub fn validate_reaction_spec(spec: &ReactionSpec) -> Result<ValidationReport> {
    let mut checks = Vec::with_capacity(5);

    let g0 = finite("G", 1.0, 0.0, spec.g(0.0))?;
    checks.push(ValidationCheck {
        name: "G(0) = 0",
        passed: g0.abs() <= G_ZERO_TOL,
        residual: g0.abs(),
        tolerance: G_ZERO_TOL,
    });

    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let (mut r_hu, mut r_hv, mut r_g) = (0.0f64, 0.0f64, 0.0f64);
    for (u_sq, v) in probe_points() {
        finite("H", u_sq, v, spec.h(u_sq, v))?;
        let a_hu = finite("dH/dU2", u_sq, v, spec.dh_dusq(u_sq, v))?;
        let a_hv = finite("dH/dV", u_sq, v, spec.dh_dv(u_sq, v))?;
        finite("G", u_sq, v, spec.g(v))?;
        let a_g = finite("dG/dV", u_sq, v, spec.dg_dv(v))?;
        let fd_hu = finite("H", u_sq, v, central_diff(|s| spec.h(s, v), u_sq))?;
        let fd_hv = finite("H", u_sq, v, central_diff(|s| spec.h(u_sq, s), v))?;
        let fd_g = finite("G", u_sq, v, central_diff(|s| spec.g(s), v))?;
        r_hu = r_hu.max(rel(a_hu, fd_hu));
        r_hv = r_hv.max(rel(a_hv, fd_hv));
        r_g = r_g.max(rel(a_g, fd_g));
    }
    for (name, r) in [("dH/dU2 consistent", r_hu), ("dH/dV consistent", r_hv), ("dG/dV consistent", r_g)] {
        checks.push(ValidationCheck { name, passed: r <= DERIV_TOL, residual: r, tolerance: DERIV_TOL });
    }

    let n = 2001;
    let mut max_h = 0.0f64;
    for i in 0..n {
        let v = PROBE_V.0 + (PROBE_V.1 - PROBE_V.0) * i as f64 / (n - 1) as f64;
        max_h = max_h.max(finite("H", 1.0 + v, v, spec.h(1.0 + v, v))?.abs());
    }
    checks.push(ValidationCheck {
        name: "H(1+v, v) non-degenerate",
        passed: max_h > NONDEGENERACY_TOL,
        residual: max_h,
        tolerance: NONDEGENERACY_TOL,
    });

    Ok(ValidationReport { checks, h0: spec.h0(), g1: spec.g1() })
}

const SINGULAR_GAP: f64 = 1e-6;
const LIMIT_STEP: f64 = 1e-5;

/// Splits `F` at one probe into `(H, G)` with `G = F(1+v, v)`.
///
/// On the line `U² = 1 + V` the quotient is replaced by its removable limit
/// `−∂F/∂(U²)(1+v, v)`.
pub fn decompose_f(f: &dyn Fn(f64, f64) -> f64, v: f64, u_sq: f64) -> (f64, f64) {
    let g = f(1.0 + v, v);
    let gap = 1.0 + v - u_sq;
    let h = if gap.abs() > SINGULAR_GAP {
        (f(u_sq, v) - g) / gap
    } else {
        let s = 1.0 + v;
        -(f(s + LIMIT_STEP, v) - f(s - LIMIT_STEP, v)) / (2.0 * LIMIT_STEP)
    };
    (h, g)
}

type SourceF = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `(H, G)` derived from a general reaction term `F(U², V)`.
#[derive(Clone)]
pub struct DecomposedReaction {
    f: SourceF,
}

impl fmt::Debug for DecomposedReaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DecomposedReaction")
    }
}

impl DecomposedReaction {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }

    pub fn source(&self, u_sq: f64, v: f64) -> f64 {
        (self.f)(u_sq, v)
    }

    pub fn split(&self, u_sq: f64, v: f64) -> (f64, f64) {
        decompose_f(&*self.f, v, u_sq)
    }

    /// `(1 + V − U²)·H + G`, which should reproduce `F`.
    pub fn reconstruct(&self, u_sq: f64, v: f64) -> f64 {
        let (h, g) = self.split(u_sq, v);
        (1.0 + v - u_sq) * h + g
    }

    /// Derivatives are central differences of the derived `H` and `G`.
    pub fn spec(&self) -> ReactionSpec {
        let arc = Arc::new(self.clone());
        ReactionSpec::from_arcs(arc.clone(), arc)
    }
}

impl HFunction for DecomposedReaction {
    fn h(&self, u_sq: f64, v: f64) -> f64 {
        self.split(u_sq, v).0
    }
    fn dh_dusq(&self, u_sq: f64, v: f64) -> f64 {
        central_diff(|s| self.h(s, v), u_sq)
    }
    fn dh_dv(&self, u_sq: f64, v: f64) -> f64 {
        central_diff(|s| self.h(u_sq, s), v)
    }
}

impl GFunction for DecomposedReaction {
    fn g(&self, v: f64) -> f64 {
        (self.f)(1.0 + v, v)
    }
    fn dg_dv(&self, v: f64) -> f64 {
        central_diff(|s| self.g(s), v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(h0: f64, g1: f64) -> ReactionSpec {
        ReactionSpec::new(PowerH::new(h0, 1).unwrap(), LinearG::new(g1))
    }

    #[test]
    fn quadratic_h_linear_g_passes() {
        let eps: f64 = 0.1;
        let gamma = 2.0;
        let spec = quadratic(1.0, -eps * eps * gamma);
        let report = validate_reaction_spec(&spec).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.h0, 1.0);
        assert_eq!(report.g1, -eps * eps * gamma);
    }

    #[test]
    fn zero_reaction_is_degenerate() {
        let spec = quadratic(0.0, 0.0);
        let report = validate_reaction_spec(&spec).unwrap();
        assert!(!report.passed());
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        assert_eq!(failed, vec!["H(1+v, v) non-degenerate"]);
    }

    #[test]
    fn excluded_degenerate_class_fails() {
        // H vanishes identically on U² = 1 + V.
        let h = TableH::new(vec![vec![0.0], vec![1.0, 1.0], vec![-1.0]]);
        let spec = ReactionSpec::new(h, LinearG::new(-1.0));
        let report = validate_reaction_spec(&spec).unwrap();
        assert!(!report.passed());
        assert!(report.failures().any(|c| c.name == "H(1+v, v) non-degenerate"));
    }

    #[test]
    fn wrong_derivative_is_caught() {
        #[derive(Debug)]
        struct Bad;
        impl HFunction for Bad {
            fn h(&self, u_sq: f64, _v: f64) -> f64 {
                u_sq * u_sq
            }
            fn dh_dusq(&self, u_sq: f64, _v: f64) -> f64 {
                u_sq
            }
            fn dh_dv(&self, _: f64, _: f64) -> f64 {
                0.0
            }
        }
        let report = validate_reaction_spec(&ReactionSpec::new(Bad, LinearG::new(-1.0))).unwrap();
        assert!(report.failures().any(|c| c.name == "dH/dU2 consistent"));
    }

    #[test]
    fn non_finite_is_an_error() {
        #[derive(Debug)]
        struct Nan;
        impl HFunction for Nan {
            fn h(&self, u_sq: f64, _v: f64) -> f64 {
                (u_sq - 3.0).ln()
            }
            fn dh_dusq(&self, u_sq: f64, _v: f64) -> f64 {
                1.0 / (u_sq - 3.0)
            }
            fn dh_dv(&self, _: f64, _: f64) -> f64 {
                0.0
            }
        }
        let err = validate_reaction_spec(&ReactionSpec::new(Nan, LinearG::new(-1.0))).unwrap_err();
        assert!(matches!(err, Error::NonFiniteEvaluation { .. }));
    }

    #[test]
    fn decompose_factored_form() {
        let f = |u: f64, v: f64| (1.0 + v - u) * u;
        let (h, g) = decompose_f(&f, 0.0, 4.0);
        assert!((h - 4.0).abs() < 1e-12 && g.abs() < 1e-15);
    }

    #[test]
    fn decompose_general_linear_f() {
        let (h0, g1) = (2.0, -1.0);
        let f = move |u: f64, v: f64| h0 + (h0 + g1) * v - h0 * u;
        let (h, g) = decompose_f(&f, 1.0, 1.0);
        assert!((g + 1.0).abs() < 1e-12);
        assert!((h - 2.0).abs() < 1e-12);
        // on the singular line the limit branch is used
        let (h_lim, _) = decompose_f(&f, 1.0, 2.0);
        assert!((h_lim - 2.0).abs() < 1e-8);
    }

    #[test]
    fn decomposition_with_offset_fails_validation() {
        let d = DecomposedReaction::new(|u, v| (1.0 + v - u) * u + 0.3);
        let report = validate_reaction_spec(&d.spec()).unwrap();
        assert!(report.failures().any(|c| c.name == "G(0) = 0"));
    }

    #[test]
    fn cached_constants_are_exact() {
        let spec = ReactionSpec::new(
            TableH::new(vec![vec![0.5, 0.25], vec![1.5]]),
            CubicG { g1: -0.7, g2: 0.1, g3: -0.2 },
        );
        assert_eq!(spec.h0(), spec.h(1.0, 0.0));
        assert_eq!(spec.g1(), spec.dg_dv(0.0));
    }

    #[test]
    fn table_power_detection() {
        assert_eq!(TableH::new(vec![vec![0.0], vec![2.0]]).as_power(), Some((2.0, 1)));
        assert_eq!(TableH::new(vec![vec![0.0, 1.0]]).as_power(), None);
    }

    #[test]
    fn polynomial_g_derivative() {
        let g = PolynomialG { coeffs: vec![0.5, -1.0, 0.0, 2.0] };
        assert!((g.g(2.0) - (0.5 - 2.0 + 16.0)).abs() < 1e-12);
        assert!((g.dg_dv(2.0) - (-1.0 + 24.0)).abs() < 1e-12);
    }
}
