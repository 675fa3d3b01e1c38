//! Parity of discretized eigenfunctions on a symmetric grid.

use super::oracle::Eigenvector;
use crate::error::{Error, Result};
use crate::grid::trapezoid_weights;
use num_complex::Complex64;
use serde::Serialize;

/// Share of the norm a parity class needs to be assigned.
pub const DOMINANCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    UOddVEven,
    UEvenVOdd,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParityReport {
    pub parity: Parity,
    /// Weighted-norm share of the `(u odd, v even)` projection.
    pub odd_even_share: f64,
}

impl ParityReport {
    /// The parity, or [`Error::MixedParity`] when neither class dominates.
    pub fn definite(&self) -> Result<Parity> {
        match self.parity {
            Parity::Mixed => Err(Error::MixedParity),
            p => Ok(p),
        }
    }
}

/// `(‖even part‖², ‖odd part‖²)` with trapezoid weights.
fn split(f: &[Complex64], w: &[f64]) -> (f64, f64) {
    let n = f.len();
    (0..n).fold((0.0, 0.0), |(e, o), i| {
        let r = f[n - 1 - i];
        (e + w[i] * (0.5 * (f[i] + r)).norm_sqr(), o + w[i] * (0.5 * (f[i] - r)).norm_sqr())
    })
}

pub fn parity_check(vec: &Eigenvector) -> Result<ParityReport> {
    let n = vec.xi.len();
    let symmetric = (0..n).all(|i| (vec.xi[i] + vec.xi[n - 1 - i]).abs() <= 1e-12 * vec.xi[n - 1].abs());
    if !symmetric || vec.u.len() != n || vec.v.len() != n {
        return Err(Error::Grid("parity needs nodal values on a symmetric grid".into()));
    }
    let w = trapezoid_weights(&vec.xi);
    let (ue, uo) = split(&vec.u, &w);
    let (ve, vo) = split(&vec.v, &w);
    let total = ue + uo + ve + vo;
    if !(total > 0.0) {
        return Err(Error::Precondition("zero eigenvector".into()));
    }
    let share = (uo + ve) / total;
    let parity = if share >= DOMINANCE {
        Parity::UOddVEven
    } else if 1.0 - share >= DOMINANCE {
        Parity::UEvenVOdd
    } else {
        Parity::Mixed
    };
    Ok(ParityReport { parity, odd_even_share: share })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_translation_like_and_edge_like_shapes() {
        let xi: Vec<f64> = (0..201).map(|i| -10.0 + 0.1 * i as f64).collect();
        let c = |f: &dyn Fn(f64) -> f64| xi.iter().map(|&x| Complex64::new(f(x), 0.0)).collect::<Vec<_>>();
        let sech2 = |x: f64| 1.0 / x.cosh().powi(2);
        let even_odd = Eigenvector { lambda: 0.0.into(), xi: xi.clone(), u: c(&sech2), v: c(&|x| 0.1 * x.tanh()) };
        assert_eq!(parity_check(&even_odd).unwrap().parity, Parity::UEvenVOdd);
        let odd_even = Eigenvector { lambda: 0.0.into(), xi: xi.clone(), u: c(&|x| x * sech2(x)), v: c(&sech2) };
        assert_eq!(parity_check(&odd_even).unwrap().parity, Parity::UOddVEven);
        let mixed = Eigenvector { lambda: 0.0.into(), xi: xi.clone(), u: c(&|x| sech2(x - 1.0)), v: c(&|_| 0.0) };
        let r = parity_check(&mixed).unwrap();
        assert_eq!(r.parity, Parity::Mixed);
        assert_eq!(r.definite(), Err(Error::MixedParity));
    }
}
