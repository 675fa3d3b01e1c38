//! Symmetric one-dimensional grids on `[−L, L]`.

use crate::error::{Error, Result};

/// `n` equispaced nodes including both end points.
pub fn uniform(half_width: f64, n: usize) -> Result<Vec<f64>> {
    check(half_width, n)?;
    let h = 2.0 * half_width / (n - 1) as f64;
    Ok(symmetric(n, |i| -half_width + h * i as f64))
}

/// `n` nodes `x = a·sinh(β s)` for equispaced `s ∈ [−1, 1]`, with spacing
/// close to `h_center` at the origin and geometric coarsening outward.
///
/// Falls back to [`uniform`] when uniform spacing is already finer than `h_center`.
pub fn stretched(half_width: f64, n: usize, h_center: f64) -> Result<Vec<f64>> {
    check(half_width, n)?;
    if !(h_center > 0.0) {
        return Err(Error::Grid(format!("center spacing {h_center} must be positive")));
    }
    let ds = 2.0 / (n - 1) as f64;
    // sinh(β)/β = L·ds/h
    let ratio = half_width * ds / h_center;
    if ratio <= 1.0 {
        return uniform(half_width, n);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi.sinh() / hi < ratio {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.sinh() / mid < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    let a = half_width / beta.sinh();
    Ok(symmetric(n, |i| {
        let s = -1.0 + ds * i as f64;
        a * (beta * s).sinh()
    }))
}

fn check(half_width: f64, n: usize) -> Result<()> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Grid(format!("half-width {half_width} must be positive")));
    }
    if n < 3 {
        return Err(Error::Grid(format!("need at least 3 nodes, got {n}")));
    }
    Ok(())
}

/// Builds the left half from `node` and mirrors it so the grid is exactly symmetric.
fn symmetric(n: usize, node: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in 0..n / 2 {
        let xi = node(i);
        x[i] = xi;
        x[n - 1 - i] = -xi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    x
}

/// Index of the node at `x = 0`, if present.
pub fn center_index(x: &[f64]) -> Option<usize> {
    let n = x.len();
    (n % 2 == 1 && x[n / 2] == 0.0).then_some(n / 2)
}

/// Trapezoid weights for integrating nodal values.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretched_grid_shape() {
        let x = stretched(100.0, 2001, 0.01).unwrap();
        assert_eq!(x.len(), 2001);
        assert_eq!(x[0], -100.0);
        assert_eq!(x[2000], 100.0);
        assert_eq!(center_index(&x), Some(1000));
        let h0 = x[1001] - x[1000];
        assert!((h0 - 0.01).abs() < 2e-4, "{h0}");
        for i in 0..1000 {
            assert_eq!(x[i], -x[2000 - i]);
            assert!(x[i + 1] > x[i]);
        }
    }

    #[test]
    fn coarse_request_falls_back_to_uniform() {
        let x = stretched(1.0, 11, 0.5).unwrap();
        assert!((x[1] - x[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn weights_integrate_linear_functions() {
        let x = stretched(5.0, 101, 0.02).unwrap();
        let w = trapezoid_weights(&x);
        let s: f64 = w.iter().zip(&x).map(|(w, x)| w * (1.0 + x)).sum();
        assert!((s - 10.0).abs() < 1e-12);
    }
}
