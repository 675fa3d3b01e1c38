//! Argument-principle eigenvalue counts and real-axis scans of `D`.

use super::compound::{evans_value, EvansEvaluation};
use super::linearization::LinearizationContext;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

pub const MAX_CONTOUR_POINTS: usize = 10_000;
const INITIAL_PER_EDGE: usize = 16;

/// Closed polygon approximating a circle, counter-clockwise.
pub fn circle_contour(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect()
}

/// Counter-clockwise rectangle with corners `lo` and `hi`.
pub fn rectangle_contour(lo: Complex64, hi: Complex64) -> Vec<Complex64> {
    vec![lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)]
}

fn arg_at(lambda: Complex64, ctx: &LinearizationContext) -> Result<f64> {
    let e = evans_value(lambda, ctx)?;
    // the scale factor exp(log_scale) is real and positive
    if e.d == Complex64::new(0.0, 0.0) || !e.d.is_finite() {
        return Err(Error::SolverFailure(format!("D({lambda}) = {} on the contour", e.d)));
    }
    Ok(e.d.arg())
}

fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(2.0 * PI) - PI
}

/// Winding number of `D` along the closed polygon `contour`.
///
/// Segments are bisected until the argument turns by less than `π/2` on each.
pub fn winding_count(contour: &[Complex64], ctx: &LinearizationContext) -> Result<i64> {
    if contour.len() < 3 {
        return Err(Error::Precondition("contour needs at least three vertices".into()));
    }
    let n = contour.len();
    let mut pts: Vec<Complex64> = (0..n)
        .flat_map(|i| {
            let (a, b) = (contour[i], contour[(i + 1) % n]);
            (0..INITIAL_PER_EDGE).map(move |k| a + (b - a) * (k as f64 / INITIAL_PER_EDGE as f64))
        })
        .collect();
    let mut args: Vec<f64> = pts.par_iter().map(|&l| arg_at(l, ctx)).collect::<Result<_>>()?;
    loop {
        let m = pts.len();
        let coarse: Vec<usize> = (0..m).filter(|&i| wrap(args[(i + 1) % m] - args[i]).abs() >= 0.5 * PI).collect();
        if coarse.is_empty() {
            break;
        }
        if m + coarse.len() > MAX_CONTOUR_POINTS {
            return Err(Error::ContourTooCoarse(MAX_CONTOUR_POINTS));
        }
        let mids: Vec<Complex64> = coarse.iter().map(|&i| 0.5 * (pts[i] + pts[(i + 1) % m])).collect();
        let mid_args: Vec<f64> = mids.par_iter().map(|&l| arg_at(l, ctx)).collect::<Result<_>>()?;
        let mut new_pts = Vec::with_capacity(m + mids.len());
        let mut new_args = Vec::with_capacity(m + mids.len());
        let mut j = 0;
        for i in 0..m {
            new_pts.push(pts[i]);
            new_args.push(args[i]);
            if j < coarse.len() && coarse[j] == i {
                new_pts.push(mids[j]);
                new_args.push(mid_args[j]);
                j += 1;
            }
        }
        pts = new_pts;
        args = new_args;
    }
    let m = pts.len();
    let total: f64 = (0..m).map(|i| wrap(args[(i + 1) % m] - args[i])).sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

/// `D` on a list of points, evaluated in parallel.
pub fn evans_scan(lambdas: &[Complex64], ctx: &LinearizationContext) -> Vec<Result<EvansEvaluation>> {
    lambdas.par_iter().map(|&l| evans_value(l, ctx)).collect()
}

/// Real zero of `D` in `[lo, hi]` by bisection on the sign of `Re D`.
pub fn real_zero(lo: f64, hi: f64, tol: f64, ctx: &LinearizationContext) -> Result<f64> {
    let sign = |x: f64| -> Result<f64> { Ok(evans_value(Complex64::new(x, 0.0), ctx)?.d.re.signum()) };
    let (mut a, mut b) = (lo, hi);
    let sa = sign(a)?;
    if sa == sign(b)? {
        return Err(Error::Precondition(format!("D has equal signs at {lo} and {hi}")));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if sign(m)? == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// CSV with columns `re_lambda,im_lambda,re_d,im_d,log_scale`; failed points are skipped.
pub fn write_scan_csv(scan: &[Result<EvansEvaluation>], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "re_lambda,im_lambda,re_d,im_d,log_scale")?;
    for e in scan.iter().flatten() {
        writeln!(out, "{},{},{:.15e},{:.15e},{:.15e}", e.lambda.re, e.lambda.im, e.d.re, e.d.im, e.log_scale)?;
    }
    Ok(())
}
