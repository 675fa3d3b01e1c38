//! Banded LU with partial pivoting, generic over real and complex entries.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + SubAssign
    + Send
    + Sync
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row keeps `kl` extra slots on the right for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.ku + self.kl, "({r},{c}) outside band");
        r * self.width + (c + self.kl - r)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        if c + self.kl < r || c > r + self.ku + self.kl {
            return T::zero();
        }
        self.data[self.idx(r, c)]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: T) {
        let i = self.idx(r, c);
        self.data[i] = value;
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, value: T) {
        let i = self.idx(r, c);
        self.data[i] = self.data[i] + value;
    }

    /// `y = A·x` for the unfactored matrix.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).fold(T::zero(), |acc, c| acc + self.get(r, c) * x[c])
            })
            .collect()
    }

    /// Factorizes in place.
    pub fn factor(mut self) -> Result<BandLu<T>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.modulus()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).modulus();
            for r in k + 1..=last_row {
                let m = self.get(r, k).modulus();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if !(best > 1e-300 * scale.max(1e-300)) {
                return Err(Error::SolverFailure(format!("singular band matrix at pivot {k}")));
            }
            piv[k] = p;
            if p != k {
                for c in k..=last_col {
                    let a = self.idx(k, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last_row {
                let m = self.get(r, k) / pivot;
                self.set(r, k, m);
                for c in k + 1..=last_col {
                    let akc = self.get(k, c);
                    let i = self.idx(r, c);
                    self.data[i] -= m * akc;
                }
            }
        }
        Ok(BandLu { a: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu<T> {
    a: BandMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.a.n;
        let (kl, ku) = (self.a.kl, self.a.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                let m = self.a.get(r, k);
                b[r] -= m * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in k + 1..=(k + ku + kl).min(n - 1) {
                s -= self.a.get(k, c) * b[c];
            }
            b[k] = s / self.a.get(k, k);
        }
    }
}
