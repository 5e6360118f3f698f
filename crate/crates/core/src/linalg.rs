//! 2×2 real matrices with closed-form spectra.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Scalar> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn from_columns(c0: [T; 2], c1: [T; 2]) -> Self {
        Self::new(c0[0], c1[0], c0[1], c1[1])
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Discriminant of the characteristic polynomial, `tr² − 4 det`.
    pub fn discriminant(&self) -> T {
        let t = self.trace();
        t * t - T::lit(4.0) * self.det()
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() {
            return None;
        }
        Some(Self::new(
            self.m[1][1] / d,
            -self.m[0][1] / d,
            -self.m[1][0] / d,
            self.m[0][0] / d,
        ))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity();
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut best = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                best = best.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        best
    }

    pub fn max_abs(&self) -> T {
        self.max_abs_diff(&Self::new(T::zero(), T::zero(), T::zero(), T::zero()))
    }

    /// Eigenvalues from the characteristic polynomial, larger real part first.
    pub fn eigenvalues(&self) -> [Complex<T>; 2] {
        let half_tr = self.trace() / T::two();
        let disc = self.discriminant() / T::lit(4.0);
        if disc >= T::zero() {
            let s = disc.sqrt();
            [
                Complex::new(half_tr + s, T::zero()),
                Complex::new(half_tr - s, T::zero()),
            ]
        } else {
            let s = (-disc).sqrt();
            [Complex::new(half_tr, s), Complex::new(half_tr, -s)]
        }
    }

    /// Eigenvector for a real eigenvalue, normalised to unit length.
    ///
    /// Picks the better-conditioned of the two rows of `M − λI`.
    pub fn eigenvector(&self, lambda: T) -> [T; 2] {
        let a = self.m[0][0] - lambda;
        let b = self.m[0][1];
        let c = self.m[1][0];
        let d = self.m[1][1] - lambda;
        let v = if a.abs() + b.abs() >= c.abs() + d.abs() {
            [b, -a]
        } else {
            [d, -c]
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if n == T::zero() {
            // M = λI: every direction is an eigenvector.
            [T::one(), T::zero()]
        } else {
            [v[0] / n, v[1] / n]
        }
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl<T: Scalar> Sub for Mat2<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Self::new(
            self.m[0][0] - o.m[0][0],
            self.m[0][1] - o.m[0][1],
            self.m[1][0] - o.m[1][0],
            self.m[1][1] - o.m[1][1],
        )
    }
}

/// `det(u, v)` of two planar vectors placed as columns.
pub fn cross2<T: Scalar>(u: [T; 2], v: [T; 2]) -> T {
    u[0] * v[1] - u[1] * v[0]
}
