//! Minimal 2x2 complex matrix arithmetic.
//!
//! Everything acting on the coin degree of freedom (loss, rotation, Kraus
//! operators, Bloch step operators) is a 2x2 complex matrix, so this module
//! provides the handful of operations the rest of the crate needs, including
//! closed-form eigenvalues and eigenvectors of the quadratic characteristic
//! polynomial.

use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Sub};

/// A 2x2 complex matrix in row-major layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn zero() -> Self {
        Mat2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2::diag(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn diag(a: C64, d: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2([[a, z], [z, d]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([
            [C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)],
            [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)],
        ])
    }

    /// Pauli z matrix, diag(1, -1).
    pub fn sigma_z() -> Self {
        Mat2::diag(C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Mat2([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// `A * B * A†`, the conjugation used when applying coin-space operators
    /// to 2x2 blocks of a density matrix.
    pub fn sandwich(&self, b: &Mat2) -> Mat2 {
        *self * *b * self.adjoint()
    }

    /// Eigenvalues `(tr ± sqrt(tr² - 4 det)) / 2` with the principal branch
    /// of the square root; `[0]` carries the `+` sign.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let tr = self.trace();
        let disc = (tr * tr - self.det().scale(4.0)).sqrt();
        [(tr + disc) * 0.5, (tr - disc) * 0.5]
    }

    /// Left (row) and right (column) eigenvectors for eigenvalue `u`.
    ///
    /// Both candidate component forms are tried and the larger one kept, so
    /// the vectors stay well conditioned whichever matrix entry vanishes. The
    /// vectors are unnormalized; callers form ratios that cancel the scale.
    pub fn eigenvectors(&self, u: C64) -> (Vec2, Vec2) {
        let m = &self.0;
        let r1 = [m[0][1], u - m[0][0]];
        let r2 = [u - m[1][1], m[1][0]];
        let right = if norm2(&r1) >= norm2(&r2) { r1 } else { r2 };
        let l1 = [u - m[1][1], m[0][1]];
        let l2 = [m[1][0], u - m[0][0]];
        let left = if norm2(&l1) >= norm2(&l2) { l1 } else { l2 };
        (left, right)
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Mat2::zero())
    }
}

pub type Vec2 = [C64; 2];

fn norm2(v: &Vec2) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// Row vector times matrix, `w A`.
pub fn row_mul(w: &Vec2, a: &Mat2) -> Vec2 {
    [
        w[0] * a.0[0][0] + w[1] * a.0[1][0],
        w[0] * a.0[0][1] + w[1] * a.0[1][1],
    ]
}

/// Matrix times column vector, `A v`.
pub fn col_mul(a: &Mat2, v: &Vec2) -> Vec2 {
    [
        a.0[0][0] * v[0] + a.0[0][1] * v[1],
        a.0[1][0] * v[0] + a.0[1][1] * v[1],
    ]
}

/// Inner product of a left row vector with a right column vector (no
/// conjugation; these come from transpose eigenproblems, not Hermitian ones).
pub fn dot(w: &Vec2, v: &Vec2) -> C64 {
    w[0] * v[0] + w[1] * v[1]
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = Mat2::zero();
        for (i, row) in out.0.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = Mat2::diag(c(2.0, 0.0), c(-1.0, 0.5));
        let [a, b] = m.eigenvalues();
        // + branch carries the larger root of the principal sqrt
        assert!((a - c(2.0, 0.0)).norm() < 1e-14 || (a - c(-1.0, 0.5)).norm() < 1e-14);
        assert!((a + b - m.trace()).norm() < 1e-14);
        assert!((a * b - m.det()).norm() < 1e-14);
    }

    #[test]
    fn eigenvectors_satisfy_definitions() {
        let m = Mat2([[c(0.3, 0.1), c(-0.7, 0.2)], [c(0.5, -0.4), c(0.9, 0.0)]]);
        for u in m.eigenvalues() {
            let (w, v) = m.eigenvectors(u);
            let av = col_mul(&m, &v);
            let wa = row_mul(&w, &m);
            for i in 0..2 {
                assert!((av[i] - u * v[i]).norm() < 1e-12);
                assert!((wa[i] - u * w[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sandwich_matches_explicit_product() {
        let a = Mat2([[c(0.0, 1.0), c(0.2, 0.0)], [c(0.0, 0.0), c(1.0, -1.0)]]);
        let b = Mat2([[c(0.5, 0.0), c(0.1, 0.3)], [c(0.1, -0.3), c(0.5, 0.0)]]);
        let lhs = a.sandwich(&b);
        let rhs = a * b * a.adjoint();
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }
}
