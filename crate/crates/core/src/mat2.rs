//! Dense 2×2 complex matrices, the only operator size the walk ever samples.

use std::ops::Mul;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Mat2([[h, h], [h, -h]])
    }

    pub fn phase_s() -> Self {
        Mat2([[ONE, ZERO], [ZERO, Complex64::new(0.0, 1.0)]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Conjugation `self · a · self†`.
    pub fn conjugate(&self, a: &Mat2) -> Mat2 {
        *self * *a * self.adjoint()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Mat2::IDENTITY)
    }

    /// Representative with the global phase removed: the first entry of
    /// largest modulus (row-major, ties broken towards the earlier entry) is
    /// made real and positive.
    pub fn phase_normalized(&self) -> Mat2 {
        let entries = [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]];
        let mut pivot = entries[0];
        for e in &entries[1..] {
            if e.norm() > pivot.norm() + 1e-9 {
                pivot = *e;
            }
        }
        let phase = pivot.conj() / pivot.norm();
        self.scale(phase)
    }

    /// True when the two matrices agree up to a global phase.
    pub fn eq_up_to_phase(&self, other: &Mat2, tol: f64) -> bool {
        self.phase_normalized().max_abs_diff(&other.phase_normalized()) <= tol
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}
