//! Minimal 2x2 complex matrix arithmetic for coin-space operators.

use num_complex::Complex64;

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Mat2::new(one, zero, zero, one)
    }

    /// a·σx + b·σy + c·σz for real coefficients.
    pub fn pauli(a: f64, b: f64, c: f64) -> Self {
        Mat2::new(
            C64::new(c, 0.0),
            C64::new(a, -b),
            C64::new(a, b),
            C64::new(-c, 0.0),
        )
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn adjoint(&self) -> Mat2 {
        Mat2::new(
            self.0[0][0].conj(),
            self.0[1][0].conj(),
            self.0[0][1].conj(),
            self.0[1][1].conj(),
        )
    }

    pub fn conj(&self) -> Mat2 {
        Mat2::new(
            self.0[0][0].conj(),
            self.0[0][1].conj(),
            self.0[1][0].conj(),
            self.0[1][1].conj(),
        )
    }

    pub fn scale(&self, z: C64) -> Mat2 {
        Mat2::new(
            self.0[0][0] * z,
            self.0[0][1] * z,
            self.0[1][0] * z,
            self.0[1][1] * z,
        )
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.0[0][0] + rhs.0[0][0],
            self.0[0][1] + rhs.0[0][1],
            self.0[1][0] + rhs.0[1][0],
            self.0[1][1] + rhs.0[1][1],
        )
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Largest entrywise |a_ij - b_ij|.
    pub fn max_abs_diff(&self, rhs: &Mat2) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - rhs.0[i][j]).norm());
            }
        }
        d
    }

    /// Deviation of U·U† from the identity, entrywise max.
    pub fn unitarity_defect(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&Mat2::identity())
    }
}
