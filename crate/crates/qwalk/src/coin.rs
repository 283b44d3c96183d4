//! The two-level coin: normalized polarization spinors over the {|L>, |R>} basis.
//!
//! |L> is the σz = +1 basis state throughout; Pauli expectation values are taken
//! in this basis and feed the asymptotic first-moment formula.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unit-norm tolerance for spinors and lattice states.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// Normalized coin spinor α|L> + β|R>.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinState {
    alpha: Complex64,
    beta: Complex64,
}

/// Pauli expectation values (s_x, s_y, s_z) of a pure coin state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliExpectations {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CoinState {
    /// Build from amplitudes, enforcing |α|² + |β|² = 1 within `STATE_NORM_TOL`.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sq - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(CoinState { alpha, beta })
    }

    /// Build from arbitrary non-zero amplitudes, normalizing them.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::NotNormalized { norm_sq });
        }
        let inv = 1.0 / norm_sq.sqrt();
        Ok(CoinState {
            alpha: alpha * inv,
            beta: beta * inv,
        })
    }

    pub fn left() -> Self {
        CoinState {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn right() -> Self {
        CoinState {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    /// cos(θ/2)|L> + sin(θ/2)|R>: the θ-meridian of the polarization sphere.
    pub fn meridian(theta: f64) -> Self {
        CoinState {
            alpha: Complex64::new((theta / 2.0).cos(), 0.0),
            beta: Complex64::new((theta / 2.0).sin(), 0.0),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// Pauli expectations of the state; on the unit sphere for pure states.
    pub fn expectations(&self) -> PauliExpectations {
        let cross = self.alpha.conj() * self.beta;
        PauliExpectations {
            x: 2.0 * cross.re,
            y: 2.0 * cross.im,
            z: self.alpha.norm_sqr() - self.beta.norm_sqr(),
        }
    }
}
