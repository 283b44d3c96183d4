//! Simulation toolkit for 1D chiral-symmetric coined quantum walks and the
//! SSH tight-binding chain.
//!
//! The crate provides three layers:
//!
//! - exact state evolution: [`walk`] evolves coin ⊗ walker states site by
//!   site, with position distributions, moments, and seeded photon-count
//!   sampling ([`sampling`]);
//! - band structure: [`bands`] and [`ssh`] give quasi-energies, group
//!   velocities, Bloch vectors, winding numbers, and the spreading
//!   coefficient governing the asymptotic moments, each computed three
//!   independent ways (Brillouin-zone quadrature, closed form, residue sum);
//! - scenario running: [`sweep`] drives parameter sweeps comparing finite-n
//!   simulation against the asymptotics and locating slope discontinuities
//!   at the topological transitions.

pub mod bands;
pub mod coin;
pub mod error;
pub mod mat2;
pub mod sampling;
pub mod ssh;
pub mod sweep;
pub mod walk;

pub use coin::{CoinState, PauliExpectations, STATE_NORM_TOL};
pub use error::{Error, Result};
pub use walk::{
    apply_qplate, apply_qwp, distribution, evolve, moments, raw_moments, step, LatticeState,
    MomentReport, ProbabilityDistribution, StepParams, DISTRIBUTION_NORM_TOL,
};
