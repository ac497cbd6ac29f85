//! Exactly solvable inhomogeneous lattice models built on the discrete
//! orthogonal polynomials of the Askey scheme.
//!
//! A family + parameters defines birth/death coefficients B(x), D(x) on a
//! 1-D lattice; the associated tridiagonal operator has a closed-form
//! eigensystem. On top of that sit free-fermion correlation functions and
//! entanglement entropy, classical birth-death dynamics with exact kernels,
//! and inhomogeneous XX spin-chain exports.

pub mod cli;
pub mod error;
pub mod exact;
pub mod families;
pub mod fermion;
pub mod linalg;
pub mod spectral;
pub mod spin;
pub mod stochastic;

pub use error::{Error, Result};
pub use families::{FamilyId, FamilyInstance, FamilyParams, LatticeRequest, LatticeSpec};
