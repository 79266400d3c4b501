//! Factorization of unitary evolution operators and quantification of
//! entanglement change for bipartite quantum systems.
//!
//! The library provides two factorization routes for the propagator of a
//! finite-dimensional quantum system:
//!
//! * [`lie`] + [`weinorman`]: when the Hamiltonian generators close into a
//!   finite-dimensional Lie algebra, the propagator is written as an ordered
//!   product of single-generator exponentials `U(t) = prod_i exp(g_i(t) B_i)`
//!   with the scalar functions `g_i` obtained from a nonlinear ODE system.
//! * [`trotter`]: when the algebra does not close, a commutator-corrected
//!   split step composed `2^n` times approximates `exp(-iHt)`.
//!
//! On top of these, [`perturbation`] builds first-order-in-coupling density
//! operator expansions, and [`measures`] quantifies the entanglement change
//! via the squared Hilbert-Schmidt distance to the freely evolved product
//! state, alongside relative entropy and the Bures metric. [`models`] holds
//! two exactly solvable reference systems used as verification oracles.

pub mod cli;
pub mod error;
pub mod lie;
pub mod linalg;
pub mod measures;
pub mod models;
pub mod perturbation;
pub mod trotter;
pub mod weinorman;

pub use error::{Error, Result};
pub use linalg::{DensityOperator, Operator};
