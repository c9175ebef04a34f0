//! Numerical laboratory for the quasi-hermitian oscillator
//! `H = [(e^{-iθ} p)² + (e^{iθ} x)²] / (2 cos 2θ)`.
//!
//! The crate builds the operator algebra in a truncated Fock basis, the
//! biorthogonal eigenfunctions and bicoherent states in position space,
//! and evaluates the propagator by several independent routes.

pub mod bicoherent;
pub mod error;
pub mod fock;
pub mod model;
pub mod path_integrals;
pub mod propagators;
pub mod quadrature;
pub mod verify;
pub mod wavefunctions;

pub use error::{Error, Result};
pub use model::{ClassicalPath, ModelParams};
