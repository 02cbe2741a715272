//! Simulation of dissipatively coupled (anti-PT-symmetric) SPDC waveguide pairs.
//!
//! Three propagation engines are provided and cross-checked against each other:
//! a Lindblad master-equation solver on a truncated Fock space, a non-Hermitian
//! Schrödinger solver that drops the quantum-jump term, and a Gaussian moment
//! engine that evaluates multiphoton correlators through the Wick expansion.
//! The [`design`] module collects the chip-level engineering formulas.

pub mod design;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod model;
pub mod observables;
pub mod propagate;
pub mod units;
pub mod validation;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
