//! Numerical toolkit for coupled particle-field dynamics.
//!
//! The crate simulates two models of the same physical system side by side:
//!
//! - the classical Newton-Maxwell (Abraham) system of charged particles
//!   coupled to the transverse electromagnetic field in Coulomb gauge, and
//! - a finite truncation of the spinless Pauli-Fierz model: a particle on a
//!   collinear grid tensored with a capped multimode Fock space.
//!
//! On top of the two integrators it evaluates the fluctuation functionals
//! `beta_a`, `beta_b`, `beta_c`, the one-photon reduced density matrix and
//! its trace distance to the coherent-state projector, and runs an
//! hbar-sweep rate study. Units: c = e = 1, particle mass 1/2.

pub mod beta;
pub mod classical;
pub mod fock;
pub mod harness;
pub mod error;
pub mod field_kernels;
pub mod quadrature;

pub use error::{Error, Result};
