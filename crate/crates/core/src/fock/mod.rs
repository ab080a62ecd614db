//! Finite Pauli-Fierz model: capped Fock space, collinear particle grid,
//! Hamiltonian assembly, Weyl displacements, and Krylov propagation.

pub mod basis;
pub mod grid;
pub mod hamiltonian;
pub mod propagate;
pub mod state;
pub mod weyl;

pub use basis::FockBasis;
pub use grid::{DerivativeScheme, ParticleGrid};
pub use hamiltonian::{assemble_hamiltonian, Hamiltonian, HamiltonianOpts, TensorSpace, DIMENSION_CAP};
pub use propagate::{propagate, PropagatorOpts};
pub use state::{
    expectations, field_phi_expectation, initial_state, mode_amplitude, number_expectation,
    position_expectation, position_variance_about, Expectations, QuantumState,
};
pub use weyl::{vacuum, weyl_displace, WeylOperator};
