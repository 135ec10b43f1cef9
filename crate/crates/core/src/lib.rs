//! Exact solution of the one-dimensional δ-interacting Bose–Fermi mixture.
//!
//! The crate covers the three nested Bethe-ansatz formulations (boson,
//! first-fermion or second-fermion reference state), finite-size ground
//! states and low-lying excitations, the thermodynamic-limit integral
//! equations of the bosonic ground state, and ground-state phase diagrams
//! in a Zeeman field with boson/fermion chemical potentials.
//!
//! Natural units are used throughout: the Hamiltonian is
//! `-Σ ∂²/∂x² + 2c Σ δ(x_i - x_j)` on a ring of length `L`, so a state's
//! energy is `Σ k_j²`.

pub mod algebra;
pub mod bae;
pub mod cli;
pub mod error;
pub mod excitations;
pub mod phases;
pub mod thermo;

pub use algebra::CaseKind;
pub use bae::{HalfInt, MixtureSpec, Observables, QuantumNumbers, RootSet};
pub use error::{Error, Result};
