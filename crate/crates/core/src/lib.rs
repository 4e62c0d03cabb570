//! Simulation of a driven XY qubit chain whose low-energy physics is a
//! lattice gauge theory with emergent ℤ₂ gauge invariance.
//!
//! Odd sites carry matter spins `s_ℓ`, even sites carry gauge spins
//! `τ_{ℓ+½}`. Hamiltonians live as symbolic Pauli sums and are handed to
//! one of two engines: a state-vector engine with Krylov propagation and
//! dense diagonalization, or a matrix product state engine with DMRG and
//! TEBD. Couplings are in MHz and times in μs; the engines apply the 2π.
//!
//! Numerical code is generic over [`Real`]; the aliases below fix `f64`.

pub mod error;
pub mod exact;
pub mod experiments;
pub mod hamiltonian;
pub mod measurement;
pub mod model;
pub mod mps;
pub mod observables;
pub mod scalar;
pub mod table;

pub use error::{Error, Result};
pub use scalar::{Amplitude, Real};

pub type OperatorSum64 = hamiltonian::OperatorSum<f64>;
pub type StateVector64 = exact::StateVector<f64>;
pub type EigenSurvey64 = exact::EigenSurvey<f64>;
/// MPS used for ground states of real Hamiltonians.
pub type RealMps = mps::Mps<f64>;
/// MPS used for time evolution.
pub type ComplexMps = mps::Mps<num_complex::Complex<f64>>;
