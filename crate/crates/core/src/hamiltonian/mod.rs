//! Symbolic Pauli algebra and the model Hamiltonians.

mod builders;
pub mod dump;
mod pauli;

pub use builders::{
    build_effective, build_effective_parts, build_full, build_rotated_effective, matter_number, matter_z_sum,
    rotate_frame, EffectiveParts,
};
pub use pauli::{commutator_norm, OperatorSum, Pauli, PauliProduct, PauliString};
