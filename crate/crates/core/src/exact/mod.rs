//! State-vector engine: initial states, Krylov propagation, dense
//! diagonalization and matter-number sectors.

mod dense;
mod krylov;
mod sector;
mod sparse;
mod state;

pub use dense::{diagonalize_dense, diagonalize_dense_with_limit, diagonalize_sector, dense_propagator, EigenSurvey, DENSE_LIMIT};
pub use krylov::{evolve_krylov, KrylovPropagator, KrylovStats};
pub(crate) use krylov::check_times;
pub use sector::{conserves_matter, evolve_in_sector, matter_sector_project, MatterSector};
pub use sparse::SparseOperator;
pub use state::{initial_local_states, phi_theta, prepare_initial, site_bit, PauliAction, StateVector, MAX_STATE_SITES};
