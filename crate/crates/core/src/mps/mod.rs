//! Matrix product state engine: two-site DMRG ground states and TEBD
//! quench dynamics with three-site gates.

pub mod checkpoint;
mod dmrg;
mod linalg;
mod mpo;
mod tebd;
mod tensor;

pub use dmrg::{dmrg_ground_state, DmrgParams, DmrgResult};
pub use mpo::{Mpo, MpoBuilder};
pub use tebd::{tebd_evolve, tebd_evolve_with, TebdParams, TebdStats, TrotterOrder, TrotterPlan, GATE_SPAN};
pub use tensor::{Local, Mps, MAX_DENSE_MPS};

use num_complex::Complex;

use crate::error::Result;
use crate::exact::{initial_local_states, phi_theta, StateVector};
use crate::hamiltonian::OperatorSum;
use crate::model::InitialStateSpec;
use crate::observables::QuantumState;
use crate::scalar::{Amplitude, Real};

impl<T: Real, A: Amplitude<Re = T>> QuantumState<T> for Mps<A> {
    fn n_sites(&self) -> usize {
        Mps::n_sites(self)
    }

    fn expect(&self, op: &OperatorSum<T>) -> Result<Complex<T>> {
        let n2 = self.norm().powi(2);
        Ok(self.expectation(op)? / n2)
    }

    fn to_dense(&self) -> Result<StateVector<T>> {
        let mut v = self.to_state_vector()?;
        v.normalize()?;
        Ok(v)
    }
}

/// Product MPS of the quench initial state.
pub fn initial_mps<T: Real>(spec: &InitialStateSpec, n_sites: usize) -> Result<Mps<Complex<T>>> {
    let local = initial_local_states::<T>(spec, n_sites)?;
    Mps::product(&local)
}

/// `|Φ_θ⟩` on every site, as a real MPS.
pub fn uniform_product<T: Real + Amplitude<Re = T>>(theta: T, n_sites: usize) -> Result<Mps<T>> {
    let phi = phi_theta::<T>(theta);
    Mps::product(&vec![[phi[0].re, phi[1].re]; n_sites])
}
