//! Physical observables, gauge diagnostics and time-series statistics.

mod gauge;
mod profile;
mod stats;

pub use gauge::{
    gauge_curve, gauge_generator, gauge_value, gauss_f, gauss_residual, gauss_sign, measure_correlators,
    meanfield_residual, rotated_tau_x, z2_charge, z2_flux, GaugeAnsatzCurve, GaugeCorrelators,
};
pub use profile::{extended_imbalance, imbalance_weights, occupation_profile};
pub use stats::{fit_gaussian_peak, steady_value, GaussianFit, ObservableSeries};

use num_complex::Complex;

use crate::error::Result;
use crate::exact::StateVector;
use crate::hamiltonian::OperatorSum;
use crate::scalar::Real;

/// Anything that can report expectation values of Pauli sums.
pub trait QuantumState<T: Real> {
    fn n_sites(&self) -> usize;

    fn expect(&self, op: &OperatorSum<T>) -> Result<Complex<T>>;

    /// Dense amplitudes, for sampling and small-chain checks.
    fn to_dense(&self) -> Result<StateVector<T>>;

    /// `⟨σ⁺_j σ⁻_j⟩`, the `|1⟩` population of site `j`.
    fn population(&self, site: usize) -> Result<T> {
        let z = OperatorSum::single(self.n_sites(), T::one(), &[(site, crate::hamiltonian::Pauli::Z)])?;
        Ok((T::one() + self.expect(&z)?.re) * T::of(0.5))
    }
}

impl<T: Real> QuantumState<T> for StateVector<T> {
    fn n_sites(&self) -> usize {
        StateVector::n_sites(self)
    }

    fn expect(&self, op: &OperatorSum<T>) -> Result<Complex<T>> {
        self.expectation(op)
    }

    fn to_dense(&self) -> Result<StateVector<T>> {
        Ok(self.clone())
    }

    fn population(&self, site: usize) -> Result<T> {
        if site == 0 || site > self.n_sites() {
            return Err(crate::error::Error::SiteOutOfRange { site, n_sites: self.n_sites() });
        }
        Ok(StateVector::population(self, site))
    }
}
