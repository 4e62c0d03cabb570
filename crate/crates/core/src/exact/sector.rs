use num_complex::Complex;
use num_traits::Zero;

use super::krylov::KrylovPropagator;
use super::sparse::SparseOperator;
use super::state::{site_bit, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::{commutator_norm, matter_z_sum, OperatorSum};
use crate::scalar::Real;

/// Basis states with a fixed number of matter excitations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatterSector {
    n_sites: usize,
    n_excitations: usize,
    basis: Vec<u64>,
}

impl MatterSector {
    pub fn new(n_sites: usize, n_excitations: usize) -> Result<Self> {
        if n_sites > super::state::MAX_STATE_SITES {
            return Err(Error::TooLarge { what: "sector enumeration", n_sites, limit: super::state::MAX_STATE_SITES });
        }
        let mask = matter_mask(n_sites);
        let nm = mask.count_ones() as usize;
        if n_excitations > nm {
            return Err(Error::InvalidParams(format!("{n_excitations} excitations on {nm} matter sites")));
        }
        let basis = (0..1u64 << n_sites).filter(|b| (b & mask).count_ones() as usize == n_excitations).collect();
        Ok(MatterSector { n_sites, n_excitations, basis })
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_excitations(&self) -> usize {
        self.n_excitations
    }

    /// Sector amplitudes of a full-space state; fails if weight leaks out.
    pub fn restrict<T: Real>(&self, psi: &StateVector<T>) -> Result<Vec<Complex<T>>> {
        if psi.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: psi.n_sites() });
        }
        let amps = psi.amplitudes();
        let v: Vec<Complex<T>> = self.basis.iter().map(|&b| amps[b as usize]).collect();
        let inside: T = v.iter().map(|a| a.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if (T::one() - inside).abs() > T::of(1e-10) {
            return Err(Error::InvalidParams(format!(
                "state has weight {} outside the {}-excitation sector",
                (T::one() - inside).to_f64_lossy(),
                self.n_excitations
            )));
        }
        Ok(v)
    }

    pub fn embed<T: Real>(&self, v: &[Complex<T>]) -> Result<StateVector<T>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let mut amps = vec![Complex::zero(); 1usize << self.n_sites];
        for (&b, a) in self.basis.iter().zip(v) {
            amps[b as usize] = *a;
        }
        StateVector::from_amplitudes(self.n_sites, amps)
    }
}

fn matter_mask(n_sites: usize) -> u64 {
    (1..=n_sites).step_by(2).fold(0, |m, j| m | site_bit(j, n_sites))
}

/// Checks that `h` conserves the matter excitation number.
pub fn conserves_matter<T: Real>(h: &OperatorSum<T>) -> Result<bool> {
    let n = matter_z_sum::<T>(h.n_sites())?;
    let c = commutator_norm(h, &n)?;
    Ok(c <= T::of(1e-12) * h.norm().max(T::one()))
}

/// Restriction of `h` to the sector with `n_excitations` matter excitations.
pub fn matter_sector_project<T: Real>(
    h: &OperatorSum<T>,
    n_excitations: usize,
) -> Result<(SparseOperator<T>, MatterSector)> {
    if !conserves_matter(h)? {
        return Err(Error::SymmetryBroken);
    }
    let sector = MatterSector::new(h.n_sites(), n_excitations)?;
    let op = SparseOperator::on_basis(h, sector.basis())?;
    Ok((op, sector))
}

/// Krylov evolution inside the sector of `psi0`; results are embedded back
/// into the full space.
pub fn evolve_in_sector<T: Real>(
    h: &OperatorSum<T>,
    psi0: &StateVector<T>,
    times: &[T],
    krylov_dim: usize,
) -> Result<Vec<StateVector<T>>> {
    h.ensure_hermitian()?;
    let mask = matter_mask(psi0.n_sites());
    let (b0, _) = psi0
        .amplitudes()
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().partial_cmp(&y.1.norm_sqr()).unwrap())
        .unwrap();
    let n = (b0 as u64 & mask).count_ones() as usize;
    let (op, sector) = matter_sector_project(h, n)?;
    let v0 = sector.restrict(psi0)?;
    let tol = T::of(1e-10).max(T::eps() * T::of(100.0));
    let mut prop = KrylovPropagator::new(&op, krylov_dim, tol)?;
    super::krylov::check_times(times)?;
    let mut v = v0;
    let mut now = T::zero();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > now {
            prop.advance(&mut v, t - now)?;
            now = t;
        }
        out.push(sector.embed(&v)?);
    }
    Ok(out)
}
