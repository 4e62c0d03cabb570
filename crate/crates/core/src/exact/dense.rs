use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use super::sector::MatterSector;
use super::sparse::SparseOperator;
use super::state::{inner, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::OperatorSum;
use crate::scalar::Real;

/// Default largest chain for dense diagonalization.
pub const DENSE_LIMIT: usize = 14;

/// All eigenpairs of a Hamiltonian, plus named per-eigenstate columns that
/// are filled on request.
#[derive(Clone, Debug)]
pub struct EigenSurvey<T: Real> {
    n_sites: usize,
    sector: Option<MatterSector>,
    energies: Vec<T>,
    vectors: DMatrix<Complex<T>>,
    columns: Vec<(String, Vec<T>)>,
}

impl<T: Real> EigenSurvey<T> {
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn sector(&self) -> Option<&MatterSector> {
        self.sector.as_ref()
    }

    /// Eigenvector `k` as a full-space state.
    pub fn state(&self, k: usize) -> Result<StateVector<T>> {
        let col: Vec<Complex<T>> = self.vectors.column(k).iter().copied().collect();
        match &self.sector {
            None => StateVector::from_amplitudes(self.n_sites, col),
            Some(s) => s.embed(&col),
        }
    }

    /// `⟨k|op|k⟩` for every eigenstate (real part).
    pub fn expectations(&self, op: &OperatorSum<T>) -> Result<Vec<T>> {
        if op.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: op.n_sites() });
        }
        let a = match &self.sector {
            None => SparseOperator::full(op)?,
            Some(s) => SparseOperator::on_basis(op, s.basis())?,
        };
        let n = self.vectors.nrows();
        let mut y = vec![Complex::zero(); n];
        Ok((0..self.len())
            .map(|k| {
                let v = self.vectors.column(k);
                let x = v.as_slice();
                a.apply(x, &mut y);
                inner(x, &y).re
            })
            .collect())
    }

    /// Evaluates `op` on every eigenstate and stores it under `name`.
    pub fn add_column(&mut self, name: &str, op: &OperatorSum<T>) -> Result<&[T]> {
        let vals = self.expectations(op)?;
        self.insert_column(name, vals)
    }

    pub fn insert_column(&mut self, name: &str, values: Vec<T>) -> Result<&[T]> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: values.len() });
        }
        self.columns.retain(|(n, _)| n != name);
        self.columns.push((name.to_string(), values));
        Ok(&self.columns.last().unwrap().1)
    }

    pub fn column(&self, name: &str) -> Option<&[T]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Releases the eigenvectors once all needed columns exist.
    pub fn drop_vectors(&mut self) {
        self.vectors = DMatrix::zeros(0, 0);
    }
}

/// Diagonalizes `h` on the full space.
pub fn diagonalize_dense<T: Real>(h: &OperatorSum<T>) -> Result<EigenSurvey<T>> {
    diagonalize_dense_with_limit(h, DENSE_LIMIT)
}

pub fn diagonalize_dense_with_limit<T: Real>(h: &OperatorSum<T>, limit: usize) -> Result<EigenSurvey<T>> {
    let l = h.n_sites();
    if l > limit {
        return Err(Error::TooLarge { what: "dense diagonalization", n_sites: l, limit });
    }
    h.ensure_hermitian()?;
    let a = SparseOperator::full(h)?;
    let (energies, vectors) = eigh(&a, h.is_real_matrix());
    Ok(EigenSurvey { n_sites: l, sector: None, energies, vectors, columns: Vec::new() })
}

/// Diagonalizes `h` inside a fixed matter-excitation sector.
pub fn diagonalize_sector<T: Real>(h: &OperatorSum<T>, n_excitations: usize) -> Result<EigenSurvey<T>> {
    let (a, sector) = super::sector::matter_sector_project(h, n_excitations)?;
    if sector.dim() > 1 << DENSE_LIMIT {
        return Err(Error::TooLarge { what: "dense sector diagonalization", n_sites: h.n_sites(), limit: DENSE_LIMIT });
    }
    let (energies, vectors) = eigh(&a, h.is_real_matrix());
    Ok(EigenSurvey { n_sites: h.n_sites(), sector: Some(sector), energies, vectors, columns: Vec::new() })
}

/// Ascending eigenpairs of a Hermitian operator; real symmetric path when
/// the matrix is real.
fn eigh<T: Real>(a: &SparseOperator<T>, real: bool) -> (Vec<T>, DMatrix<Complex<T>>) {
    let dense = a.to_dense();
    let (vals, vecs): (Vec<T>, DMatrix<Complex<T>>) = if real {
        let m = dense.map(|c| c.re);
        let e = m.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|x| Complex::new(x, T::zero())))
    } else {
        let e = dense.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&p, &q| vals[p].partial_cmp(&vals[q]).unwrap_or(std::cmp::Ordering::Equal));
    let energies = order.iter().map(|&k| vals[k]).collect();
    let vectors = DMatrix::from_fn(vecs.nrows(), order.len(), |r, c| vecs[(r, order[c])]);
    (energies, vectors)
}

/// `exp(−i 2π H t)` as a dense matrix, through the eigendecomposition.
pub fn dense_propagator<T: Real>(h: &OperatorSum<T>, t: T) -> Result<DMatrix<Complex<T>>> {
    let survey = diagonalize_dense(h)?;
    let v = &survey.vectors;
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        survey.len(),
        survey.energies.iter().map(|&e| {
            let w = T::two_pi() * e * t;
            Complex::new(w.cos(), -w.sin())
        }),
    ));
    Ok(v * phases * v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Pauli;

    #[test]
    fn free_spins() {
        let terms: Vec<_> = (1..=3)
            .map(|j| OperatorSum::<f64>::single(3, 0.5, &[(j, Pauli::Z)]).unwrap())
            .collect();
        let h = terms[0].add(&terms[1]).unwrap().add(&terms[2]).unwrap();
        let s = diagonalize_dense(&h).unwrap();
        let want = [-1.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 1.5];
        for (e, w) in s.energies().iter().zip(want) {
            assert!((e - w).abs() < 1e-12);
        }
    }

    #[test]
    fn columns_and_limits() {
        let h = OperatorSum::<f64>::single(2, 1.0, &[(1, Pauli::X), (2, Pauli::Y)]).unwrap();
        let mut s = diagonalize_dense(&h).unwrap();
        let vals = s.add_column("h", &h).unwrap().to_vec();
        for (v, e) in vals.iter().zip(s.energies()) {
            assert!((v - e).abs() < 1e-12);
        }
        assert_eq!(s.column_names(), vec!["h"]);
        let big = OperatorSum::<f64>::single(15, 1.0, &[(1, Pauli::Z)]).unwrap();
        assert!(matches!(diagonalize_dense(&big), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn propagator_is_unitary() {
        let h = OperatorSum::<f64>::single(2, 1.3, &[(1, Pauli::X), (2, Pauli::Y)]).unwrap();
        let u = dense_propagator(&h, 0.3).unwrap();
        let id = &u * u.adjoint();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((id[(r, c)].re - want).abs() < 1e-12 && id[(r, c)].im.abs() < 1e-12);
            }
        }
    }
}
