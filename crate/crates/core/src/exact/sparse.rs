use nalgebra::ComplexField;
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use super::state::{actions, MAX_STATE_SITES};
use crate::error::{Error, Result};
use crate::hamiltonian::OperatorSum;
use crate::scalar::Real;

/// Compressed-row Hermitian operator on a list of basis states.
#[derive(Clone, Debug)]
pub struct SparseOperator<T: Real> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex<T>>,
}

impl<T: Real> SparseOperator<T> {
    /// Materializes `op` on the full `2^L` space.
    pub fn full(op: &OperatorSum<T>) -> Result<Self> {
        let l = op.n_sites();
        if l > MAX_STATE_SITES {
            return Err(Error::TooLarge { what: "sparse materialization", n_sites: l, limit: MAX_STATE_SITES });
        }
        let dim = 1usize << l;
        Self::build(op, dim, |k| k as u64, |b| Some(b as usize))
    }

    /// Materializes `op` on the span of `basis` (sorted full-space indices).
    /// Matrix elements leaving the span are dropped, so callers must check
    /// that the span is invariant.
    pub fn on_basis(op: &OperatorSum<T>, basis: &[u64]) -> Result<Self> {
        Self::build(op, basis.len(), |k| basis[k], |b| basis.binary_search(&b).ok())
    }

    fn build(
        op: &OperatorSum<T>,
        dim: usize,
        state: impl Fn(usize) -> u64 + Sync,
        index: impl Fn(u64) -> Option<usize> + Sync,
    ) -> Result<Self> {
        let acts = actions(op);
        // Row r collects ⟨r|P|c⟩ over the unique c = r ⊕ flip of each term.
        let rows: Vec<Vec<(u32, Complex<T>)>> = (0..dim)
            .into_par_iter()
            .map(|r| {
                let b = state(r);
                let mut row: Vec<(u32, Complex<T>)> = Vec::with_capacity(acts.len());
                for a in &acts {
                    let c = b ^ a.flip_mask;
                    if let Some(ci) = index(c) {
                        let (_, amp) = a.apply(c);
                        row.push((ci as u32, amp));
                    }
                }
                row.sort_unstable_by_key(|e| e.0);
                let mut merged: Vec<(u32, Complex<T>)> = Vec::with_capacity(row.len());
                for (c, v) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += v,
                        _ => merged.push((c, v)),
                    }
                }
                merged.retain(|e| !e.1.is_zero());
                merged
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(SparseOperator { dim, row_ptr, cols, vals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        let body = |(r, out): (usize, &mut Complex<T>)| {
            let mut acc = Complex::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        };
        if self.dim >= 1 << 14 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
    }

    /// Dense copy, for small dimensions.
    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex<T>> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn row_sum_bound(&self) -> T {
        (0..self.dim)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k].modulus()).fold(T::zero(), |a, b| a + b))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[Complex<T>]) -> Complex<T> {
        let mut y = vec![Complex::zero(); self.dim];
        self.apply(x, &mut y);
        super::state::inner(x, &y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Pauli;

    #[test]
    fn matches_pauli_matrices() {
        let op = OperatorSum::<f64>::single(2, 1.0, &[(1, Pauli::Y), (2, Pauli::X)]).unwrap();
        let m = SparseOperator::full(&op).unwrap().to_dense();
        let y = Pauli::Y.matrix::<f64>();
        let x = Pauli::X.matrix::<f64>();
        for r in 0..4 {
            for c in 0..4 {
                let want = y[r >> 1][c >> 1] * x[r & 1][c & 1];
                assert!((m[(r, c)] - want).norm() < 1e-15);
            }
        }
    }
}
