use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use num_traits::Zero;

use super::sparse::SparseOperator;
use super::state::{inner, norm, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::OperatorSum;
use crate::scalar::Real;

/// Diagnostics accumulated over a propagation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KrylovStats {
    pub substeps: usize,
    pub rejected: usize,
    pub breakdowns: usize,
    /// Largest accepted local error estimate.
    pub max_error: f64,
    /// Largest `|1 − ‖ψ‖|` seen before renormalization.
    pub max_norm_drift: f64,
}

/// Propagates with `exp(−i 2π H t)` using a Lanczos basis of at most
/// `krylov_dim` vectors and adaptive substeps.
pub struct KrylovPropagator<'a, T: Real> {
    op: &'a SparseOperator<T>,
    krylov_dim: usize,
    tol: T,
    stats: KrylovStats,
}

struct Lanczos<T: Real> {
    basis: Vec<Vec<Complex<T>>>,
    /// Eigenvalues and eigenvectors of the tridiagonal projection.
    evals: Vec<T>,
    evecs: DMatrix<T>,
    /// Coupling to the first excluded vector; zero on breakdown.
    beta_next: T,
}

impl<'a, T: Real> KrylovPropagator<'a, T> {
    pub fn new(op: &'a SparseOperator<T>, krylov_dim: usize, tol: T) -> Result<Self> {
        if krylov_dim < 2 {
            return Err(Error::InvalidParams(format!("Krylov dimension {krylov_dim} < 2")));
        }
        if !(tol > T::zero()) {
            return Err(Error::InvalidParams("Krylov tolerance must be positive".into()));
        }
        Ok(KrylovPropagator { op, krylov_dim, tol, stats: KrylovStats::default() })
    }

    pub fn stats(&self) -> &KrylovStats {
        &self.stats
    }

    fn lanczos(&self, v0: &[Complex<T>]) -> Lanczos<T> {
        let dim = self.op.dim();
        let m = self.krylov_dim.min(dim);
        let scale = self.op.row_sum_bound().max(T::one());
        let mut basis: Vec<Vec<Complex<T>>> = vec![v0.to_vec()];
        let mut alpha: Vec<T> = Vec::with_capacity(m);
        let mut beta: Vec<T> = Vec::with_capacity(m);
        let mut w = vec![Complex::zero(); dim];
        let mut beta_next = T::zero();
        loop {
            let j = basis.len() - 1;
            self.op.apply(&basis[j], &mut w);
            let a = inner(&basis[j], &w).re;
            alpha.push(a);
            // Full reorthogonalization, two passes.
            for _ in 0..2 {
                for v in &basis {
                    let c = inner(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= *vi * c;
                    }
                }
            }
            let b = norm(&w);
            if basis.len() == m {
                beta_next = b;
                break;
            }
            if b <= T::of(1e-13) * scale {
                break;
            }
            beta.push(b);
            let inv = T::one() / b;
            basis.push(w.iter().map(|x| *x * inv).collect());
        }
        let k = alpha.len();
        let tri = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                T::zero()
            }
        });
        let eig = tri.symmetric_eigen();
        Lanczos { basis, evals: eig.eigenvalues.iter().copied().collect(), evecs: eig.eigenvectors, beta_next }
    }

    /// Coefficients of `exp(−i 2π h T) e₁` in the Lanczos basis.
    fn small_exp(lz: &Lanczos<T>, h: T) -> Vec<Complex<T>> {
        let k = lz.evals.len();
        let w = T::two_pi() * h;
        let mut y = vec![Complex::zero(); k];
        for (q, &lam) in lz.evals.iter().enumerate() {
            let ph = Complex::new((w * lam).cos(), -(w * lam).sin()) * lz.evecs[(0, q)];
            for (r, yr) in y.iter_mut().enumerate() {
                *yr += ph * lz.evecs[(r, q)];
            }
        }
        y
    }

    /// Advances `psi` in place by `t` (μs, either sign).
    pub fn advance(&mut self, psi: &mut Vec<Complex<T>>, t: T) -> Result<()> {
        if psi.len() != self.op.dim() {
            return Err(Error::DimensionMismatch { expected: self.op.dim(), got: psi.len() });
        }
        let mut remaining = t;
        let spectral = self.op.row_sum_bound().max(T::of(1e-300));
        // Initial guess: a few radians of phase per substep.
        let mut h_try = (T::of(4.0) / (T::two_pi() * spectral)).min(remaining.abs());
        let sign = if t < T::zero() { -T::one() } else { T::one() };
        while remaining.abs() > T::zero() {
            let nu = norm(psi);
            let v0: Vec<Complex<T>> = psi.iter().map(|x| *x / nu).collect();
            let lz = self.lanczos(&v0);
            if lz.beta_next == T::zero() {
                self.stats.breakdowns += 1;
            }
            let k = lz.evals.len();
            let mut h = if lz.beta_next == T::zero() { remaining.abs() } else { h_try.min(remaining.abs()) };
            let (y, err) = loop {
                let y = Self::small_exp(&lz, sign * h);
                let err = lz.beta_next * y[k - 1].modulus() * T::two_pi() * h;
                if err <= self.tol {
                    break (y, err);
                }
                self.stats.rejected += 1;
                let ratio = (self.tol / err).powf(T::one() / T::of_usize(k)) * T::of(0.9);
                h *= ratio.min(T::of(0.5)).max(T::of(0.1));
                if h < T::of(1e-14) * t.abs().max(T::one()) {
                    return Err(Error::NotConverged(format!(
                        "Krylov substep underflow (error estimate {:e})",
                        err.to_f64_lossy()
                    )));
                }
            };
            for x in psi.iter_mut() {
                *x = Complex::zero();
            }
            for (v, c) in lz.basis.iter().zip(&y) {
                let c = *c * nu;
                for (p, vi) in psi.iter_mut().zip(v) {
                    *p += *vi * c;
                }
            }
            let n = norm(psi);
            let drift = (T::one() - n).abs().to_f64_lossy();
            self.stats.max_norm_drift = self.stats.max_norm_drift.max(drift);
            let inv = T::one() / n;
            for p in psi.iter_mut() {
                *p *= inv;
            }
            self.stats.max_error = self.stats.max_error.max(err.to_f64_lossy());
            self.stats.substeps += 1;
            remaining = if h >= remaining.abs() { T::zero() } else { remaining - sign * h };
            // Grow cautiously after an easy step.
            h_try = if err < self.tol * T::of(1e-3) { h * T::of(2.0) } else { h };
        }
        Ok(())
    }

    /// States at each of `times`, which must start at 0 and increase.
    pub fn evolve(&mut self, psi0: &StateVector<T>, times: &[T]) -> Result<Vec<StateVector<T>>> {
        check_times(times)?;
        let mut out = Vec::with_capacity(times.len());
        let mut psi = psi0.amplitudes().to_vec();
        let mut now = T::zero();
        for &t in times {
            if t > now {
                self.advance(&mut psi, t - now)?;
                now = t;
            }
            out.push(StateVector::from_raw(psi0.n_sites(), psi.clone()));
        }
        log::debug!(
            "krylov: {} substeps, {} rejected, max error {:e}, max norm drift {:e}",
            self.stats.substeps,
            self.stats.rejected,
            self.stats.max_error,
            self.stats.max_norm_drift
        );
        Ok(out)
    }
}

pub(crate) fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.first().is_some_and(|&t| t != T::zero()) {
        return Err(Error::InvalidParams("time grid must start at 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `|ψ(t_k)⟩ = exp(−i 2π H t_k)|ψ₀⟩` on the full space.
pub fn evolve_krylov<T: Real>(
    h: &OperatorSum<T>,
    psi0: &StateVector<T>,
    times: &[T],
    krylov_dim: usize,
) -> Result<Vec<StateVector<T>>> {
    h.ensure_hermitian()?;
    if h.n_sites() != psi0.n_sites() {
        return Err(Error::DimensionMismatch { expected: psi0.n_sites(), got: h.n_sites() });
    }
    let op = SparseOperator::full(h)?;
    let tol = T::of(1e-10).max(T::eps() * T::of(100.0));
    KrylovPropagator::new(&op, krylov_dim, tol)?.evolve(psi0, times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Pauli;

    #[test]
    fn zero_time_is_identity() {
        let h = OperatorSum::<f64>::single(2, 3.0, &[(1, Pauli::X), (2, Pauli::X)]).unwrap();
        let psi = StateVector::basis_state(2, 1).unwrap();
        let out = evolve_krylov(&h, &psi, &[0.0], 10).unwrap();
        assert_eq!(out[0], psi);
    }

    #[test]
    fn free_spin_phase() {
        // H = f Z: |+⟩ precesses, ⟨X⟩ = cos(2π·2f·t).
        let f = 1.5;
        let h = OperatorSum::<f64>::single(1, f, &[(1, Pauli::Z)]).unwrap();
        let s = 0.5f64.sqrt();
        let psi = StateVector::from_amplitudes(1, vec![Complex::new(s, 0.0), Complex::new(s, 0.0)]).unwrap();
        let x = OperatorSum::single(1, 1.0, &[(1, Pauli::X)]).unwrap();
        let ts = [0.0, 0.1, 0.37];
        let out = evolve_krylov(&h, &psi, &ts, 4).unwrap();
        for (t, st) in ts.iter().zip(&out) {
            let want = (std::f64::consts::TAU * 2.0 * f * t).cos();
            assert!((st.expectation(&x).unwrap().re - want).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_grid_and_operator() {
        let h = OperatorSum::<f64>::single(1, 1.0, &[(1, Pauli::Z)]).unwrap();
        let psi = StateVector::basis_state(1, 0).unwrap();
        assert!(evolve_krylov(&h, &psi, &[0.0, 0.2, 0.1], 4).is_err());
        assert!(evolve_krylov(&h.scale(crate::scalar::i()), &psi, &[0.0], 4).is_err());
    }
}
