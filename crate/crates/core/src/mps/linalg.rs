use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Amplitude, Real};

/// Truncated SVD `m ≈ u · diag(s) · vt` with `s` renormalized to unit norm.
pub(crate) struct Split<A: Amplitude> {
    pub u: DMatrix<A>,
    pub s: Vec<A::Re>,
    pub vt: DMatrix<A>,
    /// Squared weight of the dropped singular values, relative to the total.
    pub discarded: A::Re,
    /// True when `chi_max` cut values that `svd_tol` would have kept.
    pub saturated: bool,
}

impl<A: Amplitude> Split<A> {
    /// `diag(s) · vt`.
    pub fn s_vt(&self) -> DMatrix<A> {
        let mut m = self.vt.clone();
        for (r, &s) in self.s.iter().enumerate() {
            m.row_mut(r).scale_mut(s);
        }
        m
    }

    /// `u · diag(s)`.
    pub fn u_s(&self) -> DMatrix<A> {
        let mut m = self.u.clone();
        for (c, &s) in self.s.iter().enumerate() {
            m.column_mut(c).scale_mut(s);
        }
        m
    }
}

/// Thin SVD `m = u · diag(s) · vt`, unsorted. Singular vectors belonging to
/// values at round-off level are not orthonormal; callers drop them.
///
/// Householder QR of the tall orientation followed by one-sided Jacobi on the
/// triangular factor. nalgebra's bidiagonal SVD returns wrong factors for
/// some rank-deficient blocks, which MPS truncation produces all the time.
pub(crate) fn svd<A: Amplitude>(m: &DMatrix<A>) -> Result<(DMatrix<A>, Vec<A::Re>, DMatrix<A>)> {
    if m.nrows() < m.ncols() {
        let (u, s, vt) = svd(&m.adjoint())?;
        return Ok((vt.adjoint(), s, u.adjoint()));
    }
    let qr = m.clone().qr();
    let (q, mut w) = (qr.q(), qr.r());
    let n = w.ncols();
    let mut v = DMatrix::<A>::identity(n, n);
    if !jacobi_sweeps(w.as_mut_slice(), v.as_mut_slice(), n) {
        return Err(Error::NotConverged(format!("Jacobi SVD of a {}x{} block", m.nrows(), m.ncols())));
    }
    let mut s = Vec::with_capacity(n);
    for k in 0..n {
        let nk = w.column(k).norm();
        s.push(nk);
        if nk > A::Re::zero() {
            w.column_mut(k).unscale_mut(nk);
        }
    }
    Ok((q * w, s, v.adjoint()))
}

fn two_columns<A>(data: &mut [A], n: usize, p: usize, q: usize) -> (&mut [A], &mut [A]) {
    let (lo, hi) = data.split_at_mut(q * n);
    (&mut lo[p * n..(p + 1) * n], &mut hi[..n])
}

/// Rotates the `n` columns of the square column-major `w` until they are
/// mutually orthogonal, applying the same rotations to `v`.
fn jacobi_sweeps<A: Amplitude>(w: &mut [A], v: &mut [A], n: usize) -> bool {
    let eps = A::Re::eps();
    let sq = |c: &[A]| c.iter().fold(A::Re::zero(), |s, x| s + x.modulus_squared());
    let total = w.chunks(n).fold(A::Re::zero(), |s, c| s + sq(c));
    // Columns below this squared norm are round-off and left alone.
    let floor = eps * eps * total;
    for _ in 0..64 {
        let mut norms: Vec<A::Re> = w.chunks(n).map(sq).collect();
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (a, b) = (norms[p], norms[q]);
                if a <= floor || b <= floor {
                    continue;
                }
                let g = {
                    let (cp, cq) = two_columns(w, n, p, q);
                    cp.iter().zip(cq.iter()).fold(A::zero(), |s, (x, y)| s + x.conjugate() * *y)
                };
                let gm = g.modulus();
                if gm <= eps * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase out of the overlap, then a real Jacobi step.
                let ph = (g / A::from_real(gm)).conjugate();
                let zeta = (b - a) / (gm + gm);
                let sign = if zeta >= A::Re::zero() { A::Re::one() } else { -A::Re::one() };
                let t = sign / (zeta.abs() + (A::Re::one() + zeta * zeta).sqrt());
                let c = A::Re::one() / (A::Re::one() + t * t).sqrt();
                let s = c * t;
                for data in [&mut *w, &mut *v] {
                    let (cp, cq) = two_columns(data, n, p, q);
                    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                        let (xv, yv) = (*x, *y * ph);
                        *x = xv.scale(c) - yv.scale(s);
                        *y = xv.scale(s) + yv.scale(c);
                    }
                }
                norms[p] = a - t * gm;
                norms[q] = b + t * gm;
            }
        }
        if !rotated {
            return true;
        }
    }
    false
}

/// Keeps singular values above `svd_tol` times the norm, at most `chi_max`
/// of them and at least one.
pub(crate) fn split<A: Amplitude>(m: DMatrix<A>, chi_max: usize, svd_tol: A::Re) -> Result<Split<A>> {
    let (r, c) = m.shape();
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::Numerical("non-finite entry before SVD".into()));
    }
    let (u, sv, vt) = svd(&m)?;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let total = sv.iter().fold(A::Re::zero(), |a, &s| a + s * s);
    if !(total > A::Re::zero()) {
        return Err(Error::Numerical("SVD of a zero block".into()));
    }
    // Values at round-off level carry no weight and would spoil the
    // isometry of `u`.
    let cut = svd_tol.max(A::Re::eps() * A::Re::of(16.0)) * total.sqrt();
    let above = order.iter().take_while(|&&k| sv[k] > cut).count().max(1);
    let keep = above.min(chi_max.max(1));
    let kept_w = order[..keep].iter().fold(A::Re::zero(), |a, &k| a + sv[k] * sv[k]);
    let discarded = ((total - kept_w) / total).max(A::Re::zero());
    let scale = A::Re::one() / kept_w.sqrt();
    let u = DMatrix::from_fn(r, keep, |i, j| u[(i, order[j])]);
    let vt = DMatrix::from_fn(keep, c, |i, j| vt[(order[i], j)]);
    let s = order[..keep].iter().map(|&k| sv[k] * scale).collect();
    Ok(Split { u, s, vt, discarded, saturated: keep < above })
}

/// Lowest eigenpair of a Hermitian map by restarted Lanczos with full
/// reorthogonalization. `v0` seeds the first restart.
pub(crate) fn lanczos_ground<A, F>(
    apply: F,
    v0: DVector<A>,
    krylov_dim: usize,
    tol: A::Re,
    max_restarts: usize,
) -> (A::Re, DVector<A>)
where
    A: Amplitude,
    F: Fn(&DVector<A>) -> DVector<A>,
{
    let dim = v0.len();
    let m = krylov_dim.min(dim).max(1);
    let mut x = v0;
    let nx = x.norm();
    x.unscale_mut(nx);
    let mut energy = A::Re::zero();
    for _ in 0..=max_restarts {
        let mut basis: Vec<DVector<A>> = vec![x.clone()];
        let mut alpha: Vec<A::Re> = Vec::new();
        let mut beta: Vec<A::Re> = Vec::new();
        let mut residual;
        let (y, emin) = loop {
            let mut w = apply(basis.last().unwrap());
            alpha.push(basis.last().unwrap().dotc(&w).real());
            for _ in 0..2 {
                for v in &basis {
                    let c = v.dotc(&w);
                    w.axpy(-c, v, A::one());
                }
            }
            let b = w.norm();
            let (y, emin) = tridiagonal_ground(&alpha, &beta);
            residual = b * y[alpha.len() - 1].abs();
            let scale = alpha.iter().fold(A::Re::one(), |a, &x| a.max(x.abs()));
            // Stop as soon as the Ritz pair is good enough, or the space is exhausted.
            if basis.len() == m || residual <= tol * emin.abs().max(A::Re::one()) || b <= A::Re::of(1e-12) * scale {
                break (y, emin);
            }
            beta.push(b);
            w.unscale_mut(b);
            basis.push(w);
        };
        energy = emin;
        let mut nx = DVector::<A>::zeros(dim);
        for (j, v) in basis.iter().enumerate() {
            nx.axpy(A::from_real(y[j]), v, A::one());
        }
        let n = nx.norm();
        nx.unscale_mut(n);
        x = nx;
        if residual <= tol * energy.abs().max(A::Re::one()) {
            break;
        }
    }
    (energy, x)
}

/// Lowest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn tridiagonal_ground<R: Real>(alpha: &[R], beta: &[R]) -> (DVector<R>, R) {
    let k = alpha.len();
    let tri = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            R::zero()
        }
    });
    let eig = tri.symmetric_eigen();
    let (imin, &emin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    (eig.eigenvectors.column(imin).into_owned(), emin)
}
