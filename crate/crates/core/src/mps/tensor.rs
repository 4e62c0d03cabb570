use nalgebra::{ComplexField, DMatrix, RealField};
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use super::linalg::split;
use crate::error::{Error, Result};
use crate::exact::StateVector;
use crate::hamiltonian::{OperatorSum, Pauli};
use crate::scalar::{Amplitude, Real};

/// Single-site operator, `op[out][in]`.
pub type Local<A> = [[A; 2]; 2];

/// Largest chain `to_state_vector` will expand.
pub const MAX_DENSE_MPS: usize = 24;

/// Open-boundary matrix product state in mixed canonical form.
///
/// Site `k` (0-based) holds one `χ_l × χ_r` matrix per physical value.
/// Tensors left of `center` are left isometries, those right of it right
/// isometries; the norm lives in the center tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Mps<A: Amplitude> {
    pub(crate) sites: Vec<[DMatrix<A>; 2]>,
    pub(crate) center: usize,
}

/// Local Pauli matrices with `Y` replaced by the real `iY`. Returns the
/// phase `(−i)^{n_Y}` that restores the original string.
pub(crate) fn real_pauli<A: Amplitude>(p: Pauli) -> (Local<A>, bool) {
    let (o, z) = (A::one(), A::zero());
    match p {
        Pauli::X => ([[z, o], [o, z]], false),
        Pauli::Y => ([[z, -o], [o, z]], true),
        Pauli::Z => ([[-o, z], [z, o]], false),
    }
}

pub(crate) fn y_phase<T: Real>(n_y: usize) -> Complex<T> {
    match n_y % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), -T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), T::one()),
    }
}

/// Vertical stack `[A₀; A₁]`, rows indexed by `(s, α)`.
pub(crate) fn stack_rows<A: Amplitude>(t: &[DMatrix<A>; 2]) -> DMatrix<A> {
    let (r, c) = t[0].shape();
    DMatrix::from_fn(2 * r, c, |i, j| t[i / r][(i % r, j)])
}

/// Horizontal stack `[A₀ A₁]`, columns indexed by `(s, β)`.
pub(crate) fn stack_cols<A: Amplitude>(t: &[DMatrix<A>; 2]) -> DMatrix<A> {
    let (r, c) = t[0].shape();
    DMatrix::from_fn(r, 2 * c, |i, j| t[j / c][(i, j % c)])
}

pub(crate) fn unstack_rows<A: Amplitude>(m: &DMatrix<A>) -> [DMatrix<A>; 2] {
    let r = m.nrows() / 2;
    [m.rows(0, r).into_owned(), m.rows(r, r).into_owned()]
}

pub(crate) fn unstack_cols<A: Amplitude>(m: &DMatrix<A>) -> [DMatrix<A>; 2] {
    let c = m.ncols() / 2;
    [m.columns(0, c).into_owned(), m.columns(c, c).into_owned()]
}

/// `Σ_{s',s} op[s'][s] · A[s']† · E · B[s]`; `op = None` is the identity.
pub(crate) fn transfer<A: Amplitude>(
    e: &DMatrix<A>,
    bra: &[DMatrix<A>; 2],
    ket: &[DMatrix<A>; 2],
    op: Option<&Local<A>>,
) -> DMatrix<A> {
    let mut out = DMatrix::zeros(bra[0].ncols(), ket[0].ncols());
    for s in 0..2 {
        let eb = e * &ket[s];
        for sp in 0..2 {
            let w = match op {
                Some(op) => op[sp][s],
                None if sp == s => A::one(),
                None => continue,
            };
            if w == A::zero() {
                continue;
            }
            out.gemm_ad(w, &bra[sp], &eb, A::one());
        }
    }
    out
}

impl<A: Amplitude> Mps<A> {
    /// Product state from normalized local vectors `(⟨0|φ⟩, ⟨1|φ⟩)`.
    pub fn product(local: &[[A; 2]]) -> Result<Self> {
        if local.is_empty() {
            return Err(Error::InvalidParams("empty chain".into()));
        }
        let sites = local
            .iter()
            .map(|v| {
                let n = (v[0].modulus_squared() + v[1].modulus_squared()).sqrt();
                if !(n > A::Re::zero()) {
                    return Err(Error::InvalidParams("zero local state".into()));
                }
                Ok([DMatrix::from_element(1, 1, v[0].unscale(n)), DMatrix::from_element(1, 1, v[1].unscale(n))])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Mps { sites, center: 0 })
    }

    /// Computational basis state, bit `L − k` of `index` giving site `k`.
    pub fn basis_state(n_sites: usize, index: u64) -> Result<Self> {
        let local: Vec<[A; 2]> = (1..=n_sites)
            .map(|k| {
                if (index >> (n_sites - k)) & 1 == 1 {
                    [A::zero(), A::one()]
                } else {
                    [A::one(), A::zero()]
                }
            })
            .collect();
        Self::product(&local)
    }

    /// Builds tensors from explicit site matrices and brings them into
    /// canonical form with the center on the first site.
    pub fn from_tensors(sites: Vec<[DMatrix<A>; 2]>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidParams("empty chain".into()));
        }
        for (k, t) in sites.iter().enumerate() {
            if t[0].shape() != t[1].shape() {
                return Err(Error::InvalidParams(format!("site {} has mismatched physical blocks", k + 1)));
            }
            if k > 0 && sites[k - 1][0].ncols() != t[0].nrows() {
                return Err(Error::DimensionMismatch { expected: sites[k - 1][0].ncols(), got: t[0].nrows() });
            }
        }
        if sites[0][0].nrows() != 1 || sites[sites.len() - 1][0].ncols() != 1 {
            return Err(Error::InvalidParams("open boundary bonds must have dimension 1".into()));
        }
        let mut m = Mps { sites, center: 0 };
        // A rightward QR sweep makes no assumption about the input; the
        // leftward one then leaves right isometries behind the center.
        m.move_center(m.n_sites() - 1);
        m.move_center(0);
        Ok(m)
    }

    /// Exact MPS of a state vector by successive SVDs, keeping singular
    /// values above `svd_tol`.
    pub fn from_state_vector(psi: &StateVector<A::Re>, svd_tol: A::Re) -> Result<Self> {
        let l = psi.n_sites();
        let amps = psi
            .amplitudes()
            .iter()
            .map(|c| A::from_complex(*c).ok_or_else(|| Error::InvalidParams("complex amplitude in a real MPS".into())))
            .collect::<Result<Vec<A>>>()?;
        let mut rest = DMatrix::from_row_slice(1, amps.len(), &amps);
        let mut sites = Vec::with_capacity(l);
        for _ in 0..l {
            let chi = rest.nrows();
            let r = rest.ncols() / 2;
            let m = DMatrix::from_fn(2 * chi, r, |i, j| rest[(i % chi, (i / chi) * r + j)]);
            let sp = split(m, usize::MAX, svd_tol)?;
            rest = sp.s_vt();
            sites.push(unstack_rows(&sp.u));
        }
        // `rest` is now a 1×1 phase carrying the global sign.
        let phase = rest[(0, 0)];
        let last = sites.last_mut().unwrap();
        for b in last.iter_mut() {
            *b *= phase;
        }
        Ok(Mps { sites, center: l - 1 })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Orthogonality center, 0-based.
    pub fn center(&self) -> usize {
        self.center
    }

    pub fn site(&self, k: usize) -> &[DMatrix<A>; 2] {
        &self.sites[k]
    }

    /// Dimensions of the `L − 1` internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.n_sites() - 1].iter().map(|t| t[0].ncols()).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// QR step moving the center from `k` to `k + 1`.
    fn shift_right(&mut self, k: usize) {
        let m = stack_rows(&self.sites[k]);
        let qr = m.qr();
        let (q, r) = (qr.q(), qr.r());
        self.sites[k] = unstack_rows(&q);
        let next = &self.sites[k + 1];
        self.sites[k + 1] = [&r * &next[0], &r * &next[1]];
    }

    /// QR step moving the center from `k` to `k − 1`.
    fn shift_left(&mut self, k: usize) {
        let m = stack_cols(&self.sites[k]).adjoint();
        let qr = m.qr();
        let (q, r) = (qr.q(), qr.r());
        self.sites[k] = unstack_cols(&q.adjoint());
        let ra = r.adjoint();
        let prev = &self.sites[k - 1];
        self.sites[k - 1] = [&prev[0] * &ra, &prev[1] * &ra];
    }

    /// Moves the orthogonality center to site `to` (0-based).
    pub fn move_center(&mut self, to: usize) {
        assert!(to < self.n_sites(), "center {to} outside chain");
        while self.center < to {
            self.shift_right(self.center);
            self.center += 1;
        }
        while self.center > to {
            self.shift_left(self.center);
            self.center -= 1;
        }
    }

    pub fn norm(&self) -> A::Re {
        let c = &self.sites[self.center];
        (c[0].norm_squared() + c[1].norm_squared()).sqrt()
    }

    pub fn normalize(&mut self) -> Result<A::Re> {
        let n = self.norm();
        if !(n > A::Re::zero()) {
            return Err(Error::Numerical("MPS has zero norm".into()));
        }
        let c = &mut self.sites[self.center];
        c[0].unscale_mut(n);
        c[1].unscale_mut(n);
        Ok(n)
    }

    /// `⟨self|other⟩` by full contraction.
    pub fn overlap(&self, other: &Mps<A>) -> Result<A> {
        if self.n_sites() != other.n_sites() {
            return Err(Error::DimensionMismatch { expected: self.n_sites(), got: other.n_sites() });
        }
        let mut e = DMatrix::from_element(1, 1, A::one());
        for (a, b) in self.sites.iter().zip(&other.sites) {
            e = transfer(&e, a, b, None);
        }
        Ok(e[(0, 0)])
    }

    /// Largest deviation of any tensor from its isometry condition.
    pub fn isometry_defect(&self) -> A::Re {
        let mut worst = A::Re::zero();
        for (k, t) in self.sites.iter().enumerate() {
            let g = if k < self.center {
                let m = stack_rows(t);
                m.adjoint() * m
            } else if k > self.center {
                let m = stack_cols(t);
                &m * m.adjoint()
            } else {
                continue;
            };
            let id = DMatrix::<A>::identity(g.nrows(), g.ncols());
            worst = worst.max((g - id).norm());
        }
        worst
    }

    /// `⟨ψ|O₁⊗…|ψ⟩` for local operators on sorted 0-based sites, without
    /// any normalization.
    pub(crate) fn expect_product(&self, ops: &[(usize, Local<A>)]) -> A {
        let (a, b) = match (ops.first(), ops.last()) {
            (Some(f), Some(l)) => (f.0, l.0),
            _ => return A::from_real(self.norm().powi(2)),
        };
        let lo = a.min(self.center);
        let hi = b.max(self.center);
        let chi = self.sites[lo][0].nrows();
        let mut e = DMatrix::<A>::identity(chi, chi);
        let mut it = ops.iter().peekable();
        for k in lo..=hi {
            let op = match it.peek() {
                Some((s, op)) if *s == k => {
                    it.next();
                    Some(op)
                }
                _ => None,
            };
            e = transfer(&e, &self.sites[k], &self.sites[k], op);
        }
        e.trace()
    }

    /// Expectation of a Pauli sum. Hermitian operators give a real value up
    /// to round-off; the imaginary part is returned, not dropped.
    pub fn expectation(&self, op: &OperatorSum<A::Re>) -> Result<Complex<A::Re>> {
        if op.n_sites() != self.n_sites() {
            return Err(Error::DimensionMismatch { expected: self.n_sites(), got: op.n_sites() });
        }
        let eval = |t: &crate::hamiltonian::PauliString<A::Re>| {
            let mut n_y = 0;
            let ops: Vec<(usize, Local<A>)> = t
                .product
                .ops()
                .iter()
                .map(|&(s, p)| {
                    let (m, y) = real_pauli::<A>(p);
                    n_y += y as usize;
                    (s - 1, m)
                })
                .collect();
            self.expect_product(&ops).to_complex() * t.coeff * y_phase(n_y)
        };
        let terms = op.terms();
        let sum = if terms.len() > 8 {
            terms.par_iter().map(eval).reduce(Complex::zero, |a, b| a + b)
        } else {
            terms.iter().map(eval).fold(Complex::zero(), |a, b| a + b)
        };
        Ok(sum)
    }

    /// Dense amplitudes, for chains up to [`MAX_DENSE_MPS`] sites.
    pub fn to_state_vector(&self) -> Result<StateVector<A::Re>> {
        let l = self.n_sites();
        if l > MAX_DENSE_MPS {
            return Err(Error::TooLarge { what: "MPS expansion", n_sites: l, limit: MAX_DENSE_MPS });
        }
        let mut rows: Vec<DMatrix<A>> = vec![DMatrix::from_element(1, 1, A::one())];
        for t in &self.sites {
            rows = rows.iter().flat_map(|p| [p * &t[0], p * &t[1]]).collect();
        }
        let amps = rows.iter().map(|r| r[(0, 0)].to_complex()).collect();
        StateVector::from_amplitudes(l, amps)
    }
}

impl<T: Real> Mps<T>
where
    T: Amplitude<Re = T>,
{
    /// Same state with complex tensors, for time evolution.
    pub fn to_complex(&self) -> Mps<Complex<T>> {
        Mps {
            sites: self.sites.iter().map(|t| [t[0].map(|x| Complex::new(x, T::zero())), t[1].map(|x| Complex::new(x, T::zero()))]).collect(),
            center: self.center,
        }
    }
}
