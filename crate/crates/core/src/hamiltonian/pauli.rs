use std::collections::BTreeMap;
use std::fmt;

use nalgebra::ComplexField;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{i, re, Real};

/// Single-site Pauli matrix in the `(|0⟩, |1⟩)` basis, with
/// `Z = |1⟩⟨1| − |0⟩⟨0|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self · other = phase · result`, phase a power of `i`.
    pub fn mul(self, other: Pauli) -> (u8, Option<Pauli>) {
        use Pauli::*;
        match (self, other) {
            (a, b) if a == b => (0, None),
            (X, Y) => (1, Some(Z)),
            (Y, Z) => (1, Some(X)),
            (Z, X) => (1, Some(Y)),
            (Y, X) => (3, Some(Z)),
            (Z, Y) => (3, Some(X)),
            (X, Z) => (3, Some(Y)),
            _ => unreachable!(),
        }
    }

    pub fn label(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn parse(c: char) -> Option<Pauli> {
        match c {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Dense 2×2 matrix, indexed `[out][in]`.
    pub fn matrix<T: Real>(self) -> [[Complex<T>; 2]; 2] {
        let z = Complex::zero();
        let o = Complex::one();
        match self {
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, i::<T>()], [-i::<T>(), z]],
            Pauli::Z => [[-o, z], [z, o]],
        }
    }
}

/// Ordered product of non-identity Paulis on distinct sites (1-based).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliProduct(Vec<(usize, Pauli)>);

impl PauliProduct {
    pub fn identity() -> Self {
        PauliProduct(Vec::new())
    }

    pub fn new(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut v: Vec<(usize, Pauli)> = ops.into_iter().collect();
        v.sort_by_key(|&(s, _)| s);
        if v.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams("repeated site in Pauli product".into()));
        }
        if v.iter().any(|&(s, _)| s == 0) {
            return Err(Error::InvalidParams("sites are 1-based".into()));
        }
        Ok(PauliProduct(v))
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, site: usize) -> Option<Pauli> {
        self.0.iter().find(|&&(s, _)| s == site).map(|&(_, p)| p)
    }

    pub fn max_site(&self) -> usize {
        self.0.last().map_or(0, |&(s, _)| s)
    }

    pub fn min_site(&self) -> usize {
        self.0.first().map_or(0, |&(s, _)| s)
    }

    /// Product `self · other = i^phase · result`.
    pub fn mul(&self, other: &PauliProduct) -> (u8, PauliProduct) {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut phase = 0u8;
        let (mut p, mut q) = (0, 0);
        while p < a.len() || q < b.len() {
            if q == b.len() || (p < a.len() && a[p].0 < b[q].0) {
                out.push(a[p]);
                p += 1;
            } else if p == a.len() || b[q].0 < a[p].0 {
                out.push(b[q]);
                q += 1;
            } else {
                let (ph, r) = a[p].1.mul(b[q].1);
                phase = (phase + ph) % 4;
                if let Some(r) = r {
                    out.push((a[p].0, r));
                }
                p += 1;
                q += 1;
            }
        }
        (phase, PauliProduct(out))
    }

    /// Whether two products commute (even number of anticommuting sites).
    pub fn commutes_with(&self, other: &PauliProduct) -> bool {
        let mut anti = 0;
        for &(s, p) in &self.0 {
            if let Some(q) = other.get(s) {
                if p != q {
                    anti += 1;
                }
            }
        }
        anti % 2 == 0
    }
}

impl fmt::Display for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(s, p) in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}:{}", s, p.label())?;
            first = false;
        }
        Ok(())
    }
}

fn phase_power<T: Real>(k: u8) -> Complex<T> {
    match k % 4 {
        0 => Complex::one(),
        1 => i(),
        2 => -Complex::<T>::one(),
        _ => -i::<T>(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliString<T: Real> {
    pub product: PauliProduct,
    pub coeff: Complex<T>,
}

impl<T: Real> PauliString<T> {
    pub fn new(coeff: Complex<T>, ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        Ok(PauliString { product: PauliProduct::new(ops)?, coeff })
    }
}

/// Weighted sum of Pauli products on `n_sites` qubits, kept normalized:
/// products sorted and unique, vanishing coefficients dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum<T: Real> {
    n_sites: usize,
    terms: Vec<PauliString<T>>,
}

impl<T: Real> OperatorSum<T> {
    pub fn zero(n_sites: usize) -> Self {
        OperatorSum { n_sites, terms: Vec::new() }
    }

    pub fn identity(n_sites: usize) -> Self {
        Self::scaled_identity(n_sites, Complex::one())
    }

    pub fn scaled_identity(n_sites: usize, c: Complex<T>) -> Self {
        let mut op = Self::zero(n_sites);
        op.terms.push(PauliString { product: PauliProduct::identity(), coeff: c });
        op.normalize()
    }

    /// Builds and normalizes a sum, checking that every site is in range.
    pub fn from_terms(n_sites: usize, terms: Vec<PauliString<T>>) -> Result<Self> {
        for t in &terms {
            let s = t.product.max_site();
            if s > n_sites {
                return Err(Error::SiteOutOfRange { site: s, n_sites });
            }
        }
        Ok(OperatorSum { n_sites, terms }.normalize())
    }

    /// Single product with a real coefficient.
    pub fn single(n_sites: usize, coeff: T, ops: &[(usize, Pauli)]) -> Result<Self> {
        Self::from_terms(n_sites, vec![PauliString::new(re(coeff), ops.iter().copied())?])
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[PauliString<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges equal products and drops coefficients that vanish relative to
    /// the largest one. Idempotent.
    pub fn normalize(self) -> Self {
        let mut map: BTreeMap<PauliProduct, Complex<T>> = BTreeMap::new();
        for t in self.terms {
            *map.entry(t.product).or_insert_with(Complex::zero) += t.coeff;
        }
        let scale = map.values().map(|c| c.modulus()).fold(T::zero(), |a, b| a.max(b));
        let cut = scale * T::eps() * T::of(64.0);
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.modulus() > cut)
            .map(|(product, coeff)| PauliString { product, coeff })
            .collect();
        OperatorSum { n_sites: self.n_sites, terms }
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n_sites != other.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: other.n_sites });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(OperatorSum { n_sites: self.n_sites, terms }.normalize())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(re(-T::one())))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PauliString { product: t.product.clone(), coeff: t.coeff * c })
            .collect();
        OperatorSum { n_sites: self.n_sites, terms }.normalize()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let (ph, product) = a.product.mul(&b.product);
                terms.push(PauliString { product, coeff: a.coeff * b.coeff * phase_power::<T>(ph) });
            }
        }
        Ok(OperatorSum { n_sites: self.n_sites, terms }.normalize())
    }

    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PauliString { product: t.product.clone(), coeff: t.coeff.conj() })
            .collect();
        OperatorSum { n_sites: self.n_sites, terms }
    }

    /// `[a, b]`. Only anticommuting product pairs contribute, each twice.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut terms = Vec::new();
        let two = re(T::of(2.0));
        for a in &self.terms {
            for b in &other.terms {
                if a.product.commutes_with(&b.product) {
                    continue;
                }
                let (ph, product) = a.product.mul(&b.product);
                terms.push(PauliString { product, coeff: a.coeff * b.coeff * phase_power::<T>(ph) * two });
            }
        }
        Ok(OperatorSum { n_sites: self.n_sites, terms }.normalize())
    }

    /// `sqrt(Σ|c|²)`, the Frobenius norm divided by `sqrt(2^L)`.
    pub fn norm(&self) -> T {
        self.terms.iter().map(|t| t.coeff.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
    }

    /// Norm of the anti-Hermitian part.
    pub fn hermiticity_defect(&self) -> T {
        self.terms.iter().map(|t| t.coeff.im * t.coeff.im).fold(T::zero(), |a, b| a + b).sqrt()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= T::of(1e3) * T::eps() * self.norm().max(T::one())
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian(self.hermiticity_defect().to_f64_lossy()))
        }
    }

    /// Whether every coefficient is real and no product contains an odd
    /// number of `Y`, so the matrix is real in the computational basis.
    pub fn is_real_matrix(&self) -> bool {
        self.terms.iter().all(|t| {
            let ny = t.product.ops().iter().filter(|&&(_, p)| p == Pauli::Y).count();
            if ny % 2 == 0 {
                t.coeff.im == T::zero()
            } else {
                t.coeff.re == T::zero()
            }
        })
    }

    /// Largest `max_site - min_site + 1` over non-identity terms.
    pub fn max_range(&self) -> usize {
        self.terms
            .iter()
            .filter(|t| !t.product.is_identity())
            .map(|t| t.product.max_site() - t.product.min_site() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Re-labels the chain length, for embedding in a longer chain.
    pub fn with_n_sites(mut self, n_sites: usize) -> Result<Self> {
        if let Some(s) = self.terms.iter().map(|t| t.product.max_site()).max() {
            if s > n_sites {
                return Err(Error::SiteOutOfRange { site: s, n_sites });
            }
        }
        self.n_sites = n_sites;
        Ok(self)
    }

    /// Coefficient of a given product, zero if absent.
    pub fn coeff_of(&self, ops: &[(usize, Pauli)]) -> Complex<T> {
        let Ok(key) = PauliProduct::new(ops.iter().copied()) else {
            return Complex::zero();
        };
        self.terms
            .binary_search_by(|t| t.product.cmp(&key))
            .map(|k| self.terms[k].coeff)
            .unwrap_or_else(|_| Complex::zero())
    }

    /// Converts the coefficient type.
    pub fn cast<U: Real>(&self) -> OperatorSum<U> {
        let terms = self
            .terms
            .iter()
            .map(|t| PauliString {
                product: t.product.clone(),
                coeff: Complex::new(U::of(t.coeff.re.to_f64_lossy()), U::of(t.coeff.im.to_f64_lossy())),
            })
            .collect();
        OperatorSum { n_sites: self.n_sites, terms }.normalize()
    }
}

/// `‖[a, b]‖`, zero exactly when the symbolic commutator vanishes.
pub fn commutator_norm<T: Real>(a: &OperatorSum<T>, b: &OperatorSum<T>) -> Result<T> {
    Ok(a.commutator(b)?.norm())
}
