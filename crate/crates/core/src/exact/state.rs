use nalgebra::ComplexField;
use num_complex::Complex;
use num_traits::Zero;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{OperatorSum, Pauli};
use crate::model::{InitialStateSpec, SiteRole};
use crate::scalar::{re, Real};

/// Largest chain the state-vector engine accepts.
pub const MAX_STATE_SITES: usize = 30;

/// Bit position of `site` (1-based) in a basis index; site 1 is the most
/// significant bit and bit value 1 means `|1⟩`.
#[inline]
pub fn site_bit(site: usize, n_sites: usize) -> u64 {
    1u64 << (n_sites - site)
}

/// Action of a Pauli product on basis states:
/// `P|b⟩ = phase · (−1)^{|b ∧ sign_mask|} |b ⊕ flip_mask⟩`.
#[derive(Clone, Copy, Debug)]
pub struct PauliAction<T: Real> {
    pub flip_mask: u64,
    pub sign_mask: u64,
    pub phase: Complex<T>,
}

impl<T: Real> PauliAction<T> {
    pub fn new(ops: &[(usize, Pauli)], coeff: Complex<T>, n_sites: usize) -> Self {
        let (mut flip, mut sign) = (0u64, 0u64);
        let (mut ny, mut nz) = (0u32, 0u32);
        for &(site, p) in ops {
            let m = site_bit(site, n_sites);
            match p {
                Pauli::X => flip |= m,
                // Y|0⟩ = −i|1⟩, Y|1⟩ = i|0⟩ = −i·(−1)|0⟩.
                Pauli::Y => {
                    flip |= m;
                    sign |= m;
                    ny += 1;
                }
                // Z|0⟩ = −|0⟩, Z|1⟩ = |1⟩ = −(−1)|1⟩.
                Pauli::Z => {
                    sign |= m;
                    nz += 1;
                }
            }
        }
        let mut phase = coeff;
        for _ in 0..ny {
            phase = Complex::new(phase.im, -phase.re);
        }
        if nz % 2 == 1 {
            phase = -phase;
        }
        PauliAction { flip_mask: flip, sign_mask: sign, phase }
    }

    /// Returns `(target, amplitude)` for input basis state `b`.
    #[inline]
    pub fn apply(&self, b: u64) -> (u64, Complex<T>) {
        let amp = if (b & self.sign_mask).count_ones() % 2 == 1 { -self.phase } else { self.phase };
        (b ^ self.flip_mask, amp)
    }
}

pub fn actions<T: Real>(op: &OperatorSum<T>) -> Vec<PauliAction<T>> {
    op.terms().iter().map(|t| PauliAction::new(t.product.ops(), t.coeff, op.n_sites())).collect()
}

/// Dense amplitude vector over `2^L` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    n_sites: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn from_amplitudes(n_sites: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_STATE_SITES {
            return Err(Error::TooLarge { what: "state vectors", n_sites, limit: MAX_STATE_SITES });
        }
        if amps.len() != 1usize << n_sites {
            return Err(Error::DimensionMismatch { expected: 1 << n_sites, got: amps.len() });
        }
        let mut s = StateVector { n_sites, amps };
        s.normalize()?;
        Ok(s)
    }

    pub fn basis_state(n_sites: usize, index: u64) -> Result<Self> {
        let mut amps = vec![Complex::zero(); 1usize << n_sites];
        amps[index as usize] = Complex::new(T::one(), T::zero());
        Self::from_amplitudes(n_sites, amps)
    }

    /// Tensor product of single-site states `(a₀, a₁)` for `|0⟩, |1⟩`.
    pub fn product(local: &[[Complex<T>; 2]]) -> Result<Self> {
        let n = local.len();
        if n == 0 || n > MAX_STATE_SITES {
            return Err(Error::TooLarge { what: "state vectors", n_sites: n, limit: MAX_STATE_SITES });
        }
        let mut amps = vec![Complex::new(T::one(), T::zero())];
        for l in local {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(*a * l[0]);
                next.push(*a * l[1]);
            }
            amps = next;
        }
        Self::from_amplitudes(n, amps)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> T {
        norm(&self.amps)
    }

    pub(crate) fn normalize(&mut self) -> Result<T> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Numerical("state has zero or non-finite norm".into()));
        }
        let inv = T::one() / n;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(n)
    }

    pub(crate) fn from_raw(n_sites: usize, amps: Vec<Complex<T>>) -> Self {
        StateVector { n_sites, amps }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.amps, &other.amps)
    }

    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).modulus()
    }

    /// `⟨ψ|op|ψ⟩`.
    pub fn expectation(&self, op: &OperatorSum<T>) -> Result<Complex<T>> {
        if op.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: op.n_sites() });
        }
        let mut total = Complex::zero();
        for act in actions(op) {
            let mut acc = Complex::zero();
            for (b, a) in self.amps.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let (t, amp) = act.apply(b as u64);
                acc += self.amps[t as usize].conj() * amp * *a;
            }
            total += acc;
        }
        Ok(total)
    }

    /// `|1⟩` population of one site.
    pub fn population(&self, site: usize) -> T {
        let m = site_bit(site, self.n_sites) as usize;
        self.amps
            .iter()
            .enumerate()
            .filter(|(b, _)| b & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y)
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a single-site 2×2 matrix `[out][in]`.
    pub fn apply_local(&mut self, site: usize, u: &[[Complex<T>; 2]; 2]) {
        let m = site_bit(site, self.n_sites) as usize;
        for b in 0..self.amps.len() {
            if b & m == 0 {
                let (a0, a1) = (self.amps[b], self.amps[b | m]);
                self.amps[b] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[b | m] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }
}

pub(crate) fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|a| a.norm_sqr()).fold(T::zero(), |x, y| x + y).sqrt()
}

pub(crate) fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Gauge-site state `|Φ_θ⟩ = cos(θ/2)|1⟩ + sin(θ/2)|0⟩` as `(a₀, a₁)`.
pub fn phi_theta<T: Real>(theta: T) -> [Complex<T>; 2] {
    let h = theta * T::of(0.5);
    [re(h.sin()), re(h.cos())]
}

/// `|s⟩ ⊗ |Φ_θ⟩^{⊗N_g}` on `n_sites` qubits.
pub fn prepare_initial<T: Real>(spec: &InitialStateSpec, n_sites: usize) -> Result<StateVector<T>> {
    spec.validate_for(n_sites)?;
    let local = initial_local_states::<T>(spec, n_sites)?;
    StateVector::product(&local)
}

/// Single-site factors of the initial product state.
pub fn initial_local_states<T: Real>(spec: &InitialStateSpec, n_sites: usize) -> Result<Vec<[Complex<T>; 2]>> {
    spec.validate_for(n_sites)?;
    let bits = spec.bits();
    let one = re(T::one());
    let zero = Complex::zero();
    let phi = phi_theta(T::of(spec.theta));
    (1..=n_sites)
        .map(|j| match SiteRole::of(j) {
            SiteRole::Matter(ell) => Ok(if bits[ell - 1] { [zero, one] } else { [one, zero] }),
            SiteRole::Gauge(_) => Ok(phi),
        })
        .collect::<Result<Vec<_>>>()
        .and_then(|v| if v.is_empty() { invalid("empty chain") } else { Ok(v) })
}
