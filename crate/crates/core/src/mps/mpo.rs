use std::collections::HashMap;

use nalgebra::{ComplexField, DMatrix};

use super::tensor::{real_pauli, transfer, y_phase, Local, Mps};
use crate::error::{Error, Result};
use crate::hamiltonian::{OperatorSum, Pauli};
use crate::scalar::Amplitude;

/// Matrix product operator stored sparsely: per site, the nonzero
/// `(left state, right state, local operator)` entries.
#[derive(Clone, Debug)]
pub struct Mpo<A: Amplitude> {
    pub(crate) sites: Vec<Vec<(usize, usize, Local<A>)>>,
    /// Bond dimensions, `L + 1` entries with 1 at both ends.
    pub(crate) dims: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Channel {
    Start,
    Done,
    Partial(Vec<(usize, Pauli)>),
    Pair(usize),
}

/// Collects terms and compiles them into an [`Mpo`] whose channels are a
/// prefix tree over the Pauli strings.
#[derive(Clone, Debug)]
pub struct MpoBuilder<A: Amplitude> {
    n_sites: usize,
    /// Coefficient and 0-based operator list of each string.
    terms: Vec<(A, Vec<(usize, Pauli)>)>,
    /// `c · Σ_{i<j} Z_i Z_j` over each listed site set.
    pair_sums: Vec<(A, Vec<usize>)>,
}

fn identity<A: Amplitude>() -> Local<A> {
    [[A::one(), A::zero()], [A::zero(), A::one()]]
}

fn scaled<A: Amplitude>(m: Local<A>, c: A) -> Local<A> {
    [[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]]
}

impl<A: Amplitude> MpoBuilder<A> {
    pub fn new(n_sites: usize) -> Self {
        MpoBuilder { n_sites, terms: Vec::new(), pair_sums: Vec::new() }
    }

    /// Adds every string of `op`. Fails if a coefficient does not fit the
    /// amplitude type once `Y` is written as `−i·(iY)`.
    pub fn add_sum(&mut self, op: &OperatorSum<A::Re>) -> Result<&mut Self> {
        if op.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: op.n_sites() });
        }
        for t in op.terms() {
            let ops: Vec<(usize, Pauli)> = t.product.ops().iter().map(|&(s, p)| (s - 1, p)).collect();
            let n_y = ops.iter().filter(|o| o.1 == Pauli::Y).count();
            let c = A::from_complex(t.coeff * y_phase(n_y)).ok_or_else(|| {
                Error::InvalidParams(format!("term {} is not real in the (X, iY, Z) basis", t.product))
            })?;
            self.terms.push((c, ops));
        }
        Ok(self)
    }

    /// Adds `c · Σ_{i<j} Z_i Z_j` over 1-based `sites`.
    pub fn add_pair_sum(&mut self, c: A, sites: &[usize]) -> Result<&mut Self> {
        let mut s: Vec<usize> = sites.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.first() == Some(&0) || s.last().is_some_and(|&x| x > self.n_sites) {
            return Err(Error::InvalidParams("pair-sum site out of range".into()));
        }
        if s.len() >= 2 {
            self.pair_sums.push((c, s.into_iter().map(|x| x - 1).collect()));
        }
        Ok(self)
    }

    pub fn build(&self) -> Result<Mpo<A>> {
        let l = self.n_sites;
        if l == 0 {
            return Err(Error::InvalidParams("empty chain".into()));
        }
        let mut states: Vec<HashMap<Channel, usize>> = vec![HashMap::new(); l + 1];
        // Start must be state 0 on the left edge.
        states[0].insert(Channel::Start, 0);
        let mut entries: Vec<HashMap<(usize, usize), Local<A>>> = vec![HashMap::new(); l];
        let mut put = |k: usize, from: Channel, to: Channel, m: Local<A>| {
            let to_done = to == Channel::Done && from != Channel::Done;
            let n_in = states[k].len();
            let a = *states[k].entry(from).or_insert(n_in);
            let n_out = states[k + 1].len();
            let b = *states[k + 1].entry(to).or_insert(n_out);
            // Shared prefix channels are reached by several strings but
            // are one transition; only completions into Done add up.
            let e = entries[k].entry((a, b)).or_insert([[A::zero(); 2]; 2]);
            if to_done {
                for r in 0..2 {
                    for c in 0..2 {
                        e[r][c] += m[r][c];
                    }
                }
            } else {
                *e = m;
            }
        };
        let mut last_start = 0;
        let mut first_end = l - 1;
        for (_, ops) in &self.terms {
            last_start = last_start.max(ops.first().map_or(0, |o| o.0));
            first_end = first_end.min(ops.last().map_or(0, |o| o.0));
        }
        for (_, s) in &self.pair_sums {
            last_start = last_start.max(s[s.len() - 2]);
            first_end = first_end.min(s[1]);
        }
        for k in 0..l {
            if k < last_start {
                put(k, Channel::Start, Channel::Start, identity());
            }
            if k > first_end {
                put(k, Channel::Done, Channel::Done, identity());
            }
        }
        for (c, ops) in &self.terms {
            if ops.is_empty() {
                put(0, Channel::Start, Channel::Done, scaled(identity(), *c));
                continue;
            }
            let (lo, hi) = (ops[0].0, ops[ops.len() - 1].0);
            let mut placed: Vec<(usize, Pauli)> = Vec::new();
            let mut it = ops.iter().peekable();
            for k in lo..=hi {
                let from = if k == lo { Channel::Start } else { Channel::Partial(placed.clone()) };
                let m = match it.peek() {
                    Some(&&(s, p)) if s == k => {
                        it.next();
                        placed.push((s, p));
                        real_pauli::<A>(p).0
                    }
                    _ => identity(),
                };
                if k == hi {
                    put(k, from, Channel::Done, scaled(m, *c));
                } else {
                    put(k, from, Channel::Partial(placed.clone()), m);
                }
            }
        }
        let z = real_pauli::<A>(Pauli::Z).0;
        for (g, (c, s)) in self.pair_sums.iter().enumerate() {
            let (first, last) = (s[0], s[s.len() - 1]);
            for k in first..=last {
                let member = s.binary_search(&k).is_ok();
                if member && k < last {
                    put(k, Channel::Start, Channel::Pair(g), z);
                }
                if member && k > first {
                    put(k, Channel::Pair(g), Channel::Done, scaled(z, *c));
                }
                if k > first && k < last {
                    put(k, Channel::Pair(g), Channel::Pair(g), identity());
                }
            }
        }
        if states[l].is_empty() {
            return Err(Error::InvalidParams("operator has no terms".into()));
        }
        let dims = states.iter().map(|m| m.len()).collect::<Vec<_>>();
        if dims[0] != 1 || dims[l] != 1 {
            return Err(Error::Numerical("MPO boundary bonds are not one-dimensional".into()));
        }
        let sites = entries
            .into_iter()
            .map(|m| {
                let mut v: Vec<_> = m.into_iter().map(|((a, b), op)| (a, b, op)).collect();
                v.sort_by_key(|e| (e.0, e.1));
                v
            })
            .collect();
        Ok(Mpo { sites, dims })
    }
}

impl<A: Amplitude> Mpo<A> {
    pub fn from_sum(op: &OperatorSum<A::Re>) -> Result<Self> {
        MpoBuilder::new(op.n_sites()).add_sum(op)?.build()
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn bond_dims(&self) -> &[usize] {
        &self.dims
    }

    /// Left environment of bond `k + 1` from that of bond `k`.
    pub(crate) fn grow_left(&self, k: usize, env: &[DMatrix<A>], bra: &[DMatrix<A>; 2], ket: &[DMatrix<A>; 2]) -> Vec<DMatrix<A>> {
        let (cb, ck) = (bra[0].ncols(), ket[0].ncols());
        let mut out = vec![DMatrix::zeros(cb, ck); self.dims[k + 1]];
        for &(a, b, ref op) in &self.sites[k] {
            out[b] += transfer(&env[a], bra, ket, Some(op));
        }
        out
    }

    /// Right environment of bond `k` from that of bond `k + 1`, as
    /// `(bra, ket)` matrices.
    pub(crate) fn grow_right(&self, k: usize, env: &[DMatrix<A>], bra: &[DMatrix<A>; 2], ket: &[DMatrix<A>; 2]) -> Vec<DMatrix<A>> {
        let (rb, rk) = (bra[0].nrows(), ket[0].nrows());
        let mut out = vec![DMatrix::zeros(rb, rk); self.dims[k]];
        let bra_c = [bra[0].conjugate(), bra[1].conjugate()];
        let mut rk_cache: Vec<Option<[DMatrix<A>; 2]>> = vec![None; env.len()];
        for &(a, b, ref op) in &self.sites[k] {
            let rkt = rk_cache[b].get_or_insert_with(|| [&env[b] * ket[0].transpose(), &env[b] * ket[1].transpose()]);
            for sp in 0..2 {
                for s in 0..2 {
                    let w = op[sp][s];
                    if w != A::zero() {
                        out[a].gemm(w, &bra_c[sp], &rkt[s], A::one());
                    }
                }
            }
        }
        out
    }

    /// `⟨ψ|W|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn expectation(&self, psi: &Mps<A>) -> Result<A> {
        if psi.n_sites() != self.n_sites() {
            return Err(Error::DimensionMismatch { expected: self.n_sites(), got: psi.n_sites() });
        }
        let mut env = vec![DMatrix::from_element(1, 1, A::one())];
        for k in 0..self.n_sites() {
            env = self.grow_left(k, &env, &psi.sites[k], &psi.sites[k]);
        }
        let n2 = psi.norm().powi(2);
        Ok(env[0][(0, 0)].unscale(n2))
    }
}
