use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use super::linalg::split;
use super::tensor::{unstack_cols, unstack_rows, Mps};
use crate::error::{Error, Result};
use crate::exact::StateVector;
use crate::hamiltonian::OperatorSum;
use crate::scalar::Real;

/// Largest support of a single Hamiltonian term TEBD accepts.
pub const GATE_SPAN: usize = 3;

/// Order of the Trotter decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TrotterOrder {
    /// Symmetric layer sweep `0, 1, 2, 1, 0`.
    Second,
    /// Suzuki's five-stage composition of the second-order step, about
    /// three times the gate count of `Second` per step.
    #[default]
    Fourth,
}

impl TrotterOrder {
    /// Relative lengths of the second-order stages making up one step.
    fn stages(self) -> Vec<f64> {
        match self {
            TrotterOrder::Second => vec![1.0],
            TrotterOrder::Fourth => {
                let p = 1.0 / (4.0 - 4f64.cbrt());
                vec![p, p, 1.0 - 4.0 * p, p, p]
            }
        }
    }
}

/// Truncation settings of a TEBD run.
#[derive(Clone, Debug, PartialEq)]
pub struct TebdParams {
    pub dt: f64,
    pub chi_max: usize,
    pub svd_tol: f64,
    pub order: TrotterOrder,
}

impl Default for TebdParams {
    fn default() -> Self {
        TebdParams { dt: 0.002, chi_max: 256, svd_tol: 1e-10, order: TrotterOrder::Fourth }
    }
}

/// Diagnostics accumulated over a TEBD run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TebdStats {
    pub steps: usize,
    /// Sum of discarded weights over all truncations.
    pub discarded: f64,
    pub max_bond: usize,
    /// Number of truncations limited by `chi_max` rather than `svd_tol`.
    pub saturations: usize,
}

/// Trotter plan for a Hamiltonian with terms spanning at most three sites.
///
/// Every term is assigned to the three-site window starting at its first
/// site (the last window absorbs the chain end). Windows starting at sites
/// of equal residue mod 3 are disjoint and form one layer. The second-order
/// step applies layers `0, 1, 2, 1, 0` with half steps on the outer ones;
/// higher orders compose it, merging adjacent passes over the same layer.
#[derive(Clone, Debug)]
pub struct TrotterPlan<T: Real> {
    n_sites: usize,
    /// Local `8 × 8` Hamiltonian of each window, indexed by its first site.
    windows: Vec<Option<DMatrix<Complex<T>>>>,
    pub dt: T,
}

/// Gate sequence of one step: each entry is a layer and the gates to use
/// on it.
struct Schedule<T: Real> {
    passes: Vec<(usize, usize)>,
    gate_sets: Vec<Vec<Option<DMatrix<Complex<T>>>>>,
}

impl<T: Real> TrotterPlan<T> {
    pub fn new(h: &OperatorSum<T>, dt: T) -> Result<Self> {
        let l = h.n_sites();
        if l < GATE_SPAN {
            return Err(Error::InvalidParams(format!("TEBD needs at least {GATE_SPAN} sites")));
        }
        if !(dt > T::zero()) {
            return Err(Error::InvalidParams("Trotter step must be positive".into()));
        }
        h.ensure_hermitian()?;
        let mut windows: Vec<Option<DMatrix<Complex<T>>>> = vec![None; l - 2];
        for t in h.terms() {
            let ops = t.product.ops();
            let (lo, hi) = match (ops.first(), ops.last()) {
                (Some(a), Some(b)) => (a.0 - 1, b.0 - 1),
                // Identity terms only shift the global phase.
                _ => continue,
            };
            if hi - lo + 1 > GATE_SPAN {
                return Err(Error::InvalidParams(format!(
                    "term {} spans {} sites; TEBD handles at most {GATE_SPAN}",
                    t.product,
                    hi - lo + 1
                )));
            }
            let w = lo.min(l - GATE_SPAN);
            let m = windows[w].get_or_insert_with(|| DMatrix::zeros(8, 8));
            // Kronecker product over the three window sites, first site
            // most significant.
            for r in 0..8usize {
                for c in 0..8usize {
                    let mut v = t.coeff;
                    for q in 0..3 {
                        let (rb, cb) = ((r >> (2 - q)) & 1, (c >> (2 - q)) & 1);
                        let e = match t.product.get(w + q + 1) {
                            Some(p) => p.matrix::<T>()[rb][cb],
                            None if rb == cb => Complex::new(T::one(), T::zero()),
                            None => Complex::zero(),
                        };
                        v *= e;
                    }
                    m[(r, c)] += v;
                }
            }
        }
        Ok(TrotterPlan { n_sites: l, windows, dt })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn exponentials(&self, tau: T) -> Vec<Option<DMatrix<Complex<T>>>> {
        self.windows
            .iter()
            .map(|w| {
                w.as_ref().map(|h| {
                    let e = h.clone().symmetric_eigen();
                    let v = &e.eigenvectors;
                    let ph = DMatrix::from_diagonal(&e.eigenvalues.map(|x| {
                        let a = T::two_pi() * x * tau;
                        Complex::new(a.cos(), -a.sin())
                    }));
                    v * ph * v.adjoint()
                })
            })
            .collect()
    }

    fn schedule(&self, dt: T, order: TrotterOrder) -> Schedule<T> {
        let half = T::of(0.5);
        let mut seq: Vec<(usize, T)> = Vec::new();
        for w in order.stages() {
            let tau = dt * T::of(w);
            for (layer, len) in [(0, tau * half), (1, tau * half), (2, tau), (1, tau * half), (0, tau * half)] {
                match seq.last_mut() {
                    // Gates within a layer commute, so consecutive passes merge.
                    Some((l, t)) if *l == layer => *t += len,
                    _ => seq.push((layer, len)),
                }
            }
        }
        let mut taus: Vec<T> = Vec::new();
        let mut passes = Vec::with_capacity(seq.len());
        for (layer, tau) in seq {
            let k = match taus.iter().position(|&t| (t - tau).abs() <= dt * T::of(1e-12)) {
                Some(k) => k,
                None => {
                    taus.push(tau);
                    taus.len() - 1
                }
            };
            passes.push((layer, k));
        }
        let gate_sets = taus.into_iter().map(|t| self.exponentials(t)).collect();
        Schedule { passes, gate_sets }
    }

    /// One step applied to a dense state; the oracle for the MPS version.
    pub fn step_dense(&self, psi: &mut StateVector<T>, dt: T, order: TrotterOrder) -> Result<()> {
        let sched = self.schedule(dt, order);
        for (w, gate) in sched.gates() {
            apply_dense(psi, w, gate);
        }
        Ok(())
    }
}

impl<T: Real> Schedule<T> {
    /// Every `(window, gate)` of the step in application order.
    fn gates(&self) -> impl Iterator<Item = (usize, &DMatrix<Complex<T>>)> {
        self.passes.iter().flat_map(move |&(layer, k)| {
            self.gate_sets[k].iter().enumerate().skip(layer).step_by(3).filter_map(|(w, g)| g.as_ref().map(|g| (w, g)))
        })
    }
}

fn apply_dense<T: Real>(psi: &mut StateVector<T>, w: usize, gate: &DMatrix<Complex<T>>) {
    let l = psi.n_sites();
    let shift = l - w - 3;
    let mut amps = psi.amplitudes().to_vec();
    let mask = 7usize << shift;
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        let idx: Vec<usize> = (0..8).map(|k| base | (k << shift)).collect();
        let v: Vec<Complex<T>> = idx.iter().map(|&i| amps[i]).collect();
        for (r, &i) in idx.iter().enumerate() {
            amps[i] = (0..8).fold(Complex::zero(), |a, c| a + gate[(r, c)] * v[c]);
        }
    }
    *psi = StateVector::from_amplitudes(l, amps).expect("unitary gate keeps the norm");
}

/// Applies an `8 × 8` gate to sites `w, w+1, w+2` (0-based). The center
/// ends on `w + 2`.
fn apply_gate<T: Real>(
    psi: &mut Mps<Complex<T>>,
    w: usize,
    gate: &DMatrix<Complex<T>>,
    params: &TebdParams,
    stats: &mut TebdStats,
) -> Result<()> {
    psi.move_center(w);
    let (a, b, c) = (&psi.sites[w], &psi.sites[w + 1], &psi.sites[w + 2]);
    let (cl, cr) = (a[0].nrows(), c[0].ncols());
    let ab = [[&a[0] * &b[0], &a[0] * &b[1]], [&a[1] * &b[0], &a[1] * &b[1]]];
    let mut blocks: Vec<DMatrix<Complex<T>>> = Vec::with_capacity(8);
    for k in 0..8 {
        blocks.push(&ab[k >> 2][(k >> 1) & 1] * &c[k & 1]);
    }
    let mut out = vec![DMatrix::<Complex<T>>::zeros(cl, cr); 8];
    for (r, o) in out.iter_mut().enumerate() {
        for (k, blk) in blocks.iter().enumerate() {
            let g = gate[(r, k)];
            if g != Complex::zero() {
                o.zip_apply(blk, |a, v| *a += v * g);
            }
        }
    }
    let tol = T::of(params.svd_tol);
    // Rows (s₁, α), columns (s₂, s₃, β).
    let m = DMatrix::from_fn(2 * cl, 4 * cr, |i, j| out[(i / cl) * 4 + j / cr][(i % cl, j % cr)]);
    let s1 = split(m, params.chi_max, tol)?;
    let rest = s1.s_vt();
    let k1 = rest.nrows();
    // Rows (s₂, γ), columns (s₃, β).
    let m2 = DMatrix::from_fn(2 * k1, 2 * cr, |i, j| rest[(i % k1, ((i / k1) * 2 + j / cr) * cr + j % cr)]);
    let s2 = split(m2, params.chi_max, tol)?;
    for s in [&s1, &s2] {
        stats.discarded += s.discarded.to_f64_lossy();
        stats.saturations += s.saturated as usize;
    }
    psi.sites[w] = unstack_rows(&s1.u);
    psi.sites[w + 1] = unstack_rows(&s2.u);
    psi.sites[w + 2] = unstack_cols(&s2.s_vt());
    psi.center = w + 2;
    stats.max_bond = stats.max_bond.max(s1.s.len()).max(s2.s.len());
    Ok(())
}

fn step<T: Real>(psi: &mut Mps<Complex<T>>, sched: &Schedule<T>, params: &TebdParams, stats: &mut TebdStats) -> Result<()> {
    for (w, g) in sched.gates() {
        apply_gate(psi, w, g, params, stats)?;
    }
    stats.steps += 1;
    Ok(())
}

/// Evolves `psi0` with `exp(−i 2π H t)` and calls `observe` at every
/// sample time (strictly ascending, starting at 0). Steps of `dt` are
/// shortened where needed to land on the sample times exactly.
pub fn tebd_evolve_with<T, F>(
    h: &OperatorSum<T>,
    psi0: &Mps<Complex<T>>,
    times: &[T],
    params: &TebdParams,
    mut observe: F,
) -> Result<TebdStats>
where
    T: Real,
    F: FnMut(T, &Mps<Complex<T>>) -> Result<()>,
{
    if psi0.n_sites() != h.n_sites() {
        return Err(Error::DimensionMismatch { expected: h.n_sites(), got: psi0.n_sites() });
    }
    if params.chi_max < 1 || !(params.svd_tol >= 0.0) {
        return Err(Error::InvalidParams("chi_max must be positive and svd_tol non-negative".into()));
    }
    crate::exact::check_times(times)?;
    let dt = T::of(params.dt);
    let plan = TrotterPlan::new(h, dt)?;
    let sched = plan.schedule(dt, params.order);
    let mut psi = psi0.clone();
    psi.normalize()?;
    let mut stats = TebdStats { max_bond: psi.max_bond(), ..TebdStats::default() };
    let mut now = T::zero();
    // Slack against accumulating round-off in `now`.
    let slack = dt * T::of(1e-6);
    for &t in times {
        while t - now > slack {
            let remaining = t - now;
            if remaining >= dt - slack {
                step(&mut psi, &sched, params, &mut stats)?;
                now += dt;
            } else {
                let short = plan.schedule(remaining, params.order);
                step(&mut psi, &short, params, &mut stats)?;
                now = t;
            }
        }
        now = t;
        observe(t, &psi)?;
    }
    if stats.saturations > 0 {
        log::warn!(
            "TEBD bond dimension hit chi_max={} in {} truncations; total discarded weight {:.2e}",
            params.chi_max,
            stats.saturations,
            stats.discarded
        );
    }
    Ok(stats)
}

/// Collects the state at every sample time.
pub fn tebd_evolve<T: Real>(
    h: &OperatorSum<T>,
    psi0: &Mps<Complex<T>>,
    times: &[T],
    params: &TebdParams,
) -> Result<(Vec<Mps<Complex<T>>>, TebdStats)> {
    let mut out = Vec::with_capacity(times.len());
    let stats = tebd_evolve_with(h, psi0, times, params, |_, psi| {
        out.push(psi.clone());
        Ok(())
    })?;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{dense_propagator, prepare_initial};
    use crate::hamiltonian::{build_full, Pauli};
    use crate::model::{device_default, InitialStateSpec};

    fn small_full(l: usize) -> OperatorSum<f64> {
        let mut p = device_default();
        p.n_sites = l;
        p.g_nn.truncate(l - 1);
        p.lambda_nnn.truncate(l - 2);
        p.v_long.truncate(l);
        p.g_eff_s.truncate(crate::model::n_matter(l) - 1);
        p.g_eff_tau.truncate(crate::model::n_matter(l) - 1);
        build_full::<f64>(&p).unwrap()
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = OperatorSum::<f64>::zero(5);
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("010", -1.0).unwrap(), 5).unwrap();
        let m = Mps::from_state_vector(&psi, 1e-14).unwrap();
        // No windows at all: the plan is empty and the state unchanged.
        let (out, _) = tebd_evolve(&h, &m, &[0.0, 0.1], &TebdParams::default()).unwrap();
        let f = out[1].to_state_vector().unwrap().fidelity(&psi);
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mps_step_matches_dense_step() {
        let h = small_full(6);
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("010", -1.0).unwrap(), 6).unwrap();
        let plan = TrotterPlan::new(&h, 0.01).unwrap();
        let mut dense = psi.clone();
        for _ in 0..5 {
            plan.step_dense(&mut dense, 0.01, TrotterOrder::Fourth).unwrap();
        }
        let m = Mps::from_state_vector(&psi, 1e-14).unwrap();
        let params = TebdParams { dt: 0.01, chi_max: 64, svd_tol: 0.0, ..TebdParams::default() };
        let (out, stats) = tebd_evolve(&h, &m, &[0.0, 0.05], &params).unwrap();
        assert_eq!(stats.steps, 5);
        let f = out[1].to_state_vector().unwrap().fidelity(&dense);
        assert!((f - 1.0).abs() < 1e-11, "{f}");
    }

    fn step_error(order: TrotterOrder, n: usize) -> f64 {
        let h = small_full(5);
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("010", -1.0).unwrap(), 5).unwrap();
        let u = dense_propagator(&h, 0.02).unwrap();
        let exact: Vec<_> = (&u * nalgebra::DVector::from_column_slice(psi.amplitudes())).iter().copied().collect();
        let dt = 0.02 / n as f64;
        let plan = TrotterPlan::new(&h, dt).unwrap();
        let mut d = psi.clone();
        for _ in 0..n {
            plan.step_dense(&mut d, dt, order).unwrap();
        }
        d.amplitudes().iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn trotter_error_orders() {
        let ratio = step_error(TrotterOrder::Second, 10) / step_error(TrotterOrder::Second, 20);
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
        let ratio = step_error(TrotterOrder::Fourth, 10) / step_error(TrotterOrder::Fourth, 20);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    fn long_terms_rejected() {
        let h = OperatorSum::<f64>::single(5, 1.0, &[(1, Pauli::Z), (4, Pauli::Z)]).unwrap();
        assert!(TrotterPlan::new(&h, 0.01).is_err());
    }
}
