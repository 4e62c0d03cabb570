use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::{lanczos_ground, split};
use super::mpo::{Mpo, MpoBuilder};
use super::tensor::{unstack_cols, unstack_rows, Mps};
use crate::error::{Error, Result};
use crate::hamiltonian::{OperatorSum, Pauli};
use crate::model::{matter_site, n_matter, DEFAULT_SEED};
use crate::scalar::{Amplitude, Real};

/// Settings of a two-site DMRG run.
#[derive(Clone, Debug, PartialEq)]
pub struct DmrgParams {
    pub chi_max: usize,
    pub max_sweeps: usize,
    /// Stop once a full sweep changes the energy by less than this,
    /// relative to `max(1, |E|)`.
    pub conv_tol: f64,
    pub svd_tol: f64,
    /// Strength `μ` (MHz) of `μ(Σ s^z − m₀)²` over matter sites, with
    /// `m₀ = N_m mod 2`. `None` leaves the filling free.
    pub penalty: Option<f64>,
    pub krylov_dim: usize,
    pub initial_bond: usize,
    pub seed: u64,
}

impl Default for DmrgParams {
    fn default() -> Self {
        DmrgParams {
            chi_max: 128,
            max_sweeps: 20,
            conv_tol: 1e-9,
            svd_tol: 1e-10,
            penalty: Some(50.0),
            krylov_dim: 24,
            initial_bond: 8,
            seed: DEFAULT_SEED,
        }
    }
}

/// Outcome of [`dmrg_ground_state`]. The state is returned even when the
/// run did not converge.
#[derive(Clone, Debug)]
pub struct DmrgResult<A: Amplitude> {
    pub state: Mps<A>,
    /// `⟨H⟩` without the filling penalty.
    pub energy: f64,
    /// Lowest local eigenvalue at the end of every sweep, penalty included.
    pub sweep_energies: Vec<f64>,
    pub converged: bool,
    /// Largest discarded weight of any truncation in the final sweep.
    pub max_discarded: f64,
    /// Set when `chi_max` cut singular values above `svd_tol`.
    pub saturated: bool,
    /// `⟨(Σ s^z − m₀)²⟩`, present when the penalty was used.
    pub filling_defect: Option<f64>,
}

/// Filling target `m₀` and the penalty builder for `μ(Σ s^z − m₀)²`.
fn penalty_terms<A: Amplitude>(builder: &mut MpoBuilder<A>, n_sites: usize, mu: f64) -> Result<()> {
    let nm = n_matter(n_sites);
    let m0 = (nm % 2) as f64;
    let mut single = OperatorSum::<A::Re>::scaled_identity(
        n_sites,
        num_complex::Complex::new(A::Re::of(mu * (nm as f64 + m0 * m0)), A::Re::zero()),
    );
    if m0 != 0.0 {
        for ell in 1..=nm {
            let z = OperatorSum::single(n_sites, A::Re::of(-2.0 * mu * m0), &[(matter_site(ell), Pauli::Z)])?;
            single = single.add(&z)?;
        }
    }
    builder.add_sum(&single)?;
    let sites: Vec<usize> = (1..=nm).map(matter_site).collect();
    builder.add_pair_sum(A::from_real(A::Re::of(2.0 * mu)), &sites)?;
    Ok(())
}

fn random_mps<A: Amplitude>(n_sites: usize, bond: usize, seed: u64) -> Result<Mps<A>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..=n_sites)
        .map(|b| {
            let edge = b.min(n_sites - b).min(30) as u32;
            (1usize << edge).min(bond.max(1))
        })
        .collect();
    let sites = (0..n_sites)
        .map(|k| {
            let mut gen = || {
                DMatrix::from_fn(dims[k], dims[k + 1], |_, _| {
                    A::from_parts(A::Re::of(rng.random::<f64>() - 0.5), A::Re::of(rng.random::<f64>() - 0.5))
                })
            };
            let a = gen();
            [a, gen()]
        })
        .collect();
    let mut m = Mps::from_tensors(sites)?;
    m.normalize()?;
    Ok(m)
}

fn flatten<A: Amplitude>(t: &[[DMatrix<A>; 2]; 2]) -> DVector<A> {
    let n = t[0][0].len();
    let mut v = DVector::zeros(4 * n);
    for s1 in 0..2 {
        for s2 in 0..2 {
            v.rows_mut((2 * s1 + s2) * n, n).copy_from_slice(t[s1][s2].as_slice());
        }
    }
    v
}

fn unflatten<A: Amplitude>(v: &DVector<A>, r: usize, c: usize) -> [[DMatrix<A>; 2]; 2] {
    let n = r * c;
    let blk = |k: usize| DMatrix::from_column_slice(r, c, &v.as_slice()[k * n..(k + 1) * n]);
    [[blk(0), blk(1)], [blk(2), blk(3)]]
}

/// `H_eff Θ` for the two-site block on sites `k, k+1`.
fn apply_two_site<A: Amplitude>(
    w: &Mpo<A>,
    k: usize,
    left: &[DMatrix<A>],
    right: &[DMatrix<A>],
    theta: &[[DMatrix<A>; 2]; 2],
) -> [[DMatrix<A>; 2]; 2] {
    let (r, c) = theta[0][0].shape();
    let zero = || DMatrix::<A>::zeros(r, c);
    let mut lt: Vec<Option<[[DMatrix<A>; 2]; 2]>> = vec![None; left.len()];
    let mut mid: Vec<[[DMatrix<A>; 2]; 2]> = vec![[[zero(), zero()], [zero(), zero()]]; w.dims[k + 1]];
    for &(a, b, ref op) in &w.sites[k] {
        let x = lt[a].get_or_insert_with(|| {
            [[&left[a] * &theta[0][0], &left[a] * &theta[0][1]], [&left[a] * &theta[1][0], &left[a] * &theta[1][1]]]
        });
        for sp in 0..2 {
            for s in 0..2 {
                let f = op[sp][s];
                if f != A::zero() {
                    for s2 in 0..2 {
                        mid[b][sp][s2].zip_apply(&x[s][s2], |o, v| *o += v * f);
                    }
                }
            }
        }
    }
    let mut acc: Vec<Option<[[DMatrix<A>; 2]; 2]>> = vec![None; right.len()];
    for &(b, cc, ref op) in &w.sites[k + 1] {
        let u = acc[cc].get_or_insert_with(|| [[zero(), zero()], [zero(), zero()]]);
        for sp in 0..2 {
            for s in 0..2 {
                let f = op[sp][s];
                if f != A::zero() {
                    for s1 in 0..2 {
                        u[s1][sp].zip_apply(&mid[b][s1][s], |o, v| *o += v * f);
                    }
                }
            }
        }
    }
    let mut out = [[zero(), zero()], [zero(), zero()]];
    for (cc, u) in acc.iter().enumerate() {
        if let Some(u) = u {
            let rt = right[cc].transpose();
            for s1 in 0..2 {
                for s2 in 0..2 {
                    out[s1][s2].gemm(A::one(), &u[s1][s2], &rt, A::one());
                }
            }
        }
    }
    out
}

/// Ground state of `h` by two-site DMRG on an open chain.
pub fn dmrg_ground_state<A: Amplitude>(h: &OperatorSum<A::Re>, params: &DmrgParams) -> Result<DmrgResult<A>> {
    let l = h.n_sites();
    if params.chi_max < 2 {
        return Err(Error::InvalidParams(format!("chi_max {} < 2", params.chi_max)));
    }
    if l < 2 {
        return Err(Error::InvalidParams("DMRG needs at least two sites".into()));
    }
    h.ensure_hermitian()?;
    let mut builder = MpoBuilder::<A>::new(l);
    builder.add_sum(h)?;
    if let Some(mu) = params.penalty {
        penalty_terms(&mut builder, l, mu)?;
    }
    let w = builder.build()?;
    let svd_tol = A::Re::of(params.svd_tol);
    let mut psi = random_mps::<A>(l, params.initial_bond, params.seed)?;
    psi.move_center(0);

    let one = || vec![DMatrix::from_element(1, 1, A::one())];
    let mut left: Vec<Vec<DMatrix<A>>> = vec![Vec::new(); l + 1];
    let mut right: Vec<Vec<DMatrix<A>>> = vec![Vec::new(); l + 1];
    left[0] = one();
    right[l] = one();
    for k in (1..l).rev() {
        right[k] = w.grow_right(k, &right[k + 1], &psi.sites[k], &psi.sites[k]);
    }

    let mut sweep_energies = Vec::new();
    let mut converged = false;
    let mut max_discarded = 0.0f64;
    let mut saturated = false;
    let mut energy = 0.0f64;
    for sweep in 0..params.max_sweeps {
        max_discarded = 0.0;
        saturated = false;
        // Early sweeps run at a reduced bond cap that doubles each sweep.
        let chi = params.chi_max.min(16 << sweep.min(20));
        // Rightward half-sweep, then leftward.
        let order: Vec<(usize, bool)> = (0..l - 1).map(|k| (k, true)).chain((0..l - 1).rev().map(|k| (k, false))).collect();
        for (k, rightward) in order {
            let (a, b) = (&psi.sites[k], &psi.sites[k + 1]);
            let theta = [[&a[0] * &b[0], &a[0] * &b[1]], [&a[1] * &b[0], &a[1] * &b[1]]];
            let (r, c) = theta[0][0].shape();
            let (le, re) = (&left[k], &right[k + 2]);
            let restarts = if sweep == 0 { 1 } else { 4 };
            let (e, v) = lanczos_ground(
                |x| flatten(&apply_two_site(&w, k, le, re, &unflatten(x, r, c))),
                flatten(&theta),
                params.krylov_dim,
                A::Re::of(1e-10),
                restarts,
            );
            energy = e.to_f64_lossy();
            let t = unflatten(&v, r, c);
            let m = DMatrix::from_fn(2 * r, 2 * c, |i, j| t[i / r][j / c][(i % r, j % c)]);
            let sp = split(m, chi, svd_tol)?;
            max_discarded = max_discarded.max(sp.discarded.to_f64_lossy());
            saturated |= sp.saturated;
            if rightward {
                psi.sites[k] = unstack_rows(&sp.u);
                psi.sites[k + 1] = unstack_cols(&sp.s_vt());
                psi.center = k + 1;
                left[k + 1] = w.grow_left(k, &left[k], &psi.sites[k], &psi.sites[k]);
            } else {
                psi.sites[k] = unstack_rows(&sp.u_s());
                psi.sites[k + 1] = unstack_cols(&sp.vt);
                psi.center = k;
                right[k + 1] = w.grow_right(k + 1, &right[k + 2], &psi.sites[k + 1], &psi.sites[k + 1]);
            }
        }
        log::debug!("dmrg sweep {} energy {energy:.12} bond {} discarded {max_discarded:.2e}", sweep + 1, psi.max_bond());
        let prev = sweep_energies.last().copied();
        sweep_energies.push(energy);
        if let Some(p) = prev.filter(|_| chi == params.chi_max || !saturated) {
            if (p - energy).abs() < params.conv_tol * energy.abs().max(1.0) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("DMRG did not converge within {} sweeps", params.max_sweeps);
    }
    if saturated {
        log::warn!("DMRG bond dimension saturated at {}; discarded weight {max_discarded:.2e}", params.chi_max);
    }
    psi.normalize()?;
    let energy = Mpo::<A>::from_sum(h)?.expectation(&psi)?.real().to_f64_lossy();
    let filling_defect = match params.penalty {
        Some(_) => {
            let mut b = MpoBuilder::<A>::new(l);
            penalty_terms(&mut b, l, 1.0)?;
            let d = b.build()?.expectation(&psi)?.real().to_f64_lossy();
            if d > 1e-4 {
                log::warn!("matter filling off target: <(sum s^z - m0)^2> = {d:.2e}");
            }
            Some(d)
        }
        None => None,
    };
    Ok(DmrgResult { state: psi, energy, sweep_energies, converged, max_discarded, saturated, filling_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{diagonalize_dense, diagonalize_sector};
    use crate::hamiltonian::build_effective;
    use crate::model::{uniform_params, Boundary};

    #[test]
    fn matches_dense_ground_energy() {
        let p = uniform_params(6, 1.8, 1.1, 0.7, 6.0, -4.45).unwrap();
        let h = build_effective::<f64>(&p, Boundary::Open).unwrap();
        let exact = diagonalize_dense(&h).unwrap().energies()[0];
        let params = DmrgParams { penalty: None, ..DmrgParams::default() };
        let r = dmrg_ground_state::<f64>(&h, &params).unwrap();
        assert!(r.converged);
        assert!(((r.energy - exact) / exact).abs() < 1e-8, "{} vs {exact}", r.energy);
        assert!(r.state.isometry_defect() < 1e-10);
    }

    #[test]
    fn penalty_selects_filling() {
        let p = uniform_params(8, 1.8, 1.1, 0.7, 6.0, -4.45).unwrap();
        let h = build_effective::<f64>(&p, Boundary::Open).unwrap();
        let exact = diagonalize_sector(&h, 2).unwrap().energies()[0];
        let r = dmrg_ground_state::<f64>(&h, &DmrgParams::default()).unwrap();
        assert!(r.filling_defect.unwrap() < 1e-4);
        assert!((r.energy - exact).abs() < 1e-7 * exact.abs(), "{} vs {exact}", r.energy);
    }

    #[test]
    fn free_gauge_spins() {
        let p = uniform_params(8, 0.0, 0.0, 0.0, 6.0, 0.0).unwrap();
        let h = build_effective::<f64>(&p, Boundary::Open).unwrap();
        let r = dmrg_ground_state::<f64>(&h, &DmrgParams { penalty: None, ..DmrgParams::default() }).unwrap();
        assert!((r.energy + 4.0 * 6.0).abs() < 1e-9, "{}", r.energy);
        assert!(dmrg_ground_state::<f64>(&h, &DmrgParams { chi_max: 1, ..DmrgParams::default() }).is_err());
    }
}
