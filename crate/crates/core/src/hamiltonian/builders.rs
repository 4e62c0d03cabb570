use num_complex::Complex;

use super::pauli::{OperatorSum, Pauli, PauliString};
use crate::error::{invalid, Result};
use crate::model::{gauge_site, matter_site, n_matter, Boundary, DeviceParams, SiteRole};
use crate::scalar::{re, Real};

use Pauli::{X, Y, Z};

struct Terms<T: Real> {
    n: usize,
    out: Vec<PauliString<T>>,
}

impl<T: Real> Terms<T> {
    fn new(n: usize) -> Self {
        Terms { n, out: Vec::new() }
    }

    fn push(&mut self, c: f64, ops: &[(usize, Pauli)]) -> Result<()> {
        if c != 0.0 {
            self.out.push(PauliString::new(re(T::of(c)), ops.iter().copied())?);
        }
        Ok(())
    }

    /// `c (σ⁺_a M σ⁻_b + h.c.) = c/2 (X_a M X_b + Y_a M Y_b)` for a middle
    /// string `M` commuting with both ends.
    fn hop(&mut self, c: f64, a: usize, mid: &[(usize, Pauli)], b: usize) -> Result<()> {
        for p in [X, Y] {
            let mut ops = vec![(a, p), (b, p)];
            ops.extend_from_slice(mid);
            self.push(0.5 * c, &ops)?;
        }
        Ok(())
    }

    fn finish(self) -> Result<OperatorSum<T>> {
        let op = OperatorSum::from_terms(self.n, self.out)?;
        op.ensure_hermitian()?;
        Ok(op)
    }
}

/// Full driven XY chain with open boundaries:
/// `Σ g_j (σ⁺_j σ⁻_{j+1} + h.c.) + Σ λ_j (σ⁺_j σ⁻_{j+2} + h.c.)
///  − Σ V_j/2 σᶻ_j + h_x Σ_{j even} σˣ_j`.
///
/// `V_j` is read as the drive frequency minus the qubit frequency, so the
/// `|1⟩` level of a site sits at `−V_j` in the rotating frame. With the
/// opposite sign the localized and delocalized working points swap roles
/// and the gauge-field direction disagrees with `β < 0` at `V_even > 0`.
pub fn build_full<T: Real>(params: &DeviceParams) -> Result<OperatorSum<T>> {
    params.validate()?;
    let l = params.n_sites;
    let mut t = Terms::new(l);
    for j in 1..l {
        t.hop(params.g_nn[j - 1], j, &[], j + 1)?;
    }
    for j in 1..l - 1 {
        t.hop(params.lambda_nnn[j - 1], j, &[], j + 2)?;
    }
    for j in 1..=l {
        t.push(-0.5 * params.v_long[j - 1], &[(j, Z)])?;
        if SiteRole::is_gauge(j) {
            t.push(params.h_x, &[(j, X)])?;
        }
    }
    t.finish()
}

fn wrap(site: usize, l: usize) -> usize {
    (site + l - 1) % l + 1
}

fn cyclic(list: &[f64], k: usize) -> f64 {
    if list.is_empty() {
        0.0
    } else {
        list[k % list.len()]
    }
}

/// Effective matter/gauge model `H₁ + H₂ + H₃`, built part by part.
pub struct EffectiveParts<T: Real> {
    pub h1: OperatorSum<T>,
    pub h2: OperatorSum<T>,
    pub h3: OperatorSum<T>,
}

impl<T: Real> EffectiveParts<T> {
    pub fn total(&self) -> Result<OperatorSum<T>> {
        self.h1.add(&self.h2)?.add(&self.h3)
    }
}

/// `H₁ = Σ g̃_{s,ℓ}(s⁺_ℓ τᶻ_{ℓ+½} s⁻_{ℓ+1} + h.c.) + h_x Σ τˣ`,
/// `H₂ = −Σ g̃_{τ,ℓ}(τ⁺_{ℓ−½} sᶻ_ℓ τ⁻_{ℓ+½} + h.c.)`,
/// `H₃ = Σ λ_j(σ⁺_j σ⁻_{j+2} + h.c.) + h_z Σ τᶻ`.
pub fn build_effective_parts<T: Real>(params: &DeviceParams, boundary: Boundary) -> Result<EffectiveParts<T>> {
    params.validate()?;
    let l = params.n_sites;
    let periodic = boundary == Boundary::Periodic;
    if l % 2 != 0 && periodic {
        return invalid(format!("a periodic effective model needs an even number of sites, got {l}"));
    }
    // An odd open chain ends on a matter site.
    let (nm, ng) = (n_matter(l), l / 2);
    let links = if periodic { nm } else { nm - 1 };

    let mut h1 = Terms::new(l);
    for ell in 1..=links {
        let g = cyclic(&params.g_eff_s, ell - 1);
        h1.hop(g, matter_site(ell), &[(gauge_site(ell), Z)], wrap(matter_site(ell + 1), l))?;
    }
    for ell in 1..=ng {
        h1.push(params.h_x, &[(gauge_site(ell), X)])?;
    }

    let mut h2 = Terms::new(l);
    // Gauge hop across matter site ℓ, between links ℓ−½ and ℓ+½.
    let first = if periodic { 1 } else { 2 };
    for ell in first..=ng {
        let g = cyclic(&params.g_eff_tau, (ell + links - 2) % links.max(1));
        let left = if ell == 1 { l } else { gauge_site(ell - 1) };
        h2.hop(-g, left, &[(matter_site(ell), Z)], gauge_site(ell))?;
    }

    let mut h3 = Terms::new(l);
    let pairs = if periodic { l } else { l - 2 };
    for j in 1..=pairs {
        h3.hop(params.lambda_at(j), j, &[], wrap(j + 2, l))?;
    }
    for ell in 1..=ng {
        h3.push(params.h_z, &[(gauge_site(ell), Z)])?;
    }
    Ok(EffectiveParts { h1: h1.finish()?, h2: h2.finish()?, h3: h3.finish()? })
}

pub fn build_effective<T: Real>(params: &DeviceParams, boundary: Boundary) -> Result<OperatorSum<T>> {
    build_effective_parts(params, boundary)?.total()
}

/// Re-expresses `op` in the rotated gauge frame:
/// `τˣ = cosβ τ̃ˣ − sinβ τ̃ᶻ`, `τᶻ = sinβ τ̃ˣ + cosβ τ̃ᶻ`, `τʸ = τ̃ʸ`.
/// With `β = arctan(h_z/h_x)` the field `h_x τˣ + h_z τᶻ` becomes
/// `sqrt(h_x² + h_z²) τ̃ˣ`. Matter sites are untouched.
pub fn rotate_frame<T: Real>(op: &OperatorSum<T>, beta: T) -> Result<OperatorSum<T>> {
    let n = op.n_sites();
    let (s, c) = (beta.sin(), beta.cos());
    let mut out = Vec::new();
    for term in op.terms() {
        // Expand the product site by site.
        let mut partial: Vec<(Complex<T>, Vec<(usize, Pauli)>)> = vec![(term.coeff, Vec::new())];
        for &(site, p) in term.product.ops() {
            let images: Vec<(T, Pauli)> = if SiteRole::is_gauge(site) {
                match p {
                    X => vec![(c, X), (-s, Z)],
                    Z => vec![(s, X), (c, Z)],
                    Y => vec![(T::one(), Y)],
                }
            } else {
                vec![(T::one(), p)]
            };
            let mut next = Vec::with_capacity(partial.len() * images.len());
            for (coeff, ops) in &partial {
                for &(w, q) in &images {
                    if w == T::zero() {
                        continue;
                    }
                    let mut ops = ops.clone();
                    ops.push((site, q));
                    next.push((*coeff * w, ops));
                }
            }
            partial = next;
        }
        for (coeff, ops) in partial {
            out.push(PauliString::new(coeff, ops)?);
        }
    }
    OperatorSum::from_terms(n, out)
}

/// The rotated effective Hamiltonian split into
/// `H̃₁` (terms commuting with every `τ̃ˣ sᶻ τ̃ˣ`: matter hops dressed by
/// `τ̃ᶻ` and the gauge field), `H̃₂` (remaining single-gauge-spin and pure
/// matter terms) and `H̃₃` (terms touching two gauge spins).
pub fn build_rotated_effective<T: Real>(params: &DeviceParams, boundary: Boundary) -> Result<EffectiveParts<T>> {
    let h = build_effective::<T>(params, boundary)?;
    let rotated = rotate_frame(&h, T::of(params.beta()))?;
    let n = rotated.n_sites();
    let (mut h1, mut h2, mut h3) = (Vec::new(), Vec::new(), Vec::new());
    for t in rotated.terms() {
        let gauge: Vec<Pauli> =
            t.product.ops().iter().filter(|(s, _)| SiteRole::is_gauge(*s)).map(|&(_, p)| p).collect();
        let n_matter = t.product.ops().len() - gauge.len();
        match (gauge.as_slice(), n_matter) {
            ([Z], 2) | ([X], 0) => h1.push(t.clone()),
            (g, _) if g.len() >= 2 => h3.push(t.clone()),
            _ => h2.push(t.clone()),
        }
    }
    Ok(EffectiveParts {
        h1: OperatorSum::from_terms(n, h1)?,
        h2: OperatorSum::from_terms(n, h2)?,
        h3: OperatorSum::from_terms(n, h3)?,
    })
}

/// `Σ_ℓ sᶻ_ℓ` over matter sites.
pub fn matter_z_sum<T: Real>(n_sites: usize) -> Result<OperatorSum<T>> {
    let terms = (1..=n_sites)
        .step_by(2)
        .map(|j| PauliString::new(re(T::one()), [(j, Z)]))
        .collect::<Result<Vec<_>>>()?;
    OperatorSum::from_terms(n_sites, terms)
}

/// `Σ_ℓ s⁺_ℓ s⁻_ℓ = N_m/2 + Σ sᶻ/2`.
pub fn matter_number<T: Real>(n_sites: usize) -> Result<OperatorSum<T>> {
    let nm = n_sites.div_ceil(2);
    let half = T::of(0.5);
    matter_z_sum::<T>(n_sites)?
        .scale(re(half))
        .add(&OperatorSum::scaled_identity(n_sites, re(half * T::of_usize(nm))))
}
