use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use super::stats::steady_value;
use super::{ObservableSeries, QuantumState};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{OperatorSum, Pauli, PauliString};
use crate::model::{gauge_site, matter_site, n_matter, Boundary, DeviceParams};
use crate::scalar::{re, Real};

use Pauli::{X, Z};

fn check_interior(ell: usize, n_sites: usize) -> Result<()> {
    if ell < 2 || gauge_site(ell) > n_sites {
        return invalid(format!("ℓ = {ell} has no gauge link on both sides in a chain of {n_sites} sites"));
    }
    Ok(())
}

/// `Ĝ_ℓ(α) = T_{ℓ−½}(α) sᶻ_ℓ T_{ℓ+½}(α)` with `T(α) = cosα τˣ + sinα τᶻ`,
/// on sites `(2ℓ−2, 2ℓ−1, 2ℓ)`.
pub fn gauge_generator<T: Real>(ell: usize, alpha: T, n_sites: usize) -> Result<OperatorSum<T>> {
    check_interior(ell, n_sites)?;
    let (a, m, b) = (gauge_site(ell - 1), matter_site(ell), gauge_site(ell));
    let (s, c) = (alpha.sin(), alpha.cos());
    let terms = [(c * c, X, X), (s * c, X, Z), (s * c, Z, X), (s * s, Z, Z)]
        .into_iter()
        .map(|(w, p, q)| PauliString::new(re(w), [(a, p), (m, Z), (b, q)]))
        .collect::<Result<Vec<_>>>()?;
    OperatorSum::from_terms(n_sites, terms)
}

/// The four three-site correlators `⟨τ^a sᶻ τ^b⟩`, `a, b ∈ {x, z}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GaugeCorrelators<T> {
    pub xzx: T,
    pub xzz: T,
    pub zzx: T,
    pub zzz: T,
}

impl<T: Real> GaugeCorrelators<T> {
    /// `(c, B, C)` with `⟨Ĝ(α)⟩ = c + B cos2α + C sin2α`.
    pub fn harmonics(&self) -> (T, T, T) {
        let h = T::of(0.5);
        ((self.xzx + self.zzz) * h, (self.xzx - self.zzz) * h, (self.xzz + self.zzx) * h)
    }
}

pub fn measure_correlators<T: Real, S: QuantumState<T> + ?Sized>(
    psi: &S,
    ell: usize,
) -> Result<GaugeCorrelators<T>> {
    let n = psi.n_sites();
    check_interior(ell, n)?;
    let (a, m, b) = (gauge_site(ell - 1), matter_site(ell), gauge_site(ell));
    let ev = |p: Pauli, q: Pauli| -> Result<T> {
        Ok(psi.expect(&OperatorSum::single(n, T::one(), &[(a, p), (m, Z), (b, q)])?)?.re)
    };
    Ok(GaugeCorrelators { xzx: ev(X, X)?, xzz: ev(X, Z)?, zzx: ev(Z, X)?, zzz: ev(Z, Z)? })
}

/// `⟨Ĝ(α)⟩` reconstructed from the four correlators.
pub fn gauge_value<T: Real>(c: &GaugeCorrelators<T>, alpha: T) -> T {
    let (s, co) = (alpha.sin(), alpha.cos());
    co * co * c.xzx + s * co * (c.xzz + c.zzx) + s * s * c.zzz
}

/// Steady gauge generator as a function of `α`, with the exact
/// `c + A sin(2α + φ)` fit.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeAnsatzCurve<T> {
    pub alphas: Vec<T>,
    pub steady_values: Vec<T>,
    pub offset: T,
    pub cos_coeff: T,
    pub sin_coeff: T,
    pub amplitude: T,
    pub phase: T,
    /// Extremum of `|⟨Ĝ(α)⟩|`, in `(−π/2, π/2]`.
    pub alpha_star: T,
    /// Root-mean-square fit residual.
    pub residual: T,
    /// Time-averaged correlators behind the curve.
    pub correlators: GaugeCorrelators<T>,
}

impl<T: Real> GaugeAnsatzCurve<T> {
    pub fn value(&self, alpha: T) -> T {
        let two = alpha * T::of(2.0);
        self.offset + self.cos_coeff * two.cos() + self.sin_coeff * two.sin()
    }
}

fn wrap_half_pi<T: Real>(a: T) -> T {
    let pi = T::pi();
    let mut x = a;
    while x <= -pi * T::of(0.5) {
        x += pi;
    }
    while x > pi * T::of(0.5) {
        x -= pi;
    }
    x
}

/// Location of the extremum of `|c + B cos2α + C sin2α|`.
pub(crate) fn extremum_alpha<T: Real>(c: T, b: T, cs: T) -> T {
    let a_max = T::of(0.5) * cs.atan2(b);
    if c >= T::zero() {
        wrap_half_pi(a_max)
    } else {
        wrap_half_pi(a_max - T::of(FRAC_PI_2))
    }
}

/// Builds the steady curve from a time series of correlators.
pub fn gauge_curve<T: Real>(
    times: &[T],
    series: &[GaugeCorrelators<T>],
    alphas: &[T],
    window: (T, T),
) -> Result<GaugeAnsatzCurve<T>> {
    if times.len() != series.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: series.len() });
    }
    if alphas.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "sinusoid fit needs at least 3 α points, got {}",
            alphas.len()
        )));
    }
    let avg = |f: fn(&GaugeCorrelators<T>) -> T| -> Result<T> {
        let s = ObservableSeries::new("c", times.to_vec(), series.iter().map(f).collect())?;
        Ok(steady_value(&s, window)?.0)
    };
    let corr = GaugeCorrelators { xzx: avg(|c| c.xzx)?, xzz: avg(|c| c.xzz)?, zzx: avg(|c| c.zzx)?, zzz: avg(|c| c.zzz)? };
    let steady: Vec<T> = alphas.iter().map(|&a| gauge_value(&corr, a)).collect();

    // Linear least squares in (1, cos2α, sin2α).
    let n = alphas.len();
    let design = DMatrix::from_fn(n, 3, |r, k| {
        let two = alphas[r] * T::of(2.0);
        match k {
            0 => T::one(),
            1 => two.cos(),
            _ => two.sin(),
        }
    });
    let y = DVector::from_column_slice(&steady);
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&y, T::of(1e-12))
        .map_err(|e| Error::Numerical(format!("sinusoid fit: {e}")))?;
    if svd.rank(T::of(1e-10)) < 3 {
        return Err(Error::InsufficientData("α grid does not determine the sinusoid".into()));
    }
    let (c0, b, cs) = (sol[0], sol[1], sol[2]);
    let resid = (&design * &sol - &y).norm() / T::of_usize(n).sqrt();
    Ok(GaugeAnsatzCurve {
        alphas: alphas.to_vec(),
        steady_values: steady,
        offset: c0,
        cos_coeff: b,
        sin_coeff: cs,
        amplitude: (b * b + cs * cs).sqrt(),
        phase: b.atan2(cs),
        alpha_star: extremum_alpha(c0, b, cs),
        residual: resid,
        correlators: corr,
    })
}

/// `W̃(i, j) = Π_{k=i..j} sᶻ_k`.
pub fn z2_charge<T: Real>(i: usize, j: usize, n_sites: usize) -> Result<OperatorSum<T>> {
    let nm = n_matter(n_sites);
    if i < 1 || i > j || j > nm {
        return invalid(format!("charge interval [{i}, {j}] outside 1..={nm}"));
    }
    OperatorSum::single(n_sites, T::one(), &(i..=j).map(|k| (matter_site(k), Z)).collect::<Vec<_>>())
}

/// `τ̃ˣ = cosβ τˣ + sinβ τᶻ` on one gauge site, in the lab frame.
pub fn rotated_tau_x<T: Real>(site: usize, beta: T, n_sites: usize) -> Result<OperatorSum<T>> {
    let terms = vec![
        PauliString::new(re(beta.cos()), [(site, X)])?,
        PauliString::new(re(beta.sin()), [(site, Z)])?,
    ];
    OperatorSum::from_terms(n_sites, terms)
}

/// `C̃(i, j) = τ̃ˣ_{i−½} τ̃ˣ_{j+½}`.
pub fn z2_flux<T: Real>(i: usize, j: usize, beta: T, n_sites: usize, boundary: Boundary) -> Result<OperatorSum<T>> {
    let nm = n_matter(n_sites);
    if i < 1 || i > j || j > nm {
        return invalid(format!("flux interval [{i}, {j}] outside 1..={nm}"));
    }
    let left = match (i, boundary) {
        (1, Boundary::Periodic) => n_sites,
        (1, Boundary::Open) => return invalid("flux at i = 1 needs the link ½, absent with open boundaries"),
        _ => gauge_site(i - 1),
    };
    let right = gauge_site(j);
    if right > n_sites {
        return invalid(format!("flux at j = {j} needs link {j}+½, absent in a chain of {n_sites} sites"));
    }
    if left == right {
        return invalid("flux links coincide");
    }
    rotated_tau_x(left, beta, n_sites)?.mul(&rotated_tau_x(right, beta, n_sites)?)
}

/// `f(i, j) = (j − i + 1)(j + i + 2)/2`, always an integer.
pub fn gauss_f(i: usize, j: usize) -> u64 {
    ((j - i + 1) as u64 * (j + i + 2) as u64) / 2
}

/// `(−1)^{f(i,j)}`.
pub fn gauss_sign(i: usize, j: usize) -> i32 {
    if gauss_f(i, j) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `|⟨C̃(i,j)⟩ − (−1)^f ⟨W̃(i,j)⟩|` with `⟨W̃⟩, ⟨C̃⟩` returned alongside.
pub fn gauss_residual<T: Real, S: QuantumState<T> + ?Sized>(
    psi: &S,
    i: usize,
    j: usize,
    beta: T,
    boundary: Boundary,
) -> Result<(T, T, T)> {
    let n = psi.n_sites();
    let w = psi.expect(&z2_charge(i, j, n)?)?.re;
    let c = psi.expect(&z2_flux(i, j, beta, n, boundary)?)?.re;
    let s = T::of(gauss_sign(i, j) as f64);
    Ok(((c - s * w).abs(), w, c))
}

/// `max_ℓ |λ_s − g sinβ ⟨τ̃ˣ_{ℓ+½}⟩|` over links between matter sites, with
/// `g = −g̃_{s,ℓ}` and `λ_s = λ_{2ℓ−1}`.
pub fn meanfield_residual<T: Real, S: QuantumState<T> + ?Sized>(psi: &S, params: &DeviceParams) -> Result<T> {
    let n = psi.n_sites();
    if n != params.n_sites {
        return Err(Error::DimensionMismatch { expected: params.n_sites, got: n });
    }
    let beta = T::of(params.beta());
    let mut worst = T::zero();
    for ell in 1..params.n_matter() {
        let tx = psi.expect(&rotated_tau_x(gauge_site(ell), beta, n)?)?.re;
        let lam = T::of(params.lambda_at(matter_site(ell)));
        let g = T::of(-params.g_eff_s[ell - 1]);
        worst = worst.max((lam - g * beta.sin() * tx).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{prepare_initial, StateVector};
    use crate::model::InitialStateSpec;

    #[test]
    fn generator_at_zero_and_square() {
        let g0 = gauge_generator::<f64>(3, 0.0, 10).unwrap();
        assert_eq!(g0.len(), 1);
        assert_eq!(g0.coeff_of(&[(4, X), (5, Z), (6, X)]).re, 1.0);
        let g = gauge_generator::<f64>(3, 0.37, 10).unwrap();
        let sq = g.mul(&g).unwrap();
        assert_eq!(sq.len(), 1);
        assert!((sq.coeff_of(&[]).re - 1.0).abs() < 1e-14);
        assert!(gauge_generator::<f64>(1, 0.0, 10).is_err());
        assert!(gauge_generator::<f64>(6, 0.0, 10).is_err());
    }

    #[test]
    fn correlator_reconstruction() {
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("00100", -1.0).unwrap(), 10).unwrap();
        let c = measure_correlators(&psi, 3).unwrap();
        for a in [-1.2, 0.0, 0.4, 1.5] {
            let direct = psi.expectation(&gauge_generator(3, a, 10).unwrap()).unwrap().re;
            assert!((direct - gauge_value(&c, a)).abs() < 1e-14);
        }
    }

    #[test]
    fn extremum_picks_largest_magnitude() {
        // f = −0.5 + 0.3 cos2α: |f| largest at α = π/2.
        let a: f64 = extremum_alpha(-0.5, 0.3, 0.0);
        assert!((a - FRAC_PI_2).abs() < 1e-12);
        let a: f64 = extremum_alpha(0.5, 0.3, 0.0);
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn curve_needs_three_points() {
        let c = GaugeCorrelators { xzx: 0.1, xzz: 0.2, zzx: 0.3, zzz: 0.4 };
        assert!(gauge_curve(&[0.0, 1.0], &[c, c], &[0.1], (0.0, 1.0)).is_err());
        let alphas: Vec<f64> = (0..7).map(|k| -1.5 + 0.5 * k as f64).collect();
        let curve = gauge_curve(&[0.0, 1.0], &[c, c], &alphas, (0.0, 1.0)).unwrap();
        let (c0, b, s) = c.harmonics();
        assert!((curve.offset - c0).abs() < 1e-14);
        assert!((curve.cos_coeff - b).abs() < 1e-14);
        assert!((curve.sin_coeff - s).abs() < 1e-14);
        assert!(curve.residual < 1e-14);
    }

    #[test]
    fn gauss_integer_and_sign() {
        for i in 1..=20 {
            for j in i..=20 {
                assert_eq!(((j - i + 1) * (j + i + 2)) % 2, 0);
                let _ = gauss_sign(i, j);
            }
        }
        assert_eq!(gauss_f(1, 1), 2);
        assert_eq!(gauss_f(2, 2), 3);
    }

    #[test]
    fn charge_and_flux_operators() {
        let w = z2_charge::<f64>(2, 2, 8).unwrap();
        assert_eq!(w.coeff_of(&[(3, Z)]).re, 1.0);
        let c = z2_flux::<f64>(2, 3, 0.0, 8, Boundary::Open).unwrap();
        assert_eq!(c.coeff_of(&[(2, X), (6, X)]).re, 1.0);
        assert!(z2_flux::<f64>(1, 2, 0.0, 8, Boundary::Open).is_err());
        assert!(z2_flux::<f64>(1, 2, 0.0, 8, Boundary::Periodic).is_ok());
        assert!(z2_charge::<f64>(3, 2, 8).is_err());
    }

    #[test]
    fn meanfield_closed_form() {
        // Gauge spins along −τ̃ˣ: residual = |λ_s + g sinβ|.
        let p = crate::model::uniform_params(6, 1.8, 1.1, 0.7, 6.0, -4.45).unwrap();
        let beta = p.beta();
        // τ̃ˣ = cosβ X + sinβ Z has −1 eigenvector at Bloch angle θ with
        // sinθ = −cosβ, cosθ = −sinβ in the (X, Z) plane.
        let theta = (-beta.cos()).atan2(-beta.sin());
        let spec = InitialStateSpec::new("010", theta).unwrap();
        let psi: StateVector<f64> = prepare_initial(&spec, 6).unwrap();
        let r = meanfield_residual(&psi, &p).unwrap();
        assert!((r - (1.1 + 1.8 * beta.sin()).abs()).abs() < 1e-12);
    }
}
