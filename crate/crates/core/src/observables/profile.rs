use super::QuantumState;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// `(site, P_j)` for every site, or only odd (matter) sites.
pub fn occupation_profile<T: Real, S: QuantumState<T> + ?Sized>(psi: &S, odd_only: bool) -> Result<Vec<(usize, T)>> {
    let step = if odd_only { 2 } else { 1 };
    (1..=psi.n_sites())
        .step_by(step)
        .map(|j| {
            let p = psi.population(j)?;
            // Round-off can push a population a hair outside [0, 1].
            Ok((j, p.max(T::zero()).min(T::one())))
        })
        .collect()
}

/// `η_j`: `1/N₁` on initially occupied sites, `−1/N₀` elsewhere.
pub fn imbalance_weights<T: Real>(pattern: &[bool]) -> Result<Vec<T>> {
    let n1 = pattern.iter().filter(|&&b| b).count();
    let n0 = pattern.len() - n1;
    if n1 == 0 || n0 == 0 {
        return invalid("extended imbalance needs both occupied and empty sites in the pattern");
    }
    Ok(pattern
        .iter()
        .map(|&b| if b { T::one() / T::of_usize(n1) } else { -T::one() / T::of_usize(n0) })
        .collect())
}

/// `𝓘 = Σ η_j P_j` over matter sites.
pub fn extended_imbalance<T: Real>(profile: &[T], pattern: &[bool]) -> Result<T> {
    if profile.len() != pattern.len() {
        return Err(Error::DimensionMismatch { expected: pattern.len(), got: profile.len() });
    }
    let tol = T::of(1e-9);
    if let Some(p) = profile.iter().find(|&&p| !(p >= -tol && p <= T::one() + tol)) {
        return invalid(format!("population {} outside [0, 1]", p.to_f64_lossy()));
    }
    let eta = imbalance_weights::<T>(pattern)?;
    let v = eta.iter().zip(profile).fold(T::zero(), |a, (e, p)| a + *e * *p);
    assert!(v.abs() <= T::one() + tol, "imbalance {} escaped [-1, 1]", v.to_f64_lossy());
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::prepare_initial;
    use crate::model::InitialStateSpec;

    fn pattern() -> Vec<bool> {
        "00100".chars().map(|c| c == '1').collect()
    }

    #[test]
    fn initial_profile() {
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("00100", 0.0).unwrap(), 10).unwrap();
        let prof = occupation_profile(&psi, true).unwrap();
        let ps: Vec<f64> = prof.iter().map(|p| p.1).collect();
        assert_eq!(prof.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 3, 5, 7, 9]);
        assert_eq!(ps, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(extended_imbalance(&ps, &pattern()).unwrap(), 1.0);
        let all = occupation_profile(&psi, false).unwrap();
        assert!(all.iter().filter(|p| p.0 % 2 == 0).all(|p| (p.1 - 1.0).abs() < 1e-12));
    }

    #[test]
    fn uniform_profile_has_zero_imbalance() {
        let v: f64 = extended_imbalance(&[0.3; 5], &pattern()).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn degenerate_patterns() {
        assert!(extended_imbalance(&[0.3; 3], &[true; 3]).is_err());
        assert!(extended_imbalance(&[0.3; 3], &[false; 3]).is_err());
        assert!(extended_imbalance(&[1.3, 0.0], &[true, false]).is_err());
    }
}
