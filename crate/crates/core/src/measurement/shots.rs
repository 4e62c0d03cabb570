use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::readout::{apply_readout_error, correct_readout, ReadoutModel};
use crate::error::{invalid, Error, Result};
use crate::exact::StateVector;
use crate::hamiltonian::Pauli;
use crate::model::{gauge_site, matter_site};
use crate::observables::GaugeCorrelators;
use crate::scalar::Real;

pub const COUNTS_HEADER: &str = "# gaugechain-counts v1";

/// Independent random stream `index` of `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Per-site measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    fn label(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
        }
    }

    fn pauli(self) -> Pauli {
        match self {
            Basis::Z => Pauli::Z,
            Basis::X => Pauli::X,
        }
    }
}

/// Histogram of single-shot bit strings, site 1 the most significant bit.
///
/// A recorded bit of 1 always means the +1 eigenvalue of the measured Pauli:
/// `|1⟩` in the Z basis and `|+⟩` in the X basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Counts {
    pub n_sites: usize,
    pub bases: Vec<Basis>,
    pub seed: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl Counts {
    pub fn shots(&self) -> u64 {
        self.counts.values().sum()
    }

    fn bit(&self, pattern: u64, site: usize) -> usize {
        ((pattern >> (self.n_sites - site)) & 1) as usize
    }

    /// Fraction of shots that read 1 on `site`.
    pub fn marginal(&self, site: usize) -> Result<f64> {
        Ok(self.joint(&[site])?[1])
    }

    pub fn marginals(&self) -> Vec<f64> {
        (1..=self.n_sites).map(|s| self.marginal(s).expect("site in range")).collect()
    }

    /// Empirical distribution over the bits of `sites`, first site most
    /// significant.
    pub fn joint(&self, sites: &[usize]) -> Result<Vec<f64>> {
        for &s in sites {
            if s == 0 || s > self.n_sites {
                return Err(Error::SiteOutOfRange { site: s, n_sites: self.n_sites });
            }
        }
        let total = self.shots();
        if total == 0 {
            return Err(Error::InsufficientData("no shots".into()));
        }
        let mut p = vec![0.0; 1 << sites.len()];
        for (&pattern, &c) in &self.counts {
            let k = sites.iter().fold(0, |k, &s| (k << 1) | self.bit(pattern, s));
            p[k] += c as f64;
        }
        p.iter_mut().for_each(|x| *x /= total as f64);
        Ok(p)
    }

    pub fn dump(&self) -> String {
        let bases: String = self.bases.iter().map(|b| b.label()).collect();
        let mut s = format!(
            "{COUNTS_HEADER}\n# n_sites {}\n# basis {bases}\n# seed {}\n# shots {}\n",
            self.n_sites,
            self.seed,
            self.shots()
        );
        for (&p, &c) in &self.counts {
            let _ = writeln!(s, "{:0width$b}\t{c}", p, width = self.n_sites);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, h)) if h == COUNTS_HEADER => {}
            _ => return Err(Error::Parse { line: 1, msg: format!("expected {COUNTS_HEADER:?}") }),
        }
        let (mut n_sites, mut bases, mut seed) = (None, None, None);
        let mut counts = BTreeMap::new();
        for (n, l) in lines.filter(|(_, l)| !l.is_empty()) {
            let bad = |msg: &str| Error::Parse { line: n, msg: msg.into() };
            if let Some(meta) = l.strip_prefix('#') {
                let (k, v) = meta.trim().split_once(' ').ok_or_else(|| bad("malformed metadata"))?;
                match k {
                    "n_sites" => n_sites = Some(v.parse::<usize>().map_err(|_| bad("bad n_sites"))?),
                    "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad("bad seed"))?),
                    "basis" => {
                        bases = Some(
                            v.chars()
                                .map(|c| match c {
                                    'Z' => Ok(Basis::Z),
                                    'X' => Ok(Basis::X),
                                    _ => Err(bad("basis letters must be Z or X")),
                                })
                                .collect::<Result<Vec<_>>>()?,
                        )
                    }
                    _ => {}
                }
                continue;
            }
            let (bits, c) = l.split_once(char::is_whitespace).ok_or_else(|| bad("expected `<bits> <count>`"))?;
            if Some(bits.len()) != n_sites {
                return Err(bad("bit string length differs from n_sites"));
            }
            let p = u64::from_str_radix(bits, 2).map_err(|_| bad("bad bit string"))?;
            let c: u64 = c.trim().parse().map_err(|_| bad("bad count"))?;
            *counts.entry(p).or_insert(0) += c;
        }
        let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing {k} metadata") };
        let n_sites = n_sites.ok_or_else(|| missing("n_sites"))?;
        let bases = bases.ok_or_else(|| missing("basis"))?;
        if bases.len() != n_sites {
            return Err(Error::DimensionMismatch { expected: n_sites, got: bases.len() });
        }
        Ok(Counts { n_sites, bases, seed: seed.ok_or_else(|| missing("seed"))?, counts })
    }
}

/// Draws `n_shots` projective measurements of `psi` in the given bases from
/// stream 0 of `seed`.
pub fn sample_shots<T: Real>(psi: &StateVector<T>, bases: &[Basis], n_shots: u64, seed: u64) -> Result<Counts> {
    let n = psi.n_sites();
    if bases.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: bases.len() });
    }
    if n_shots == 0 {
        return invalid("n_shots must be at least 1");
    }
    let mut rotated = psi.clone();
    let h = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let (p, m) = (Complex::new(h, T::zero()), Complex::new(-h, T::zero()));
    // Sends |+⟩ to |1⟩ and |−⟩ to |0⟩.
    let to_x = [[p, m], [p, p]];
    for (k, b) in bases.iter().enumerate() {
        if *b == Basis::X {
            rotated.apply_local(k + 1, &to_x);
        }
    }
    let probs: Vec<f64> = rotated.probabilities().into_iter().map(|x| x.to_f64_lossy()).collect();
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::Numerical(format!("sampling weights: {e}")))?;
    let mut rng = stream_rng(seed, 0);
    let mut counts = BTreeMap::new();
    for _ in 0..n_shots {
        *counts.entry(dist.sample(&mut rng) as u64).or_insert(0) += 1;
    }
    Ok(Counts { n_sites: n, bases: bases.to_vec(), seed, counts })
}

fn check_bases(counts: &Counts, sites: &[usize], paulis: &[Pauli]) -> Result<()> {
    if sites.len() != paulis.len() {
        return Err(Error::DimensionMismatch { expected: sites.len(), got: paulis.len() });
    }
    for (&s, &p) in sites.iter().zip(paulis) {
        if s == 0 || s > counts.n_sites {
            return Err(Error::SiteOutOfRange { site: s, n_sites: counts.n_sites });
        }
        let b = counts.bases[s - 1];
        if b.pauli() != p {
            return invalid(format!("site {s} was read in the {} basis but {} was requested", b.label(), p.label()));
        }
    }
    Ok(())
}

fn parity_mean(p: &[f64], k: usize) -> f64 {
    p.iter()
        .enumerate()
        .map(|(b, x)| {
            let zeros = k - (b as u32).count_ones() as usize;
            if zeros % 2 == 0 {
                *x
            } else {
                -*x
            }
        })
        .sum()
}

/// Mean over shots of the product of ±1 outcomes on `sites`.
pub fn joint_correlator_from_shots(counts: &Counts, sites: &[usize], paulis: &[Pauli]) -> Result<f64> {
    check_bases(counts, sites, paulis)?;
    Ok(parity_mean(&counts.joint(sites)?, sites.len()))
}

/// The same estimate after per-qubit readout correction of the joint
/// distribution. Returns the correlator and the clipped mass.
pub fn joint_correlator_corrected(
    counts: &Counts,
    sites: &[usize],
    paulis: &[Pauli],
    model: &ReadoutModel,
) -> Result<(f64, f64)> {
    check_bases(counts, sites, paulis)?;
    let c = correct_readout(&counts.joint(sites)?, sites, model)?;
    Ok((parity_mean(&c.probs, sites.len()), c.clipped))
}

/// Shot estimates of the four correlators behind `⟨Ĝ_ℓ(α)⟩`, one basis
/// setting each. With a readout model the shots are corrupted and then
/// corrected per qubit.
pub fn gauge_correlators_from_shots<T: Real>(
    psi: &StateVector<T>,
    ell: usize,
    n_shots: u64,
    seed: u64,
    readout: Option<&ReadoutModel>,
) -> Result<GaugeCorrelators<f64>> {
    let n = psi.n_sites();
    if ell < 2 || gauge_site(ell) > n {
        return invalid(format!("ℓ = {ell} has no gauge link on both sides"));
    }
    let sites = [gauge_site(ell - 1), matter_site(ell), gauge_site(ell)];
    let mut seeds = stream_rng(seed, 2);
    let mut one = |a: Basis, b: Basis| -> Result<f64> {
        let mut bases = vec![Basis::Z; n];
        bases[sites[0] - 1] = a;
        bases[sites[2] - 1] = b;
        let paulis = [a.pauli(), Pauli::Z, b.pauli()];
        let counts = sample_shots(psi, &bases, n_shots, seeds.random())?;
        match readout {
            None => joint_correlator_from_shots(&counts, &sites, &paulis),
            Some(m) => {
                let noisy = apply_readout_error(&counts, m, seeds.random())?;
                Ok(joint_correlator_corrected(&noisy, &sites, &paulis, m)?.0)
            }
        }
    };
    use Basis::{X, Z};
    Ok(GaugeCorrelators { xzx: one(X, X)?, xzz: one(X, Z)?, zzx: one(Z, X)?, zzz: one(Z, Z)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::prepare_initial;
    use crate::model::InitialStateSpec;

    #[test]
    fn product_eigenstate_marginals_exact() {
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("00100", 0.0).unwrap(), 10).unwrap();
        let c = sample_shots(&psi, &[Basis::Z; 10], 500, 3).unwrap();
        let odd: Vec<f64> = (1..=10).step_by(2).map(|s| c.marginal(s).unwrap()).collect();
        assert_eq!(odd, [0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((2..=10).step_by(2).all(|s| c.marginal(s).unwrap() == 1.0));
    }

    #[test]
    fn x_basis_of_plus_state() {
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("0", std::f64::consts::FRAC_PI_2).unwrap(), 2).unwrap();
        let c = sample_shots(&psi, &[Basis::Z, Basis::X], 200, 9).unwrap();
        assert_eq!(joint_correlator_from_shots(&c, &[2], &[Pauli::X]).unwrap(), 1.0);
        assert!(joint_correlator_from_shots(&c, &[2], &[Pauli::Z]).is_err());
    }

    #[test]
    fn same_seed_same_counts() {
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("010", -1.0).unwrap(), 6).unwrap();
        let a = sample_shots(&psi, &[Basis::Z; 6], 1000, 42).unwrap();
        let b = sample_shots(&psi, &[Basis::Z; 6], 1000, 42).unwrap();
        let c = sample_shots(&psi, &[Basis::Z; 6], 1000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn counts_text_round_trip() {
        let psi = prepare_initial::<f64>(&InitialStateSpec::new("01", -1.0).unwrap(), 4).unwrap();
        let c = sample_shots(&psi, &[Basis::Z, Basis::X, Basis::Z, Basis::Z], 300, 5).unwrap();
        assert_eq!(Counts::parse(&c.dump()).unwrap(), c);
        assert!(Counts::parse("# other\n").is_err());
    }
}
