use rand::Rng;

use super::shots::{stream_rng, Counts};
use super::{parse_table, qubit_index};
use crate::error::{invalid, Error, Result};

/// Independent bit-flip readout errors, one pair of fidelities per qubit.
///
/// Measured populations relate to the true ones by
/// `(P_g, P_e)ᵀ_measured = [[F_g, 1−F_e], [1−F_g, F_e]] (P_g, P_e)ᵀ_true`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadoutModel {
    f_g: Vec<f64>,
    f_e: Vec<f64>,
}

impl ReadoutModel {
    pub fn new(f_g: Vec<f64>, f_e: Vec<f64>) -> Result<Self> {
        if f_g.len() != f_e.len() {
            return Err(Error::DimensionMismatch { expected: f_g.len(), got: f_e.len() });
        }
        for (q, (&g, &e)) in f_g.iter().zip(&f_e).enumerate() {
            if !(0.0..=1.0).contains(&g) || !(0.0..=1.0).contains(&e) {
                return invalid(format!("Q{} fidelities ({g}, {e}) outside [0, 1]", q + 1));
            }
            if g + e <= 1.0 {
                return Err(Error::Singular(format!("Q{} calibration matrix needs F_g + F_e > 1, got {}", q + 1, g + e)));
            }
        }
        Ok(ReadoutModel { f_g, f_e })
    }

    /// Perfect readout on `n` qubits.
    pub fn ideal(n: usize) -> Self {
        ReadoutModel { f_g: vec![1.0; n], f_e: vec![1.0; n] }
    }

    /// The device fidelities.
    pub fn device() -> Self {
        Self::from_table(include_str!("../../data/readout_fidelities.tsv")).expect("bundled table is valid")
    }

    /// Reads a table with rows `F_g` and `F_e` and columns `Q1 … Qn`.
    pub fn from_table(text: &str) -> Result<Self> {
        let t = parse_table(text)?;
        for (k, c) in t.columns.iter().enumerate() {
            if qubit_index(c) != Some(k + 1) {
                return invalid(format!("column {} is {c:?}, expected Q{}", k + 1, k + 1));
            }
        }
        let row = |name: &str| {
            t.rows
                .iter()
                .find(|(l, _)| l == name)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::InvalidParams(format!("readout table lacks a {name} row")))
        };
        Self::new(row("F_g")?, row("F_e")?)
    }

    pub fn n_qubits(&self) -> usize {
        self.f_g.len()
    }

    fn check(&self, qubit: usize) -> Result<usize> {
        if qubit == 0 || qubit > self.n_qubits() {
            return Err(Error::SiteOutOfRange { site: qubit, n_sites: self.n_qubits() });
        }
        Ok(qubit - 1)
    }

    /// `[[F_g, 1−F_e], [1−F_g, F_e]]` of qubit `Q_qubit`.
    pub fn calibration_matrix(&self, qubit: usize) -> Result<[[f64; 2]; 2]> {
        let q = self.check(qubit)?;
        let (g, e) = (self.f_g[q], self.f_e[q]);
        Ok([[g, 1.0 - e], [1.0 - g, e]])
    }

    pub fn inverse_matrix(&self, qubit: usize) -> Result<[[f64; 2]; 2]> {
        let [[a, b], [c, d]] = self.calibration_matrix(qubit)?;
        let det = a * d - b * c;
        Ok([[d / det, -b / det], [-c / det, a / det]])
    }

    /// Probability that a true `bit` is read flipped.
    pub fn flip_probability(&self, qubit: usize, bit: bool) -> Result<f64> {
        let q = self.check(qubit)?;
        Ok(if bit { 1.0 - self.f_e[q] } else { 1.0 - self.f_g[q] })
    }
}

/// Re-reads every shot through the readout channel. Flips are drawn from
/// stream 1 of `seed`, so the result is reproducible.
pub fn apply_readout_error(counts: &Counts, model: &ReadoutModel, seed: u64) -> Result<Counts> {
    let n = counts.n_sites;
    if model.n_qubits() < n {
        return Err(Error::DimensionMismatch { expected: n, got: model.n_qubits() });
    }
    let flips = (1..=n)
        .map(|q| Ok([model.flip_probability(q, false)?, model.flip_probability(q, true)?]))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = stream_rng(seed, 1);
    let mut out = Counts { counts: Default::default(), ..counts.clone() };
    for (&pattern, &c) in &counts.counts {
        for _ in 0..c {
            let mut read = pattern;
            for (q, f) in flips.iter().enumerate() {
                let bit = (pattern >> (n - 1 - q)) & 1;
                if rng.random_bool(f[bit as usize]) {
                    read ^= 1 << (n - 1 - q);
                }
            }
            *out.counts.entry(read).or_insert(0) += 1;
        }
    }
    Ok(out)
}

/// Corrected probabilities after clipping to `[0, 1]` and renormalizing.
#[derive(Clone, Debug, PartialEq)]
pub struct Corrected {
    pub probs: Vec<f64>,
    /// Total probability mass removed by clipping negative entries.
    pub clipped: f64,
}

/// Inverts the readout channel on a joint distribution over `qubits`
/// (first listed qubit most significant), one inverse calibration matrix
/// per qubit.
pub fn correct_readout(probs: &[f64], qubits: &[usize], model: &ReadoutModel) -> Result<Corrected> {
    let k = qubits.len();
    if probs.len() != 1 << k {
        return Err(Error::DimensionMismatch { expected: 1 << k, got: probs.len() });
    }
    let mut p = probs.to_vec();
    for (pos, &q) in qubits.iter().enumerate() {
        let inv = model.inverse_matrix(q)?;
        let m = 1usize << (k - 1 - pos);
        for b in 0..p.len() {
            if b & m == 0 {
                let (p0, p1) = (p[b], p[b | m]);
                p[b] = inv[0][0] * p0 + inv[0][1] * p1;
                p[b | m] = inv[1][0] * p0 + inv[1][1] * p1;
            }
        }
    }
    let clipped: f64 = p.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    p.iter_mut().for_each(|x| *x = x.max(0.0));
    let total: f64 = p.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("corrected distribution vanished after clipping".into()));
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(Corrected { probs: p, clipped })
}

/// Corrects single-qubit `|1⟩` populations `p1[j−1]` of qubits `1..=n`.
/// Returns corrected populations, with clipping summed over qubits.
pub fn correct_marginals(p1: &[f64], model: &ReadoutModel) -> Result<Corrected> {
    let mut out = Vec::with_capacity(p1.len());
    let mut clipped = 0.0;
    for (j, &p) in p1.iter().enumerate() {
        let c = correct_readout(&[1.0 - p, p], &[j + 1], model)?;
        out.push(c.probs[1]);
        clipped += c.clipped;
    }
    Ok(Corrected { probs: out, clipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_table_q1() {
        let m = ReadoutModel::device();
        assert_eq!(m.n_qubits(), 10);
        let c = m.calibration_matrix(1).unwrap();
        let want = [[0.970, 0.103], [0.030, 0.897]];
        for r in 0..2 {
            for k in 0..2 {
                assert!((c[r][k] - want[r][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_and_invalid_models() {
        assert!(matches!(ReadoutModel::new(vec![0.5], vec![0.5]), Err(Error::Singular(_))));
        assert!(ReadoutModel::new(vec![1.2], vec![0.9]).is_err());
        assert!(ReadoutModel::new(vec![0.9], vec![]).is_err());
    }

    #[test]
    fn ideal_model_is_identity() {
        let m = ReadoutModel::ideal(2);
        let p = [0.1, 0.2, 0.3, 0.4];
        let c = correct_readout(&p, &[1, 2], &m).unwrap();
        assert_eq!(c.probs, p);
        assert_eq!(c.clipped, 0.0);
    }

    #[test]
    fn inverse_undoes_channel_exactly() {
        let m = ReadoutModel::device();
        let truth = [0.5, 0.1, 0.0, 0.4];
        // Push the exact distribution through the channel of Q2 ⊗ Q5.
        let (a, b) = (m.calibration_matrix(2).unwrap(), m.calibration_matrix(5).unwrap());
        let mut meas = [0.0; 4];
        for (o, v) in meas.iter_mut().enumerate() {
            for (i, t) in truth.iter().enumerate() {
                *v += a[o >> 1][i >> 1] * b[o & 1][i & 1] * t;
            }
        }
        let c = correct_readout(&meas, &[2, 5], &m).unwrap();
        for (x, y) in c.probs.iter().zip(truth) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn clipping_reported() {
        let m = ReadoutModel::device();
        // A measured |1⟩ population below the false-positive floor.
        let c = correct_marginals(&[0.0], &m).unwrap();
        assert_eq!(c.probs, [0.0]);
        assert!(c.clipped > 0.0);
    }
}
