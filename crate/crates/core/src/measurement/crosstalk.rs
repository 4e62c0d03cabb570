use nalgebra::{DMatrix, DVector};

use super::{parse_table, qubit_index};
use crate::error::{invalid, Error, Result};

/// Linear map from applied Z biases to the biases the qubits feel,
/// `Z_act = M_z · Z_app`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrosstalkMatrix {
    m: DMatrix<f64>,
    /// Qubits whose row was absent from the source table and filled with
    /// the identity row.
    filled: Vec<usize>,
}

impl CrosstalkMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return invalid(format!("crosstalk matrix is {}x{}", m.nrows(), m.ncols()));
        }
        for k in 0..m.nrows() {
            if (m[(k, k)] - 1.0).abs() > 1e-12 {
                return invalid(format!("diagonal entry of Q{} is {}, expected 1", k + 1, m[(k, k)]));
            }
        }
        let c = Self { m, filled: Vec::new() };
        let cond = c.condition_number();
        if !(cond.is_finite() && cond < 1e12) {
            return Err(Error::Singular(format!("crosstalk matrix has condition number {cond:e}")));
        }
        Ok(c)
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n), filled: Vec::new() }
    }

    /// The device matrix. Its source table has no `Q9` row, which is
    /// filled with the identity row.
    pub fn device() -> Self {
        Self::from_table(include_str!("../../data/z_crosstalk.tsv")).expect("bundled table is valid")
    }

    /// Reads a table with columns `Q1 … Qn` and one row per labelled
    /// qubit. Missing rows become identity rows and are logged.
    pub fn from_table(text: &str) -> Result<Self> {
        let t = parse_table(text)?;
        let n = t.columns.len();
        for (k, c) in t.columns.iter().enumerate() {
            if qubit_index(c) != Some(k + 1) {
                return invalid(format!("column {} is {c:?}, expected Q{}", k + 1, k + 1));
            }
        }
        let mut m = DMatrix::zeros(n, n);
        let mut seen = vec![false; n];
        for (label, vals) in &t.rows {
            let q = match qubit_index(label) {
                Some(q) if q <= n => q,
                _ => return invalid(format!("row label {label:?} is not a qubit among Q1..Q{n}")),
            };
            if std::mem::replace(&mut seen[q - 1], true) {
                return invalid(format!("row {label} appears twice"));
            }
            m.row_mut(q - 1).copy_from_slice(vals);
        }
        let filled: Vec<usize> = (1..=n).filter(|&q| !seen[q - 1]).collect();
        for &q in &filled {
            log::warn!("crosstalk table has no row for Q{q}; using the identity row");
            m[(q - 1, q - 1)] = 1.0;
        }
        let mut c = Self::new(m)?;
        c.filled = filled;
        Ok(c)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn n_qubits(&self) -> usize {
        self.m.nrows()
    }

    pub fn filled_rows(&self) -> &[usize] {
        &self.filled
    }

    /// Ratio of extreme singular values, from the eigenvalues of `MᵀM`.
    pub fn condition_number(&self) -> f64 {
        let ev = (self.m.transpose() * &self.m).symmetric_eigen().eigenvalues;
        (ev.max() / ev.min()).sqrt()
    }

    /// Biases felt for the applied ones.
    pub fn felt(&self, z_applied: &[f64]) -> Result<Vec<f64>> {
        if z_applied.len() != self.n_qubits() {
            return Err(Error::DimensionMismatch { expected: self.n_qubits(), got: z_applied.len() });
        }
        Ok((&self.m * DVector::from_column_slice(z_applied)).as_slice().to_vec())
    }
}

/// Applied biases `M⁻¹ · z_target` that make the felt biases equal the target.
pub fn crosstalk_compensate(z_target: &[f64], m: &CrosstalkMatrix) -> Result<Vec<f64>> {
    if z_target.len() != m.n_qubits() {
        return Err(Error::DimensionMismatch { expected: m.n_qubits(), got: z_target.len() });
    }
    m.m.clone()
        .lu()
        .solve(&DVector::from_column_slice(z_target))
        .map(|v| v.as_slice().to_vec())
        .ok_or_else(|| Error::Singular("crosstalk matrix".into()))
}
