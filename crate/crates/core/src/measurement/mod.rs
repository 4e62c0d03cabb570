//! Model of the readout chain: finite-shot sampling, per-qubit readout
//! errors and their inversion, and the Z-line crosstalk matrix.
//!
//! Qubit `Q_j` is chain site `j`. Device tables ship as tab-separated files
//! laid out like the published tables, qubits as columns.

mod crosstalk;
mod readout;
mod shots;

pub use crosstalk::{crosstalk_compensate, CrosstalkMatrix};
pub use readout::{apply_readout_error, correct_marginals, correct_readout, Corrected, ReadoutModel};
pub use shots::{
    gauge_correlators_from_shots, joint_correlator_corrected, joint_correlator_from_shots, sample_shots, stream_rng,
    Basis, Counts, COUNTS_HEADER,
};

use crate::error::{Error, Result};

/// Rows of a labelled table: column labels and `(row label, values)`.
pub(crate) struct LabeledTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

/// Parses a table whose first non-comment line holds the column labels
/// (after a corner cell). Cells split on tabs, commas or spaces.
pub(crate) fn parse_table(text: &str) -> Result<LabeledTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let cells = |l: &str| -> Vec<String> {
        l.split(|c: char| c == '\t' || c == ',' || c == ' ').filter(|s| !s.is_empty()).map(str::to_string).collect()
    };
    let (_, head) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty table".into() })?;
    let columns: Vec<String> = cells(head).into_iter().skip(1).collect();
    let mut rows = Vec::new();
    for (n, l) in lines {
        let c = cells(l);
        if c.len() != columns.len() + 1 {
            return Err(Error::Parse { line: n, msg: format!("expected {} cells, found {}", columns.len() + 1, c.len()) });
        }
        let vals = c[1..]
            .iter()
            .map(|x| x.parse::<f64>().map_err(|_| Error::Parse { line: n, msg: format!("bad number {x:?}") }))
            .collect::<Result<Vec<_>>>()?;
        rows.push((c[0].clone(), vals));
    }
    Ok(LabeledTable { columns, rows })
}

/// `Q7` → 7.
pub(crate) fn qubit_index(label: &str) -> Option<usize> {
    label.strip_prefix('Q').and_then(|s| s.parse().ok()).filter(|&q| q >= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_parsing() {
        let t = parse_table("# c\nx Q1 Q2\nF_e, 0.5, 0.25\n").unwrap();
        assert_eq!(t.columns, ["Q1", "Q2"]);
        assert_eq!(t.rows[0].1, [0.5, 0.25]);
        assert!(matches!(parse_table("x Q1\nF 1 2\n"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(qubit_index("Q10"), Some(10));
        assert_eq!(qubit_index("Q0"), None);
    }
}
