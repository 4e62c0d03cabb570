//! Text form of an operator: an `n_sites N` header, then one term per line
//! as `coeff_re coeff_im site:P site:P …`. Lines starting with `#` are
//! comments. Terms appear in normalized order, so dumps are stable.

use num_complex::Complex;

use super::pauli::{OperatorSum, Pauli, PauliString};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn dump<T: Real>(op: &OperatorSum<T>) -> String {
    let mut s = format!("n_sites {}\n", op.n_sites());
    for t in op.terms() {
        s.push_str(&format!("{} {}", t.coeff.re, t.coeff.im));
        if !t.product.is_identity() {
            s.push(' ');
            s.push_str(&t.product.to_string());
        }
        s.push('\n');
    }
    s
}

pub fn parse<T: Real>(text: &str) -> Result<OperatorSum<T>> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut n_sites = None;
    let mut terms = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut tok = body.split_whitespace();
        let first = tok.next().unwrap();
        if first == "n_sites" {
            let v = tok.next().ok_or_else(|| perr(line, "missing site count".into()))?;
            n_sites = Some(v.parse::<usize>().map_err(|e| perr(line, e.to_string()))?);
            continue;
        }
        let num = |s: Option<&str>| -> Result<T> {
            let s = s.ok_or_else(|| perr(line, "missing coefficient".into()))?;
            s.parse::<T>().map_err(|_| perr(line, format!("bad number {s:?}")))
        };
        let re = num(Some(first))?;
        let im = num(tok.next())?;
        let mut ops = Vec::new();
        for t in tok {
            let (site, p) = t.split_once(':').ok_or_else(|| perr(line, format!("bad factor {t:?}")))?;
            let site = site.parse::<usize>().map_err(|e| perr(line, e.to_string()))?;
            let mut chars = p.chars();
            let pauli = match (chars.next().and_then(Pauli::parse), chars.next()) {
                (Some(q), None) => q,
                _ => return Err(perr(line, format!("bad Pauli label {p:?}"))),
            };
            ops.push((site, pauli));
        }
        terms.push(PauliString::new(Complex::new(re, im), ops).map_err(|e| perr(line, e.to_string()))?);
    }
    let n = n_sites.ok_or_else(|| perr(0, "missing n_sites header".into()))?;
    OperatorSum::from_terms(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_full;
    use crate::model::device_default;

    #[test]
    fn round_trip() {
        let h = build_full::<f64>(&device_default()).unwrap();
        let text = dump(&h);
        assert_eq!(parse::<f64>(&text).unwrap(), h);
        assert!(text.starts_with("n_sites 10\n"));
    }

    #[test]
    fn identity_and_comments() {
        let op = parse::<f64>("# c\nn_sites 2\n1.5 0\n0.5 0 2:Z\n").unwrap();
        assert_eq!(op.len(), 2);
        assert!(parse::<f64>("n_sites 2\n1 0 3:Q\n").is_err());
        assert!(parse::<f64>("1 0 1:X\n").is_err());
    }
}
