//! Plain-text MPS checkpoints.
//!
//! ```text
//! # gaugechain-mps v1
//! n_sites 4
//! amplitude complex
//! center 2
//! site 1 1 2
//! <re> <im> ...   one line per physical value, row-major
//! ```
//!
//! Numbers use the shortest representation that reads back to the same
//! binary value, so a dump round-trips exactly. Real states write one
//! number per entry, complex states two.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex;

use super::tensor::Mps;
use crate::error::{Error, Result};
use crate::scalar::Amplitude;

pub const CHECKPOINT_HEADER: &str = "# gaugechain-mps v1";

pub fn dump<A: Amplitude>(psi: &Mps<A>) -> String {
    let mut s = String::new();
    let kind = if A::IS_COMPLEX { "complex" } else { "real" };
    let _ = writeln!(s, "{CHECKPOINT_HEADER}\nn_sites {}\namplitude {kind}\ncenter {}", psi.n_sites(), psi.center + 1);
    for (k, t) in psi.sites.iter().enumerate() {
        let (r, c) = t[0].shape();
        let _ = writeln!(s, "site {} {r} {c}", k + 1);
        for m in t {
            let mut line = Vec::with_capacity(r * c * 2);
            for i in 0..r {
                for j in 0..c {
                    let z = m[(i, j)].to_complex();
                    line.push(z.re.to_string());
                    if A::IS_COMPLEX {
                        line.push(z.im.to_string());
                    }
                }
            }
            let _ = writeln!(s, "{}", line.join(" "));
        }
    }
    s
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let l = self.lines.get(self.pos).copied().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })?;
        self.pos += 1;
        Ok(l)
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, l) = self.next(key)?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok((n, v.trim())),
            _ => parse_err(n, format!("expected `{key} ...`")),
        }
    }
}

pub fn parse<A: Amplitude>(text: &str) -> Result<Mps<A>> {
    let lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()).collect();
    let mut cur = Cursor { lines, pos: 0 };
    let (n, head) = cur.next("header")?;
    if head != CHECKPOINT_HEADER {
        return parse_err(n, format!("expected {CHECKPOINT_HEADER:?}"));
    }
    let (n, v) = cur.field("n_sites")?;
    let l: usize = v.parse().map_err(|_| Error::Parse { line: n, msg: "bad n_sites".into() })?;
    let (n, kind) = cur.field("amplitude")?;
    let complex = match kind {
        "complex" => true,
        "real" => false,
        _ => return parse_err(n, "amplitude must be real or complex"),
    };
    if complex && !A::IS_COMPLEX {
        return parse_err(n, "complex checkpoint loaded into a real MPS");
    }
    let (n, v) = cur.field("center")?;
    let center: usize = v.parse().map_err(|_| Error::Parse { line: n, msg: "bad center".into() })?;
    if center == 0 || center > l {
        return parse_err(n, "center outside chain");
    }
    let mut sites = Vec::with_capacity(l);
    for k in 1..=l {
        let (n, v) = cur.field("site")?;
        let nums: Vec<usize> = v.split_whitespace().filter_map(|x| x.parse().ok()).collect();
        if nums.len() != 3 || nums[0] != k {
            return parse_err(n, format!("expected `site {k} <rows> <cols>`"));
        }
        let (r, c) = (nums[1], nums[2]);
        let mut blocks = Vec::with_capacity(2);
        for _ in 0..2 {
            let (n, row) = cur.next("tensor data")?;
            let vals: Vec<A::Re> = row
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| Error::Parse { line: n, msg: format!("bad number {x:?}") }))
                .collect::<Result<_>>()?;
            let per = if complex { 2 } else { 1 };
            if vals.len() != r * c * per {
                return parse_err(n, format!("expected {} numbers, found {}", r * c * per, vals.len()));
            }
            let entry = |i: usize| {
                let im = if complex { vals[per * i + 1] } else { num_traits::Zero::zero() };
                A::from_complex(Complex::new(vals[per * i], im)).expect("checked amplitude kind")
            };
            blocks.push(DMatrix::from_fn(r, c, |i, j| entry(i * c + j)));
        }
        let b1 = blocks.pop().unwrap();
        let b0 = blocks.pop().unwrap();
        sites.push([b0, b1]);
    }
    for k in 1..l {
        if sites[k - 1][0].ncols() != sites[k][0].nrows() {
            return Err(Error::DimensionMismatch { expected: sites[k - 1][0].ncols(), got: sites[k][0].nrows() });
        }
    }
    Ok(Mps { sites, center: center - 1 })
}

pub fn save<A: Amplitude>(psi: &Mps<A>, path: &Path) -> Result<()> {
    std::fs::write(path, dump(psi))?;
    Ok(())
}

pub fn load<A: Amplitude>(path: &Path) -> Result<Mps<A>> {
    parse(&std::fs::read_to_string(path)?)
}
