//! Tab-separated output tables with a commented metadata header.
//!
//! ```text
//! # gaugechain 0.1.0
//! # table: profile
//! # key: value
//! # config:
//! #   schema_version = 1
//! t	P1	P3
//! 0	1	0
//! ```
//!
//! Numbers are written in Rust's shortest round-trip form, so identical
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CODE_VERSION: &str = concat!("gaugechain ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Ordered `key: value` lines.
    pub meta: Vec<(String, String)>,
    /// Resolved configuration, embedded verbatim.
    pub config: Option<String>,
}

impl Table {
    pub fn new<S: AsRef<str>>(name: &str, columns: &[S]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
            config: None,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch { expected: self.columns.len(), got: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_config(mut self, config: &str) -> Self {
        self.config = Some(config.to_string());
        self
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {CODE_VERSION}");
        let _ = writeln!(s, "# table: {}", self.name);
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        if let Some(c) = &self.config {
            s.push_str("# config:\n");
            for l in c.lines() {
                if l.is_empty() {
                    s.push_str("#\n");
                } else {
                    let _ = writeln!(s, "#   {l}");
                }
            }
        }
        s.push_str(&self.columns.join("\t"));
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            s.push_str(&cells.join("\t"));
            s.push('\n');
        }
        s
    }

    /// Reads back a rendered table. The config block is restored without
    /// its indentation.
    pub fn parse(text: &str) -> Result<Self> {
        let mut t = Table::new::<&str>("", &[]);
        let mut in_config = false;
        let mut config = String::new();
        let mut header_seen = false;
        for (n, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                if in_config {
                    if rest.is_empty() {
                        config.push('\n');
                        continue;
                    }
                    if let Some(c) = rest.strip_prefix("   ") {
                        config.push_str(c);
                        config.push('\n');
                        continue;
                    }
                    in_config = false;
                }
                let rest = rest.trim();
                if rest == "config:" {
                    in_config = true;
                } else if let Some(name) = rest.strip_prefix("table: ") {
                    t.name = name.to_string();
                } else if let Some((k, v)) = rest.split_once(": ") {
                    t.meta.push((k.to_string(), v.to_string()));
                }
                continue;
            }
            in_config = false;
            if line.is_empty() {
                continue;
            }
            if !header_seen {
                t.columns = line.split('\t').map(str::to_string).collect();
                header_seen = true;
                continue;
            }
            let row = line
                .split('\t')
                .map(|x| x.parse::<f64>().map_err(|_| Error::Parse { line: n + 1, msg: format!("bad number {x:?}") }))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != t.columns.len() {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: format!("expected {} cells, found {}", t.columns.len(), row.len()),
                });
            }
            t.rows.push(row);
        }
        if !header_seen {
            return Err(Error::Parse { line: 0, msg: "table has no header".into() });
        }
        if !config.is_empty() {
            t.config = Some(config);
        }
        Ok(t)
    }

    /// Writes `dir/<name>.tsv`. An existing file is an error unless `force`.
    pub fn write(&self, dir: &Path, force: bool) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.tsv", self.name));
        let mut f = if force {
            OpenOptions::new().write(true).create(true).truncate(true).open(&path)?
        } else {
            OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
                if e.kind() == std::io::ErrorKind::AlreadyExists {
                    Error::Io(std::io::Error::new(
                        e.kind(),
                        format!("{} exists; pass --force to overwrite", path.display()),
                    ))
                } else {
                    Error::Io(e)
                }
            })?
        };
        f.write_all(self.render().as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("profile", &["t", "P1"]).with_meta("engine", "exact").with_config("a = 1\n[b]\nc = \"x\"\n");
        t.push(vec![0.0, 1.0]).unwrap();
        t.push(vec![0.005, 0.9987654321]).unwrap();
        t
    }

    #[test]
    fn round_trip() {
        let t = sample();
        let back = Table::parse(&t.render()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("P1").unwrap(), [1.0, 0.9987654321]);
        assert_eq!(back.meta_value("engine"), Some("exact"));
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut t = Table::new("x", &["a"]);
        assert!(t.push(vec![1.0, 2.0]).is_err());
        assert!(Table::parse("a\tb\n1\n").is_err());
    }

    #[test]
    fn refuses_to_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample();
        t.write(dir.path(), false).unwrap();
        assert!(matches!(t.write(dir.path(), false), Err(Error::Io(_))));
        t.write(dir.path(), true).unwrap();
    }
}
