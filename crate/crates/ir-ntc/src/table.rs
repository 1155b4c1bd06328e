//! In-memory CSV tables. Floats use Rust's shortest round-trip formatting,
//! so equal values always print identically.

use std::fmt::Display;
use std::io::Write;

use anyhow::Result;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Formats one cell.
pub fn cell(x: impl Display) -> String {
    x.to_string()
}

/// Formats an optional cell; `None` is left empty.
pub fn opt(x: Option<impl Display>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Space-separated list, used for increment vectors.
pub fn list(xs: &[u32]) -> String {
    xs.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Appends the rows of a table with the same headers.
    pub fn extend(&mut self, other: Table) {
        debug_assert_eq!(self.headers, other.headers);
        self.rows.extend(other.rows);
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf)?)
    }
}
