//! CSV tables with fixed formatting.
//!
//! Numbers are written with 12 significant digits in scientific notation,
//! `.` as decimal separator and `\n` line endings, so equal inputs give
//! byte-identical files. Column names carry their units; bare quantities are
//! in the dimensionless convention (momentum in `mc`, length in `ħ/mc`, time
//! in `ħ/mc²`, energy in `mc²`).

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

/// Unit suffixes used in column names.
pub mod units {
    pub const LENGTH: &str = "[hbar/mc]";
    pub const TIME: &str = "[hbar/mc^2]";
    pub const MOMENTUM: &str = "[mc]";
    pub const ENERGY: &str = "[mc^2]";
    pub const VELOCITY: &str = "[c]";
    pub const DENSITY_1D: &str = "[mc/hbar]";
    pub const DENSITY_3D: &str = "[(mc/hbar)^3]";
    pub const RATIO: &str = "[1]";
}

/// 12 significant digits, scientific notation.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Num(x) => fmt_num(*x),
            Field::Int(i) => i.to_string(),
            Field::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<i64> for Field {
    fn from(x: i64) -> Self {
        Field::Int(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as i64)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.into())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

/// A header row plus data rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<Field>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Field::render))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        fs::write(path, self.to_csv())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Field>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_format() {
        assert_eq!(fmt_num(0.6421), "6.42100000000e-1");
        assert_eq!(fmt_num(-2.0), "-2.00000000000e0");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["tau[hbar/mc^2]", "label"]);
        t.push(vec![1.5.into(), "a,b".into()]);
        t.push(vec![Field::Int(3), "c".into()]);
        assert_eq!(
            t.to_csv(),
            "tau[hbar/mc^2],label\n1.50000000000e0,\"a,b\"\n3,c\n"
        );
        assert_eq!(t.column("label").unwrap().len(), 2);
        assert!(t.column("missing").is_none());
    }
}
