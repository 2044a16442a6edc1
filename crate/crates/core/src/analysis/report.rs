use std::collections::BTreeMap;
use std::io::Write;

use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::data::Dataset;
use crate::error::Result;

/// One table cell. Missing values serialize as JSON `null` / empty CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Number)
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Number(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Number(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Number(_) | Cell::Empty => s.serialize_none(),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::opt(v)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_text))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Exclusion {
    pub country: String,
    pub reason: String,
}

impl Exclusion {
    pub fn new(country: &str, reason: impl Into<String>) -> Self {
        Exclusion {
            country: country.to_string(),
            reason: reason.into(),
        }
    }
}

/// Serializable outcome of one study.
///
/// Every dataset country is listed in exactly one of `included` or
/// `exclusions`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub source: String,
    pub fill_policy: String,
    pub notes: Vec<String>,
    pub parameters: BTreeMap<String, Value>,
    pub summary: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    pub included: Vec<String>,
    pub exclusions: Vec<Exclusion>,
}

pub(crate) const ZERO_FILL_NOTE: &str = "Missing PM2.5 values were replaced by 0 before this study (zero fill policy).";
pub(crate) const EXCLUDE_NOTE: &str =
    "Missing PM2.5 values are excluded, not zero-filled; averages use observed values only.";

impl StudyReport {
    pub fn new(study: &str, ds: &Dataset) -> Self {
        let policy_note = match ds.fill_policy() {
            crate::data::FillPolicy::ZeroFill => ZERO_FILL_NOTE,
            crate::data::FillPolicy::Exclude => EXCLUDE_NOTE,
        };
        StudyReport {
            study: study.to_string(),
            source: ds.source().to_string(),
            fill_policy: ds.fill_policy().name().to_string(),
            notes: vec![policy_note.to_string()],
            parameters: BTreeMap::new(),
            summary: BTreeMap::new(),
            tables: Vec::new(),
            included: Vec::new(),
            exclusions: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable parameter"),
        );
        self
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable summary"),
        );
        self
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Sorts the country lists so output order never depends on input order.
    pub(crate) fn finish(mut self) -> Self {
        self.included.sort();
        self.included.dedup();
        self.exclusions.sort();
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_csv_leaves_missing_cells_empty() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(vec![Cell::from("x, y"), Cell::Empty, Cell::from(1.5)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b,c\n\"x, y\",,1.5\n");
    }

    #[test]
    fn cells_serialize_to_plain_json() {
        let v = serde_json::to_string(&vec![
            Cell::Int(3),
            Cell::Empty,
            Cell::Number(f64::NAN),
            Cell::from("s"),
        ])
        .unwrap();
        assert_eq!(v, "[3,null,null,\"s\"]");
    }
}
