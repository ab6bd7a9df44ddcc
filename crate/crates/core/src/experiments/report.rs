use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::Result;

/// One table cell. Non-finite reals are written as tags.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Tag(String),
}

impl Cell {
    pub fn tag(s: impl Into<String>) -> Self {
        Cell::Tag(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Real(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            Cell::Tag(_) => None,
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Real(v) if v.is_finite() => v.to_string(),
            Cell::Real(v) if v.is_nan() => "nan".into(),
            Cell::Real(v) if *v > 0.0 => "inf".into(),
            Cell::Real(_) => "-inf".into(),
            Cell::Int(v) => v.to_string(),
            Cell::Tag(s) => s.clone(),
        }
    }

    fn bits_eq(&self, other: &Cell) -> bool {
        match (self, other) {
            (Cell::Real(a), Cell::Real(b)) => a.to_bits() == b.to_bits(),
            _ => self == other,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Real(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Int(v) => s.serialize_i64(*v),
            other => s.serialize_str(&other.text()),
        }
    }
}

/// Reproducibility block attached to every table.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Meta {
    /// Full configuration echo.
    pub config: serde_json::Value,
    /// Absent for outputs that involve no randomness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    /// Recorded for experiment runs only, so other outputs stay reproducible
    /// byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
    /// Command line that produced the table, when run from the CLI.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invocation: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Meta,
}

impl ReportTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            meta: Meta::default(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; tags become `None`.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    /// Bitwise equality of columns and cells, ignoring metadata.
    pub fn same_data(&self, other: &ReportTable) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.bits_eq(y)))
    }

    /// CSV with a header row. Metadata precedes it as `# key: value` lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for line in self.meta_lines()? {
            writeln!(out, "# {line}")?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::text))?;
        }
        writer.flush()?;
        Ok(())
    }

    fn meta_lines(&self) -> Result<Vec<String>> {
        let mut lines = Vec::new();
        if let Some(inv) = &self.meta.invocation {
            lines.push(format!("invocation: {inv}"));
        }
        if let Some(seed) = self.meta.master_seed {
            lines.push(format!("master_seed: {seed}"));
        }
        lines.push(format!("config: {}", serde_json::to_string(&self.meta.config)?));
        if let Some(t) = self.meta.wall_time_secs {
            lines.push(format!("wall_time_secs: {t}"));
        }
        for note in &self.meta.notes {
            lines.push(format!("note: {note}"));
        }
        Ok(lines)
    }

    /// `{"meta": {...}, "rows": [{column: value, ...}, ...]}`.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

struct RowObject<'a> {
    columns: &'a [String],
    row: &'a [Cell],
}

impl Serialize for RowObject<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.row) {
            map.serialize_entry(c, v)?;
        }
        map.end()
    }
}

impl Serialize for ReportTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<RowObject<'_>> = self
            .rows
            .iter()
            .map(|row| RowObject {
                columns: &self.columns,
                row,
            })
            .collect();
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("meta", &self.meta)?;
        map.serialize_entry("columns", &self.columns)?;
        map.serialize_entry("rows", &rows)?;
        map.end()
    }
}
