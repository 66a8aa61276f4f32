//! In-memory CSV tables with a fixed number format, so that identical runs
//! produce identical bytes.

use crate::error::LabError;

/// Shortest round-trip scientific notation; `nan`/`inf`/`-inf` otherwise.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Missing values are empty fields.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; the table is written to `<name>.csv`.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Table { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, LabError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| LabError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| LabError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.to_string()))
    }

    /// Numeric column by name; unparsable or empty cells are skipped.
    pub fn column(&self, name: &str) -> Vec<Option<f64>> {
        match self.columns.iter().position(|c| c == name) {
            Some(i) => self.rows.iter().map(|r| r[i].parse().ok()).collect(),
            None => Vec::new(),
        }
    }
}
