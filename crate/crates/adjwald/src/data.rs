//! CSV ingestion and model-matrix terms.
//!
//! Files are comma separated with a header row, `.` decimal points and
//! unquoted numbers. Terms are column names, `log(term)` or products
//! `a:b:…` of terms.

use std::io::Read;
use std::path::Path;

use adjwald_core::Matrix;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<String>,
    /// Column-major values.
    pub values: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn read(path: &Path) -> CliResult<Self> {
        let file =
            std::fs::File::open(path).map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Data(format!("unreadable header: {e}")))?
            .iter()
            .map(String::from)
            .collect();
        if columns.is_empty() || columns.iter().any(|c| c.is_empty()) {
            return Err(CliError::Data("header has empty column names".into()));
        }
        if let Some(dup) = columns.iter().enumerate().find(|(i, c)| columns[..*i].contains(c)) {
            return Err(CliError::Data(format!("duplicate column {:?}", dup.1)));
        }
        let mut values = vec![Vec::new(); columns.len()];
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
            if record.len() != columns.len() {
                return Err(CliError::Data(format!(
                    "row {row}: {} fields, header has {}",
                    record.len(),
                    columns.len()
                )));
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    CliError::Data(format!("row {row}, column {:?}: {field:?} is not a number", columns[j]))
                })?;
                if !v.is_finite() {
                    return Err(CliError::Data(format!(
                        "row {row}, column {:?}: non-finite value",
                        columns[j]
                    )));
                }
                values[j].push(v);
            }
        }
        if values[0].is_empty() {
            return Err(CliError::Data("no data rows".into()));
        }
        Ok(Dataset { columns, values })
    }

    pub fn rows(&self) -> usize {
        self.values[0].len()
    }

    pub fn column(&self, name: &str) -> CliResult<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|j| self.values[j].as_slice())
            .ok_or_else(|| CliError::Config(format!("unknown column {name:?}; columns are {:?}", self.columns)))
    }

    /// Evaluates `term` on every row.
    pub fn term(&self, term: &str) -> CliResult<Vec<f64>> {
        let term = term.trim();
        if term.contains(':') {
            let mut out = vec![1.0; self.rows()];
            for factor in term.split(':') {
                for (o, v) in out.iter_mut().zip(self.term(factor)?) {
                    *o *= v;
                }
            }
            return Ok(out);
        }
        if let Some(inner) = term.strip_prefix("log(").and_then(|t| t.strip_suffix(')')) {
            let v = self.term(inner)?;
            if let Some(i) = v.iter().position(|&x| !(x > 0.0)) {
                return Err(CliError::Data(format!(
                    "row {}: log of non-positive value in {term:?}",
                    i + 1
                )));
            }
            return Ok(v.iter().map(|x| x.ln()).collect());
        }
        Ok(self.column(term)?.to_vec())
    }

    /// Model matrix with an optional leading intercept column, and its
    /// column names.
    pub fn design(&self, terms: &[String], intercept: bool) -> CliResult<(Matrix, Vec<String>)> {
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut names = Vec::new();
        if intercept {
            cols.push(vec![1.0; self.rows()]);
            names.push("intercept".to_string());
        }
        for t in terms {
            cols.push(self.term(t)?);
            names.push(t.trim().to_string());
        }
        if cols.is_empty() {
            return Err(CliError::Config("model has no terms".into()));
        }
        let m = Matrix::from_fn(self.rows(), cols.len(), |i, j| cols[j][i]);
        Ok((m, names))
    }
}
