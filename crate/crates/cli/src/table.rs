use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Bool(v) => Some(if *v { 1.0 } else { 0.0 }),
            Cell::Text(_) => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }

    fn parse_csv(s: &str) -> Cell {
        if let Ok(v) = s.parse::<i64>() {
            return Cell::Int(v);
        }
        if let Ok(v) = s.parse::<f64>() {
            return Cell::Real(v);
        }
        match s {
            "true" => Cell::Bool(true),
            "false" => Cell::Bool(false),
            _ => Cell::Text(s.to_string()),
        }
    }

    fn parse_json(v: &Value) -> Cell {
        match v {
            Value::Null => Cell::Real(f64::NAN),
            Value::Bool(b) => Cell::Bool(*b),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Cell::Int(i),
                None => Cell::Real(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) => Cell::Text(s.clone()),
            other => Cell::Text(other.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Real(v.unwrap_or(f64::NAN))
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(name: &str, columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; non-numeric cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        json!({ "name": self.name, "columns": self.columns, "rows": rows })
    }

    /// Inverse of [`Table::to_csv`]; `#` lines are skipped.
    pub fn from_csv(name: &str, text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| CliError::Usage("CSV input has no header row".into()))?;
        let mut table = Table::new(name, header.split(','));
        for (k, line) in lines.enumerate() {
            let row: Vec<Cell> = line.split(',').map(Cell::parse_csv).collect();
            if row.len() != table.columns.len() {
                return Err(CliError::Usage(format!(
                    "CSV row {} has {} fields, header has {}",
                    k + 1,
                    row.len(),
                    table.columns.len()
                )));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn from_json(v: &Value) -> Result<Self, CliError> {
        let bad = || CliError::Usage("malformed table in JSON input".into());
        let name = v["name"].as_str().ok_or_else(bad)?;
        let columns: Vec<String> = v["columns"]
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or_else(bad))
            .collect::<Result<_, _>>()?;
        let mut table = Table::new(name, columns);
        for row in v["rows"].as_array().ok_or_else(bad)? {
            let cells: Vec<Cell> = row.as_array().ok_or_else(bad)?.iter().map(Cell::parse_json).collect();
            if cells.len() != table.columns.len() {
                return Err(bad());
            }
            table.rows.push(cells);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::new("t", ["x", "n", "ok", "class"]);
        t.push(vec![0.1.into(), 3i64.into(), true.into(), "Subradiant".into()]);
        t.push(vec![(1.0 / 3.0).into(), (-1i64).into(), false.into(), "Superradiant".into()]);
        let back = Table::from_csv("t", &t.to_csv(&["meta".into()])).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut t = Table::new("t", ["x", "n"]);
        t.push(vec![std::f64::consts::PI.into(), 7usize.into()]);
        let back = Table::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(Cell::Real(0.1).csv(), "1.0000000000000001e-1");
    }
}
