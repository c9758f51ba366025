//! CSV and JSON rendering with a fixed float precision.

use serde_json::{Map, Number, Value};

/// Rounds to `precision` significant digits.
pub fn round_sig(x: f64, precision: u8) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    let digits = usize::from(precision.max(1)) - 1;
    format!("{x:.digits$e}").parse().unwrap_or(x)
}

/// Shortest decimal that round-trips the value rounded to `precision` digits.
pub fn fmt_float(x: f64, precision: u8) -> String {
    format!("{}", round_sig(x, precision))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self, precision: u8) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v, precision),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self, precision: u8) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Number::from_f64(round_sig(*v, precision)).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Rows sharing one header. Renders as CSV or as a JSON array of objects.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, precision: u8) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.csv(precision)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self, precision: u8) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| object(self.header.iter().copied().zip(row.iter()), precision))
                .collect(),
        )
    }
}

/// Flat JSON object in field order; empty cells are dropped.
pub fn object<'a>(fields: impl IntoIterator<Item = (&'a str, &'a Cell)>, precision: u8) -> Value {
    let mut map = Map::new();
    for (key, cell) in fields {
        if *cell != Cell::Empty {
            map.insert(key.to_owned(), cell.json(precision));
        }
    }
    Value::Object(map)
}

pub fn to_json_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_to_significant_digits() {
        assert_eq!(fmt_float(10.0 / 11.0, 12), "0.909090909091");
        assert_eq!(fmt_float(10.0 / 11.0, 6), "0.909091");
        assert_eq!(fmt_float(0.8, 12), "0.8");
        assert_eq!(fmt_float((2.0 * 0.7 + 1.0) / 3.0, 12), "0.8");
        assert_eq!(fmt_float(1.0, 17), "1");
        assert_eq!(fmt_float(0.1 + 0.2, 17), "0.30000000000000004");
        assert_eq!(fmt_float(0.0, 12), "0");
    }

    #[test]
    fn table_renders_both_formats() {
        let mut t = Table::new(vec!["N", "lambda1", "lambda2"]);
        t.push(vec![1usize.into(), 0.5.into(), Cell::Empty]);
        assert_eq!(t.to_csv(12), "N,lambda1,lambda2\n1,0.5,\n");
        let json = t.to_json_value(12);
        assert_eq!(json, serde_json::json!([{"N": 1, "lambda1": 0.5}]));
    }
}
