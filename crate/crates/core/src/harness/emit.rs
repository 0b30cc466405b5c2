use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{Map, Value};

use super::config::Format;
use crate::error::{Error, Result};

/// One command's output: scalar facts plus a single table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub summary: Map<String, Value>,
    pub table: Table,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

impl Report {
    pub fn new(command: &str, table: Table) -> Self {
        Report {
            command: command.to_string(),
            summary: Map::new(),
            table,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }
}

/// Exact rationals always travel as "num/den".
pub fn rational(r: &BigRational) -> Value {
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

pub fn complex(z: Complex64) -> Value {
    Value::Array(vec![float(z.re), float(z.im)])
}

/// Finite doubles as JSON numbers; NaN and infinities as strings.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn emit(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(&report.table.columns).map_err(io)?;
            for row in &report.table.rows {
                w.write_record(row.iter().map(cell)).map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn rationals_stay_exact() {
        let r = BigRational::new(BigInt::from(5), BigInt::from(6));
        assert_eq!(rational(&r), Value::String("5/6".into()));
        assert_eq!(rational(&BigRational::from_integer(1.into())), Value::String("1/1".into()));
    }

    #[test]
    fn empty_table_keeps_header() {
        let r = Report::new("expsum", Table::new(&["k", "abs_value", "fitted_slope"]));
        let csv = String::from_utf8(emit(&r, Format::Csv).unwrap()).unwrap();
        assert_eq!(csv, "k,abs_value,fitted_slope\n");
        let json: Value = serde_json::from_slice(&emit(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(json["table"]["rows"], Value::Array(vec![]));
    }

    #[test]
    fn csv_cells() {
        let mut t = Table::new(&["m", "abs_value", "exact_zero"]);
        t.push(vec![1.into(), float(0.5), false.into()]);
        let csv = String::from_utf8(emit(&Report::new("x", t), Format::Csv).unwrap()).unwrap();
        assert_eq!(csv, "m,abs_value,exact_zero\n1,0.5,false\n");
    }
}
