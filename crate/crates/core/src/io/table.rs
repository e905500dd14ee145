//! CSV tables with a fixed column order and 9-decimal numbers.

use std::io::Write;

use crate::error::{Error, Result};
use crate::ratio::{RatioPoint, RatioValue};

pub const UNDEFINED: &str = "undefined";

pub fn num(x: f64) -> String {
    format!("{x:.9}")
}

pub fn ratio(v: RatioValue) -> String {
    v.value().map_or_else(|| UNDEFINED.to_string(), num)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn append(&mut self, other: Table) {
        assert_eq!(self.columns, other.columns);
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("csv output is utf-8")
    }
}

pub const RATIO_COLUMNS: [&str; 8] = [
    "athlete_id",
    "date",
    "method",
    "acute",
    "chronic",
    "ratio",
    "converged",
    "zone",
];

pub fn ratio_row(athlete_id: &str, p: &RatioPoint, zone: &str) -> Vec<String> {
    vec![
        athlete_id.to_string(),
        p.at.to_string(),
        p.method.as_str().to_string(),
        num(p.acute),
        num(p.chronic),
        ratio(p.ratio),
        p.converged.to_string(),
        zone.to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(num(0.1), "0.100000000");
        assert_eq!(num(50.0 / 35.0), "1.428571429");
        assert_eq!(ratio(RatioValue::Undefined), "undefined");
    }

    #[test]
    fn csv_output() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x".into(), num(4.0)]);
        assert_eq!(t.to_csv_string(), "a,b\nx,4.000000000\n");
    }
}
