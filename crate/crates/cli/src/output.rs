//! Run records and their JSON, CSV and plain-text renderings.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub results: Value,
    /// Wall time in seconds.
    pub timing: f64,
    pub version: String,
}

/// Tabular form of a command's results. Headers are fixed per command.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// `field,value` rows from the leaves of a JSON document, with dotted
    /// paths and numeric array indices.
    pub fn flatten(v: &Value) -> Self {
        fn walk(prefix: &str, v: &Value, out: &mut Table) {
            let join = |k: &str| {
                if prefix.is_empty() {
                    k.to_string()
                } else {
                    format!("{prefix}.{k}")
                }
            };
            match v {
                Value::Object(m) => m.iter().for_each(|(k, x)| walk(&join(k), x, out)),
                Value::Array(a) => a
                    .iter()
                    .enumerate()
                    .for_each(|(i, x)| walk(&join(&i.to_string()), x, out)),
                Value::String(s) => out.push(vec![prefix.to_string(), s.clone()]),
                Value::Null => out.push(vec![prefix.to_string(), String::new()]),
                other => out.push(vec![prefix.to_string(), other.to_string()]),
            }
        }
        let mut t = Table::new(&["field", "value"]);
        walk("", v, &mut t);
        t
    }
}

/// What a command hands back for rendering.
pub struct Report {
    pub results: Value,
    pub table: Table,
    pub text: String,
}

pub fn cell(x: f64) -> String {
    // shortest representation that round-trips
    format!("{x:?}")
}

pub fn emit(format: Format, record: &RunRecord, table: &Table, text: &str) -> std::io::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, record)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.header)?;
            for r in &table.rows {
                w.write_record(r)?;
            }
            w.flush()
        }
        Format::Text => {
            write!(out, "{text}")?;
            if !text.ends_with('\n') {
                writeln!(out)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_paths() {
        let t = Table::flatten(&json!({"a": 1.5, "b": {"c": [true, "x"]}, "d": null}));
        assert_eq!(t.header, vec!["field", "value"]);
        assert_eq!(
            t.rows,
            vec![
                vec!["a".to_string(), "1.5".to_string()],
                vec!["b.c.0".to_string(), "true".to_string()],
                vec!["b.c.1".to_string(), "x".to_string()],
                vec!["d".to_string(), String::new()],
            ]
        );
    }

    #[test]
    fn cells_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 0.0] {
            assert_eq!(cell(x).parse::<f64>().unwrap(), x);
        }
    }
}
