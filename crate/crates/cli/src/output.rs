use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rows of string cells under a fixed column order. The first column is
/// always `command`.
#[derive(Debug)]
pub struct Table {
    command: &'static str,
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(command: &'static str, columns: &'static [&'static str]) -> Self {
        Table {
            command,
            columns,
            rows: Vec::new(),
        }
    }

    /// Appends a row; `cells` excludes the leading `command` column.
    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(
            cells.len() + 1,
            self.columns.len(),
            "row width for {}",
            self.command
        );
        self.rows.push(cells);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(self.columns)?;
                for row in &self.rows {
                    w.write_record(
                        std::iter::once(self.command).chain(row.iter().map(String::as_str)),
                    )?;
                }
                w.flush()
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self.columns[1..]
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), Value::String(v.clone())))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut top = Map::new();
                top.insert("command".into(), Value::String(self.command.into()));
                top.insert("rows".into(), Value::Array(rows));
                serde_json::to_writer(&mut *out, &Value::Object(top))?;
                writeln!(out)
            }
        }
    }
}
