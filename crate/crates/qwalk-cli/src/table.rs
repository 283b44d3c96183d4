//! Numeric tables with a CSV form (leading `#` comment block, one-line
//! header, 17-significant-digit floats) and a JSON form (array of objects
//! with identical keys). Identical inputs always serialize to identical
//! bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("format must be one of {{csv, json}}, got '{other}'")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// Key/value lines of the CSV comment block.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Full-precision decimal form: 17 significant digits, exact on re-parse.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// JSON form: an array of objects keyed by column name; NaN cells
    /// (undefined entries) become null.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row.iter())
                    .map(|(c, &x)| {
                        let v = serde_json::Number::from_f64(x)
                            .map(serde_json::Value::Number)
                            .unwrap_or(serde_json::Value::Null);
                        (c.clone(), v)
                    })
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("plain numeric json");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Parse the CSV form back, including the comment block. `NaN` cells
    /// round-trip as NaN.
    pub fn from_csv(text: &str) -> Result<Table, String> {
        let mut meta = Vec::new();
        let mut lines = text.lines().peekable();
        while let Some(line) = lines.peek() {
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim_start();
                match rest.split_once(':') {
                    Some((k, v)) => meta.push((k.trim().to_string(), v.trim().to_string())),
                    None => meta.push((rest.to_string(), String::new())),
                }
                lines.next();
            } else {
                break;
            }
        }
        let header = lines.next().ok_or("missing header line")?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Result<Vec<f64>, _> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect();
            let cells = cells.map_err(|e| format!("row {}: {e}", i + 1))?;
            if cells.len() != columns.len() {
                return Err(format!(
                    "row {}: {} cells for {} columns",
                    i + 1,
                    cells.len(),
                    columns.len()
                ));
            }
            rows.push(cells);
        }
        Ok(Table {
            meta,
            columns,
            rows,
        })
    }

    pub fn read_csv_path(path: &Path) -> Result<Table, String> {
        let mut text = String::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| format!("{}: {e}", path.display()))?;
        Table::from_csv(&text)
    }
}

/// Write the rendered table to a file, or to stdout when no path is given.
pub fn write_table(table: &Table, path: Option<&Path>, format: Format) -> io::Result<()> {
    let rendered = table.render(format);
    match path {
        Some(p) => fs::write(p, rendered),
        None => io::stdout().write_all(rendered.as_bytes()),
    }
}
