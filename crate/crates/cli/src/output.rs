use crate::CliError;
use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// A CSV table with a fixed header plus a JSON report.
#[derive(Debug, Clone)]
pub struct Output {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    pub json: Value,
}

/// Shortest round-trip decimal; `inf`, `-inf` and `nan` spelled out.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

impl Output {
    pub fn new(header: &[&'static str]) -> Self {
        Output {
            header: header.to_vec(),
            rows: Vec::new(),
            json: Value::Null,
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    /// `(csv path, json path)`; an output path ending in `.json` keeps the JSON and moves the CSV.
    pub fn paths(out: &Path) -> (PathBuf, PathBuf) {
        if out.extension().is_some_and(|e| e == "json") {
            (out.with_extension("csv"), out.to_path_buf())
        } else {
            (out.to_path_buf(), out.with_extension("json"))
        }
    }

    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        let (csv, json) = Output::paths(out);
        let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
        std::fs::write(&csv, self.csv()).map_err(|e| io(&csv, e))?;
        let mut text =
            serde_json::to_string_pretty(&self.json).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(&json, text).map_err(|e| io(&json, e))
    }
}
