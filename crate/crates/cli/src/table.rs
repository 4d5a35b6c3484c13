//! Column-oriented output shared by all commands: CSV with a provenance line,
//! or JSON carrying the same rows.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing `# ...` lines (termination events and similar).
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, provenance: &str) -> String {
        let mut s = format!("# config: {provenance}\n{}\n", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Float(v) => format!("{v:.16e}"),
                    Cell::Text(v) => v.clone(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        for note in &self.notes {
            s.push_str(&format!("# {note}\n"));
        }
        s
    }

    pub fn to_json(&self, provenance: &str, config: &RunConfig) -> CliResult<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            provenance: &'a str,
            config: &'a RunConfig,
            columns: &'a [&'static str],
            rows: &'a [Vec<Cell>],
            notes: &'a [String],
        }
        let doc = Doc { provenance, config, columns: &self.columns, rows: &self.rows, notes: &self.notes };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    /// Render in the configured format; `extra` holds command-specific options for the provenance line.
    pub fn render(&self, cfg: &RunConfig, extra: &str) -> CliResult<String> {
        let provenance = provenance(cfg, extra);
        match cfg.format {
            Format::Csv => Ok(self.to_csv(&provenance)),
            Format::Json => self.to_json(&provenance, cfg),
        }
    }
}

pub fn provenance(cfg: &RunConfig, extra: &str) -> String {
    if extra.is_empty() {
        cfg.to_string()
    } else {
        format!("{cfg} {extra}")
    }
}

/// Write to the configured output path, or standard output.
pub fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            // a closed reader (e.g. `| head`) is not a failure of the computation
            match lock.write_all(text.as_bytes()).and_then(|_| lock.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}
