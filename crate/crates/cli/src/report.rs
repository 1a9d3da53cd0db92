use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

/// What a subcommand prints: an aligned table, or its JSON form with `--json`.
pub struct Output {
    pub table: String,
    pub json: Value,
}

impl Output {
    pub fn new(table: Table, json: Value) -> Self {
        Output { table: table.render(), json }
    }

    /// Nothing left to print (the command already wrote to stdout).
    pub fn empty() -> Self {
        Output { table: String::new(), json: Value::Null }
    }

    pub fn print(&self, json: bool) -> std::io::Result<()> {
        let text = if json {
            if self.json.is_null() {
                return Ok(());
            }
            serde_json::to_string_pretty(&self.json).expect("JSON values serialize") + "\n"
        } else {
            self.table.clone()
        };
        write_stdout(text.as_bytes())
    }
}

/// Writes to stdout, treating a closed pipe (`krf … | head`) as success.
pub fn write_stdout(bytes: &[u8]) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(bytes).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        self.rows.push(cells);
        self
    }

    pub fn render(&self) -> String {
        let cols = self.header.len();
        let mut width = vec![0; cols];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.header);
        out += &(width.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  ") + "\n");
        for r in &self.rows {
            out += &line(r);
        }
        out
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.4}")
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    krf::harness::atomic_write(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}
