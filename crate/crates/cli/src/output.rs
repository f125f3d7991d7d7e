//! CSV, JSON and gnuplot matrix writers. Every file opens with a comment
//! block carrying the tool version and the resolved parameters.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const VERSION: &str = concat!("optomech ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => u8::from(*b).to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// `# `-prefixed block: version line, then the echo text line by line.
pub fn comment_block(echo: &str) -> String {
    let mut out = format!("# {VERSION}\n");
    for line in echo.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, echo: &str) -> String {
        let mut out = comment_block(echo);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Collects output files; nothing is written until [`Writer::flush`], so the
/// set of files on disk depends only on the completed results.
pub struct Writer {
    dir: PathBuf,
    pending: Vec<(PathBuf, String)>,
}

impl Writer {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            pending: Vec::new(),
        }
    }

    pub fn text(&mut self, name: &str, content: String) {
        self.pending.push((self.dir.join(name), content));
    }

    pub fn csv(&mut self, name: &str, table: &Table, echo: &str) {
        self.text(name, table.render(echo));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        s.push('\n');
        self.text(name, s);
        Ok(())
    }

    /// Gnuplot `nonuniform matrix`: first row `n, y_1..y_n`, then `x_i, z_i1..z_in`.
    pub fn matrix(&mut self, name: &str, xs: &[f64], ys: &[f64], z: &[Vec<f64>], echo: &str) {
        let mut out = comment_block(echo);
        let mut first = vec![format!("{}", ys.len())];
        first.extend(ys.iter().map(|y| format!("{y:.16e}")));
        out.push_str(&first.join(" "));
        out.push('\n');
        for (x, row) in xs.iter().zip(z) {
            let mut line = vec![format!("{x:.16e}")];
            line.extend(row.iter().map(|v| format!("{v:.16e}")));
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        self.text(name, out);
    }

    pub fn flush(self) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir)?;
        let mut written = Vec::with_capacity(self.pending.len());
        for (path, content) in self.pending {
            fs::write(&path, content)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_numbers_round_trip() {
        let mut t = Table::new(&["x", "flag"]);
        let v = 0.1 + 0.2;
        t.push(vec![v.into(), true.into()]);
        let s = t.render("[model]\nomega1 = 10");
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# optomech "));
        assert_eq!(lines[1], "# [model]");
        assert_eq!(lines[3], "x,flag");
        let back: f64 = lines[4].split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, v);
    }
}
