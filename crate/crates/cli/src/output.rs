//! CSV tables and the invariant report.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// CSV with a header row; floats use shortest round-trip formatting and
/// lines end in LF.
#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    text: String,
    columns: usize,
}

#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Table {
            name: name.to_string(),
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns, "row width of {}", self.name);
        let parts: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::F(v) => format!("{v:?}"),
                Cell::I(v) => v.to_string(),
                Cell::S(s) => s,
                Cell::B(b) => b.to_string(),
            })
            .collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    /// Passes when measured <= tolerance.
    pub fn at_most(&mut self, name: &str, measured: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            measured,
            tolerance,
            pass: measured <= tolerance,
            note: "<=".into(),
        });
    }

    /// Passes when measured >= bound.
    pub fn at_least(&mut self, name: &str, measured: f64, bound: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            measured,
            tolerance: bound,
            pass: measured >= bound,
            note: ">=".into(),
        });
    }

    pub fn holds(&mut self, name: &str, ok: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            pass: ok,
            note: "holds".into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self, scenario: &str, seed: u64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {scenario}");
        let _ = writeln!(out, "seed {seed}");
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            if c.note == "holds" {
                let _ = writeln!(out, "{verdict} {}", c.name);
            } else {
                let _ = writeln!(out, "{verdict} {} measured={:e} {} {:e}", c.name, c.measured, c.note, c.tolerance);
            }
        }
        let _ = writeln!(out, "overall {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

pub fn write_all(dir: &Path, tables: &[Table], report: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for t in tables {
        fs::write(dir.join(format!("{}.csv", t.name())), t.text())?;
    }
    fs::write(dir.join("report.txt"), report)
}
