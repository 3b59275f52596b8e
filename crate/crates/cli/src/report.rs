//! Human-readable check report.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// True when the check requires `value ≥ bound` (negative controls).
    pub lower: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    title: String,
    checks: Vec<CheckLine>,
    notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    /// Passes when `value ≤ tol`; a NaN value fails.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, tol: f64) -> bool {
        self.push(name.into(), value, tol, false, value <= tol)
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) -> bool {
        self.push(name.into(), value, bound, true, value >= bound)
    }

    fn push(&mut self, name: String, value: f64, bound: f64, lower: bool, passed: bool) -> bool {
        self.checks.push(CheckLine { name, value, bound, lower, passed });
        passed
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn checks(&self) -> &[CheckLine] {
        &self.checks
    }

    pub fn check(&self, name: &str) -> Option<&CheckLine> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_to(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "== {}", self.title)?;
        for n in &self.notes {
            writeln!(out, "   {n}")?;
        }
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let op = if c.lower { ">=" } else { "<=" };
            writeln!(out, "{tag} {:<28} {:.3e} {op} {:.1e}", c.name, c.value, c.bound)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(out, "{} checks, {} failed", self.checks.len(), failed)
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|_| std::fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}
