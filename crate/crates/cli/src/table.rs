//! Numeric CSV tables with a fixed 17-significant-digit format.

use std::path::Path;

use cfinsler_core::{Grid, GridField};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// `prefix1..prefixN`.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

/// `prefix_11, prefix_12, …` for an `r × c` matrix in row-major order.
pub fn matrix_names(prefix: &str, r: usize, c: usize) -> Vec<String> {
    (1..=r).flat_map(|i| (1..=c).map(move |j| format!("{prefix}_{i}{j}"))).collect()
}

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, CliError> {
        self.column(name).ok_or_else(|| CliError::Input(format!("missing column `{name}`")))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_number(*v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| CliError::Input(format!("{}: record {}: `{s}` is not a number", path.display(), line + 1))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    /// Columns `x, y, u1..un` for every node.
    pub fn from_field(u: &GridField, prefix: &str) -> Self {
        let g = u.grid();
        let n = u.components();
        let mut header = vec!["x".to_owned(), "y".to_owned()];
        header.extend(numbered(prefix, n));
        let mut t = Table::new(header);
        for i in 0..g.nx {
            for j in 0..g.ny {
                let (x, y) = g.point(i, j);
                let mut row = vec![x, y];
                row.extend_from_slice(u.at(i, j));
                t.push(row);
            }
        }
        t
    }

    /// Inverse of [`Table::from_field`] on a known grid: every node must
    /// appear exactly once, in any order.
    pub fn to_field(&self, grid: Grid, n: usize, prefix: &str) -> Result<GridField, CliError> {
        let (cx, cy) = (self.require("x")?, self.require("y")?);
        let cols = numbered(prefix, n).iter().map(|c| self.require(c)).collect::<Result<Vec<_>, _>>()?;
        let mut u = GridField::zeros(grid, n);
        let mut seen = vec![false; grid.len()];
        let tol = 1e-9 * (1.0 + grid.hx.max(grid.hy));
        for row in &self.rows {
            let (x, y) = (row[cx], row[cy]);
            let (x0, y0) = grid.point(0, 0);
            let fi = (x - x0) / grid.hx;
            let fj = (y - y0) / grid.hy;
            let (i, j) = (fi.round(), fj.round());
            if i < 0.0 || j < 0.0 || i as usize >= grid.nx || j as usize >= grid.ny {
                return Err(CliError::Input(format!("node ({x}, {y}) lies outside the grid")));
            }
            let (i, j) = (i as usize, j as usize);
            let (px, py) = grid.point(i, j);
            if (px - x).abs() > tol || (py - y).abs() > tol {
                return Err(CliError::Input(format!("({x}, {y}) is not a grid node")));
            }
            let k = grid.index(i, j);
            if std::mem::replace(&mut seen[k], true) {
                return Err(CliError::Input(format!("node ({x}, {y}) appears twice")));
            }
            for (c, col) in cols.iter().enumerate() {
                u.at_mut(i, j)[c] = row[*col];
            }
        }
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                if !seen[grid.index(i, j)] {
                    let (x, y) = grid.point(i, j);
                    return Err(CliError::Input(format!("node ({x}, {y}) is missing")));
                }
            }
        }
        Ok(u)
    }
}
