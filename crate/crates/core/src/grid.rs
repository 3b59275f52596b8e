//! Uniform rectangular grids and vector fields sampled on them.

use crate::error::{Error, Result};

/// Nodes `(x0 + i·hx, y0 + j·hy)` for `i < nx`, `j < ny`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, hx: f64, hy: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::GridTooSmall { required: 3, got: nx.min(ny) });
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite() && x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidArgument("grid spacings must be positive and finite".into()));
        }
        Ok(Grid { nx, ny, x0, y0, hx, hy })
    }

    /// `[x_min, x_max] × [y_min, y_max]` split into `cells_x × cells_y` cells.
    pub fn rect(cells_x: usize, cells_y: usize, x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if cells_x < 2 || cells_y < 2 {
            return Err(Error::GridTooSmall { required: 3, got: cells_x.min(cells_y) + 1 });
        }
        Self::new(
            cells_x + 1,
            cells_y + 1,
            x.0,
            y.0,
            (x.1 - x.0) / cells_x as f64,
            (y.1 - y.0) / cells_y as f64,
        )
    }

    pub fn unit_square(cells: usize) -> Result<Self> {
        Self::rect(cells, cells, (0.0, 1.0), (0.0, 1.0))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.hx, self.y0 + j as f64 * self.hy)
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Interior nodes `1 ≤ i ≤ nx−2`, `1 ≤ j ≤ ny−2`, in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.inset(1)
    }

    /// Nodes at distance at least `margin` from the boundary.
    pub fn inset(&self, margin: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (nx, ny) = (self.nx, self.ny);
        (margin..nx.saturating_sub(margin)).flat_map(move |i| (margin..ny.saturating_sub(margin)).map(move |j| (i, j)))
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        self.nx == other.nx
            && self.ny == other.ny
            && close(self.x0, other.x0)
            && close(self.y0, other.y0)
            && close(self.hx, other.hx)
            && close(self.hy, other.hy)
    }
}

/// An `ℝⁿ`-valued field on a [`Grid`], with a mask of fixed nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    n: usize,
    values: Vec<f64>,
    fixed: Vec<bool>,
}

impl GridField {
    /// Zero field; the fixed mask is the boundary ring.
    pub fn zeros(grid: Grid, n: usize) -> Self {
        let mut fixed = vec![false; grid.len()];
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                fixed[grid.index(i, j)] = grid.is_boundary(i, j);
            }
        }
        GridField { grid, n, values: vec![0.0; grid.len() * n], fixed }
    }

    pub fn from_fn(grid: Grid, n: usize, mut f: impl FnMut(f64, f64) -> Vec<f64>) -> Self {
        let mut out = Self::zeros(grid, n);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let (x, y) = grid.point(i, j);
                let v = f(x, y);
                out.at_mut(i, j).copy_from_slice(&v[..n]);
            }
        }
        out
    }

    pub fn from_values(grid: Grid, n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() * n {
            return Err(Error::DimensionMismatch { expected: grid.len() * n, got: values.len() });
        }
        let mut out = Self::zeros(grid, n);
        out.values = values;
        Ok(out)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, j: usize) -> &[f64] {
        let s = self.grid.index(i, j) * self.n;
        &self.values[s..s + self.n]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let s = self.grid.index(i, j) * self.n;
        &mut self.values[s..s + self.n]
    }

    pub fn is_fixed(&self, i: usize, j: usize) -> bool {
        self.fixed[self.grid.index(i, j)]
    }

    pub fn fixed_mask(&self) -> &[bool] {
        &self.fixed
    }

    pub fn set_fixed(&mut self, i: usize, j: usize, fixed: bool) {
        let k = self.grid.index(i, j);
        self.fixed[k] = fixed;
    }

    /// Central difference `∂₁u` at an interior node.
    pub fn d1(&self, i: usize, j: usize, out: &mut [f64]) {
        let (p, m) = (self.at(i + 1, j), self.at(i - 1, j));
        let s = 0.5 / self.grid.hx;
        for k in 0..self.n {
            out[k] = (p[k] - m[k]) * s;
        }
    }

    /// Central difference `∂₂u` at an interior node.
    pub fn d2(&self, i: usize, j: usize, out: &mut [f64]) {
        let (p, m) = (self.at(i, j + 1), self.at(i, j - 1));
        let s = 0.5 / self.grid.hy;
        for k in 0..self.n {
            out[k] = (p[k] - m[k]) * s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm of the difference of two fields on the same grid.
    pub fn max_diff(&self, other: &GridField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn check_compatible(&self, other: &GridField) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch { reason: "grid geometry differs".into() });
        }
        if self.n != other.n {
            return Err(Error::GridMismatch {
                reason: format!("component count {} vs {}", self.n, other.n),
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch { reason: "grid geometry differs".into() });
        }
        Ok(())
    }

    /// Transfinite (Coons) interpolation of the boundary ring into the interior.
    pub fn coons_fill(&self) -> GridField {
        let g = self.grid;
        let (nx, ny) = (g.nx - 1, g.ny - 1);
        let mut out = self.clone();
        for i in 1..nx {
            for j in 1..ny {
                let s = i as f64 / nx as f64;
                let t = j as f64 / ny as f64;
                for k in 0..self.n {
                    let left = self.at(0, j)[k];
                    let right = self.at(nx, j)[k];
                    let bottom = self.at(i, 0)[k];
                    let top = self.at(i, ny)[k];
                    let c00 = self.at(0, 0)[k];
                    let c10 = self.at(nx, 0)[k];
                    let c01 = self.at(0, ny)[k];
                    let c11 = self.at(nx, ny)[k];
                    let lin = (1.0 - s) * left + s * right + (1.0 - t) * bottom + t * top;
                    let bil = (1.0 - s) * (1.0 - t) * c00 + s * (1.0 - t) * c10 + (1.0 - s) * t * c01 + s * t * c11;
                    out.at_mut(i, j)[k] = lin - bil;
                }
            }
        }
        out
    }

    /// Copies the values at fixed nodes of `self` into `target`.
    pub fn impose_fixed_on(&self, target: &mut GridField) -> Result<()> {
        self.check_compatible(target)?;
        for (idx, fixed) in self.fixed.iter().enumerate() {
            if *fixed {
                let s = idx * self.n;
                target.values[s..s + self.n].copy_from_slice(&self.values[s..s + self.n]);
            }
            target.fixed[idx] = *fixed;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_validation() {
        assert!(Grid::new(2, 5, 0.0, 0.0, 0.1, 0.1).is_err());
        assert!(Grid::new(5, 5, 0.0, 0.0, -0.1, 0.1).is_err());
        let g = Grid::unit_square(4).unwrap();
        assert_eq!((g.nx, g.ny, g.hx), (5, 5, 0.25));
        assert_eq!(g.interior().count(), 9);
    }

    #[test]
    fn coons_reproduces_bilinear_fields() {
        let g = Grid::unit_square(6).unwrap();
        let exact = GridField::from_fn(g, 1, |x, y| vec![1.0 + 2.0 * x - y + 3.0 * x * y]);
        let mut boundary = exact.clone();
        for (i, j) in g.interior() {
            boundary.at_mut(i, j)[0] = 0.0;
        }
        assert!(boundary.coons_fill().max_diff(&exact).unwrap() < 1e-14);
    }

    #[test]
    fn central_differences_exact_on_quadratics() {
        let g = Grid::unit_square(8).unwrap();
        let f = GridField::from_fn(g, 1, |x, y| vec![x * x - y * y]);
        let (mut a, mut b) = ([0.0], [0.0]);
        f.d1(3, 4, &mut a);
        f.d2(3, 4, &mut b);
        let (x, y) = g.point(3, 4);
        assert!((a[0] - 2.0 * x).abs() < 1e-13 && (b[0] + 2.0 * y).abs() < 1e-13);
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = GridField::zeros(Grid::unit_square(4).unwrap(), 2);
        let b = GridField::zeros(Grid::unit_square(5).unwrap(), 2);
        assert!(matches!(a.max_diff(&b), Err(Error::GridMismatch { .. })));
    }
}
