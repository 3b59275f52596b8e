//! Noether diagnostics: the energy–momentum divergence and the generalized
//! Hopf differential with its holomorphy defect.

use num_complex::Complex64;

use crate::caratheodory::energy_momentum;
use crate::diffcore::JetSample;
use crate::error::{ensure_finite, Error, Result};
use crate::grid::{Grid, GridField};
use crate::lagrangian::Lagrangian;

/// `f = (H¹₁ − H²₂) − i(H¹₂ + H²₁)` at the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfField {
    grid: Grid,
    values: Vec<Complex64>,
    defined: Vec<bool>,
}

impl HopfField {
    /// A field defined at every node from samples `f(x, y)`.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let (x, y) = grid.point(i, j);
                values.push(f(x, y));
            }
        }
        let flat: Vec<f64> = values.iter().flat_map(|c| [c.re, c.im]).collect();
        ensure_finite(&flat, "Hopf samples")?;
        Ok(HopfField { grid, values, defined: vec![true; grid.len()] })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, i: usize, j: usize) -> Option<Complex64> {
        let k = self.grid.index(i, j);
        self.defined[k].then(|| self.values[k])
    }

    /// Max of `|f|` over defined nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().zip(&self.defined).filter(|(_, d)| **d).fold(0.0, |m, (v, _)| m.max(v.norm()))
    }

    fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    fn margin(&self) -> usize {
        if self.defined.iter().all(|d| *d) {
            1
        } else {
            2
        }
    }
}

fn jet_at(u: &GridField, i: usize, j: usize) -> JetSample {
    let n = u.components();
    let (mut z1, mut z2) = (vec![0.0; n], vec![0.0; n]);
    u.d1(i, j, &mut z1);
    u.d2(i, j, &mut z2);
    JetSample { y: u.at(i, j).to_vec(), z1, z2 }
}

pub fn hopf(lagr: &Lagrangian, u: &GridField) -> Result<HopfField> {
    lagr.check_dim(u.components())?;
    let g = *u.grid();
    let mut values = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut defined = vec![false; g.len()];
    for (i, j) in g.interior() {
        let f = energy_momentum(lagr, &jet_at(u, i, j))?.hopf();
        ensure_finite(&[f.re, f.im], "Hopf differential")?;
        values[g.index(i, j)] = f;
        defined[g.index(i, j)] = true;
    }
    Ok(HopfField { grid: g, values, defined })
}

/// `max |½(∂₁ + i∂₂) f|` by central differences, away from undefined nodes.
pub fn holomorphy_residual(hf: &HopfField) -> Result<f64> {
    let g = hf.grid;
    if g.nx < 5 || g.ny < 5 {
        return Err(Error::GridTooSmall { required: 5, got: g.nx.min(g.ny) });
    }
    let i_unit = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for (i, j) in g.inset(hf.margin()) {
        let d1 = (hf.value(i + 1, j) - hf.value(i - 1, j)) / (2.0 * g.hx);
        let d2 = (hf.value(i, j + 1) - hf.value(i, j - 1)) / (2.0 * g.hy);
        worst = worst.max((0.5 * (d1 + i_unit * d2)).norm());
    }
    Ok(worst)
}

/// `∂H^α_β/∂t^α` for `β = 1, 2`, each a one-component field.
pub fn divergence_residual(lagr: &Lagrangian, u: &GridField) -> Result<[GridField; 2]> {
    lagr.check_dim(u.components())?;
    let g = *u.grid();
    let mut hfield = GridField::zeros(g, 4);
    for (i, j) in g.interior() {
        let h = energy_momentum(lagr, &jet_at(u, i, j))?.h;
        hfield.at_mut(i, j).copy_from_slice(&[h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]]);
    }
    let mut out = [GridField::zeros(g, 1), GridField::zeros(g, 1)];
    let (mut d1, mut d2) = ([0.0; 4], [0.0; 4]);
    for (i, j) in g.inset(2) {
        hfield.d1(i, j, &mut d1);
        hfield.d2(i, j, &mut d2);
        for beta in 0..2 {
            out[beta].at_mut(i, j)[0] = d1[beta] + d2[2 + beta];
        }
    }
    for f in &out {
        ensure_finite(f.values(), "energy-momentum divergence")?;
    }
    Ok(out)
}

/// Max over both components of [`divergence_residual`].
pub fn divergence_max(lagr: &Lagrangian, u: &GridField) -> Result<f64> {
    let [a, b] = divergence_residual(lagr, u)?;
    Ok(a.max_abs().max(b.max_abs()))
}
