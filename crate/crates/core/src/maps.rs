//! Closed-form maps `Ω ⊂ ℝ² → ℝⁿ` used as boundary data and benchmarks.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::sampling;

#[derive(Debug, Clone, PartialEq)]
pub enum PlaneMap {
    Constant(Vec<f64>),
    /// `u(t) = t`.
    Identity,
    /// `u = (Re f, Im f)` for a complex polynomial `f = Σ c_k t^k`.
    Holomorphic(Vec<Complex64>),
    /// `u = (x² − y², xy)`: harmonic, not conformal.
    HarmonicQuadratic,
    /// `u = (eˣ cos y, eʸ cos x)`: harmonic, not conformal.
    ExpHarmonic,
    /// `u = offset + M t` with `M` given as `n` rows `[m_{k1}, m_{k2}]`.
    Linear { matrix: Vec<[f64; 2]>, offset: Vec<f64> },
}

impl PlaneMap {
    pub fn dim(&self) -> usize {
        match self {
            PlaneMap::Constant(c) => c.len(),
            PlaneMap::Linear { matrix, .. } => matrix.len(),
            _ => 2,
        }
    }

    /// Sphere-chart benchmark `f(t) = 0.8t + 0.3t²`.
    pub fn sphere_benchmark() -> Self {
        PlaneMap::Holomorphic(vec![Complex64::new(0.0, 0.0), Complex64::new(0.8, 0.0), Complex64::new(0.3, 0.0)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PlaneMap::Linear { matrix, offset } if matrix.len() != offset.len() => {
                Err(Error::DimensionMismatch { expected: matrix.len(), got: offset.len() })
            }
            PlaneMap::Constant(c) if c.is_empty() => Err(Error::InvalidArgument("constant map needs n ≥ 1".into())),
            PlaneMap::Holomorphic(c) if c.is_empty() => {
                Err(Error::InvalidArgument("holomorphic map needs a coefficient".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Vec<f64> {
        match self {
            PlaneMap::Constant(c) => c.clone(),
            PlaneMap::Identity => vec![x, y],
            PlaneMap::Holomorphic(c) => {
                let t = Complex64::new(x, y);
                let f = c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, ck| acc * t + ck);
                vec![f.re, f.im]
            }
            PlaneMap::HarmonicQuadratic => vec![x * x - y * y, x * y],
            PlaneMap::ExpHarmonic => vec![x.exp() * y.cos(), y.exp() * x.cos()],
            PlaneMap::Linear { matrix, offset } => {
                matrix.iter().zip(offset).map(|(m, o)| o + m[0] * x + m[1] * y).collect()
            }
        }
    }

    /// `(∂₁u, ∂₂u)`.
    pub fn jacobian(&self, x: f64, y: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            PlaneMap::Constant(c) => (vec![0.0; c.len()], vec![0.0; c.len()]),
            PlaneMap::Identity => (vec![1.0, 0.0], vec![0.0, 1.0]),
            PlaneMap::Holomorphic(c) => {
                let t = Complex64::new(x, y);
                let mut d = Complex64::new(0.0, 0.0);
                for (k, ck) in c.iter().enumerate().skip(1).rev() {
                    d = d * t + ck * k as f64;
                }
                (vec![d.re, d.im], vec![-d.im, d.re])
            }
            PlaneMap::HarmonicQuadratic => (vec![2.0 * x, y], vec![-2.0 * y, x]),
            PlaneMap::ExpHarmonic => (
                vec![x.exp() * y.cos(), -y.exp() * x.sin()],
                vec![-x.exp() * y.sin(), y.exp() * x.cos()],
            ),
            PlaneMap::Linear { matrix, .. } => {
                (matrix.iter().map(|m| m[0]).collect(), matrix.iter().map(|m| m[1]).collect())
            }
        }
    }

    pub fn sample(&self, grid: Grid) -> GridField {
        GridField::from_fn(grid, self.dim(), |x, y| self.eval(x, y))
    }
}

/// Uniform noise in `[-amplitude, amplitude]` at every node.
pub fn noise_field(grid: Grid, n: usize, amplitude: f64, seed: u64) -> GridField {
    let mut r = sampling::rng(seed);
    GridField::from_fn(grid, n, |_, _| (0..n).map(|_| r.gen_range(-amplitude..=amplitude)).collect())
}
