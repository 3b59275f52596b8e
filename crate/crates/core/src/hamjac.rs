//! Hamilton–Jacobi residuals and calibration checks for sampled slope
//! functions in the one-variable, Weyl and Carathéodory theories.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2};

use crate::caratheodory::{cara_hamiltonian, pluecker, CaraMomenta};
use crate::diffcore::{self, central_gradient, JetSample, FD_DELTA};
use crate::error::{ensure_finite, Error, Result};
use crate::lagrangian::Lagrangian;
use crate::newton::{self, Problem};
use crate::weyl::{weyl_hamiltonian_with_point, CotangentSample};

/// Sixth-order central first-derivative weights for offsets `-3..=3`.
const STENCIL: [f64; 7] = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const HALF_WIDTH: usize = 3;

/// A uniform tensor-product grid in any number of dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGrid {
    origin: Vec<f64>,
    step: Vec<f64>,
    count: Vec<usize>,
}

impl ProductGrid {
    /// Axis `k` spans `[ranges[k].0, ranges[k].1]` with `counts[k]` nodes.
    pub fn new(ranges: &[(f64, f64)], counts: &[usize]) -> Result<Self> {
        if ranges.len() != counts.len() || ranges.is_empty() {
            return Err(Error::DimensionMismatch { expected: ranges.len(), got: counts.len() });
        }
        let min = 2 * HALF_WIDTH + 1;
        if let Some(&c) = counts.iter().find(|&&c| c < min) {
            return Err(Error::GridTooSmall { required: min, got: c });
        }
        let mut step = Vec::with_capacity(counts.len());
        for ((a, b), c) in ranges.iter().zip(counts) {
            let h = (b - a) / (*c as f64 - 1.0);
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument("product grid ranges must be increasing".into()));
            }
            step.push(h);
        }
        Ok(ProductGrid { origin: ranges.iter().map(|r| r.0).collect(), step, count: counts.to_vec() })
    }

    pub fn dims(&self) -> usize {
        self.count.len()
    }

    pub fn len(&self) -> usize {
        self.count.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.count).fold(0, |acc, (i, c)| acc * c + i)
    }

    fn unflat(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for d in (0..self.dims()).rev() {
            idx[d] = k % self.count[d];
            k /= self.count[d];
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.origin).zip(&self.step).map(|((i, o), h)| o + *i as f64 * h).collect()
    }

    /// Multi-indices far enough from the boundary for the derivative stencil.
    fn stencil_nodes(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|k| self.unflat(k))
            .filter(|idx| idx.iter().zip(&self.count).all(|(i, c)| *i >= HALF_WIDTH && *i + HALF_WIDTH < *c))
            .collect()
    }
}

/// Sampled `S(x)` with one or more components on a [`ProductGrid`].
///
/// One-variable theory: axes `(t, y)`, one component. Field theories:
/// axes `(t¹, t², y¹, …, yⁿ)`, components `(S¹, S²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFunction {
    grid: ProductGrid,
    components: usize,
    values: Vec<f64>,
}

impl SlopeFunction {
    pub fn sample(grid: ProductGrid, components: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * components);
        for k in 0..grid.len() {
            let v = f(&grid.point(&grid.unflat(k)));
            if v.len() != components {
                return Err(Error::DimensionMismatch { expected: components, got: v.len() });
            }
            values.extend(v);
        }
        ensure_finite(&values, "slope function samples")?;
        Ok(SlopeFunction { grid, components, values })
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// `∂S^c/∂x^axis` at a stencil node.
    fn derivative(&self, idx: &[usize], axis: usize, c: usize) -> f64 {
        let mut probe = idx.to_vec();
        let mut acc = 0.0;
        for (o, w) in STENCIL.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            probe[axis] = idx[axis] + o - HALF_WIDTH;
            acc += w * self.values[self.grid.flat(&probe) * self.components + c];
        }
        acc / self.grid.step[axis]
    }
}

/// Values attached to the nodes where a residual was evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl NodeField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Outcome of a calibration spot check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationReport {
    /// Minimum over nodes and sampled `z` of `L − (the S-derived expression)`.
    pub min_slack: f64,
    /// Max over nodes of the same difference at the extracted slope.
    pub equality_gap: f64,
}

type Scalar3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A one-variable Lagrangian `L(t, y, z)`.
#[derive(Clone)]
pub struct Lagrangian1d {
    value: Scalar3,
    dz: Option<Scalar3>,
    dzz: Option<Scalar3>,
}

impl fmt::Debug for Lagrangian1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lagrangian1d").field("analytic_dz", &self.dz.is_some()).finish()
    }
}

impl Lagrangian1d {
    pub fn new(value: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Lagrangian1d { value: Arc::new(value), dz: None, dzz: None }
    }

    pub fn with_derivatives(
        value: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        dz: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        dzz: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Lagrangian1d { value: Arc::new(value), dz: Some(Arc::new(dz)), dzz: Some(Arc::new(dzz)) }
    }

    /// `L = ½z²`.
    pub fn quadratic() -> Self {
        Self::with_derivatives(|_, _, z| 0.5 * z * z, |_, _, z| z, |_, _, _| 1.0)
    }

    pub fn value(&self, t: f64, y: f64, z: f64) -> f64 {
        (self.value)(t, y, z)
    }

    fn dz(&self, t: f64, y: f64, z: f64) -> f64 {
        match &self.dz {
            Some(f) => f(t, y, z),
            None => central_gradient(|x| self.value(t, y, x[0]), &[z], FD_DELTA)[0],
        }
    }

    fn dzz(&self, t: f64, y: f64, z: f64) -> f64 {
        match &self.dzz {
            Some(f) => f(t, y, z),
            None => {
                let h = diffcore::FD_DELTA_NESTED * z.abs().max(1.0);
                (self.dz(t, y, z + h) - self.dz(t, y, z - h)) / (2.0 * h)
            }
        }
    }

    /// `(ψ, H)` with `∂L/∂z(t, y, ψ) = p` and `H = pψ − L(t, y, ψ)`.
    pub fn hamiltonian(&self, t: f64, y: f64, p: f64) -> Result<(f64, f64)> {
        struct Legendre1d<'a>(&'a Lagrangian1d, f64, f64, f64);
        impl Problem for Legendre1d<'_> {
            fn gradient(&self, x: &[f64]) -> Vec<f64> {
                vec![self.0.dz(self.1, self.2, x[0]) - self.3]
            }
            fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
                DMatrix::from_element(1, 1, self.0.dzz(self.1, self.2, x[0]))
            }
            fn objective(&self, x: &[f64]) -> Option<f64> {
                Some(self.0.value(self.1, self.2, x[0]) - self.3 * x[0])
            }
        }
        let out = newton::solve(&Legendre1d(self, t, y, p), vec![p], 1e-12 * (1.0 + p.abs()))?;
        let psi = out.x[0];
        Ok((psi, p * psi - self.value(t, y, psi)))
    }
}

fn expect_layout(s: &SlopeFunction, dims: usize, components: usize) -> Result<()> {
    if s.grid.dims() != dims {
        return Err(Error::DimensionMismatch { expected: dims, got: s.grid.dims() });
    }
    if s.components != components {
        return Err(Error::DimensionMismatch { expected: components, got: s.components });
    }
    Ok(())
}

/// `H(t, y, ∂S/∂y) + ∂S/∂t` at stencil nodes of a `(t, y)` grid.
pub fn hj_residual_1d(l: &Lagrangian1d, s: &SlopeFunction) -> Result<NodeField> {
    expect_layout(s, 2, 1)?;
    let mut out = NodeField { points: Vec::new(), values: Vec::new() };
    for idx in s.grid.stencil_nodes() {
        let x = s.grid.point(&idx);
        let (_, h) = l.hamiltonian(x[0], x[1], s.derivative(&idx, 1, 0))?;
        out.values.push(h + s.derivative(&idx, 0, 0));
        out.points.push(x);
    }
    ensure_finite(&out.values, "1-d Hamilton-Jacobi residual")?;
    Ok(out)
}

/// Slope field `ψ(t, y)` solving `∂L/∂z(t, y, ψ) = ∂S/∂y`.
pub fn mayer_field_1d(l: &Lagrangian1d, s: &SlopeFunction) -> Result<NodeField> {
    expect_layout(s, 2, 1)?;
    let mut out = NodeField { points: Vec::new(), values: Vec::new() };
    for idx in s.grid.stencil_nodes() {
        let x = s.grid.point(&idx);
        let (psi, _) = l.hamiltonian(x[0], x[1], s.derivative(&idx, 1, 0))?;
        out.values.push(psi);
        out.points.push(x);
    }
    Ok(out)
}

/// `L(t, y, z) − (∂S/∂y·z + ∂S/∂t)` over the sampled `z` and at `z = ψ`.
pub fn calibration_1d(l: &Lagrangian1d, s: &SlopeFunction, zs: &[f64]) -> Result<CalibrationReport> {
    expect_layout(s, 2, 1)?;
    let mut rep = CalibrationReport { min_slack: f64::INFINITY, equality_gap: 0.0 };
    for idx in s.grid.stencil_nodes() {
        let x = s.grid.point(&idx);
        let (sy, st) = (s.derivative(&idx, 1, 0), s.derivative(&idx, 0, 0));
        let slack = |z: f64| l.value(x[0], x[1], z) - (sy * z + st);
        for z in zs {
            rep.min_slack = rep.min_slack.min(slack(*z));
        }
        let (psi, _) = l.hamiltonian(x[0], x[1], sy)?;
        rep.equality_gap = rep.equality_gap.max(slack(psi).abs());
    }
    Ok(rep)
}

struct FieldJet {
    point: Vec<f64>,
    y: Vec<f64>,
    /// Row `α`: `∂S^α/∂yʲ`.
    pi: DMatrix<f64>,
    /// `(α, β)`: `∂S^α/∂t^β`.
    eps: Matrix2<f64>,
}

fn field_jets(lagr: &Lagrangian, s: &SlopeFunction) -> Result<Vec<FieldJet>> {
    let n = lagr.dim();
    expect_layout(s, n + 2, 2)?;
    Ok(s.grid
        .stencil_nodes()
        .into_iter()
        .map(|idx| {
            let point = s.grid.point(&idx);
            let pi = DMatrix::from_fn(2, n, |a, j| s.derivative(&idx, 2 + j, a));
            let eps = Matrix2::from_fn(|a, b| s.derivative(&idx, b, a));
            FieldJet { y: point[2..].to_vec(), point, pi, eps }
        })
        .collect())
}

fn weyl_momentum(fj: &FieldJet) -> CotangentSample {
    CotangentSample {
        y: fj.y.clone(),
        p1: fj.pi.row(0).iter().copied().collect(),
        p2: fj.pi.row(1).iter().copied().collect(),
    }
}

/// `H(y, p) + ∂S¹/∂t¹ + ∂S²/∂t²` with `p_j = ∂S¹/∂yʲ + i ∂S²/∂yʲ`.
pub fn hj_residual_weyl(lagr: &Lagrangian, s: &SlopeFunction) -> Result<NodeField> {
    let mut out = NodeField { points: Vec::new(), values: Vec::new() };
    for fj in field_jets(lagr, s)? {
        let (_, h) = weyl_hamiltonian_with_point(lagr, &weyl_momentum(&fj))?;
        out.values.push(h + fj.eps.trace());
        out.points.push(fj.point);
    }
    ensure_finite(&out.values, "Weyl Hamilton-Jacobi residual")?;
    Ok(out)
}

/// `F(y, z) − (∂S^α/∂yʲ z^j_α + ∂S^α/∂t^α)` over sampled `z` and at `z = Ψ`.
pub fn calibration_weyl(lagr: &Lagrangian, s: &SlopeFunction, zs: &[(Vec<f64>, Vec<f64>)]) -> Result<CalibrationReport> {
    let mut rep = CalibrationReport { min_slack: f64::INFINITY, equality_gap: 0.0 };
    for fj in field_jets(lagr, s)? {
        let p = weyl_momentum(&fj);
        let div = fj.eps.trace();
        let slack = |z1: &[f64], z2: &[f64]| {
            let pz: f64 = p.p1.iter().zip(z1).chain(p.p2.iter().zip(z2)).map(|(a, b)| a * b).sum();
            lagr.value_at(&fj.y, z1, z2) - pz - div
        };
        for (z1, z2) in zs {
            rep.min_slack = rep.min_slack.min(slack(z1, z2));
        }
        let (psi, _) = weyl_hamiltonian_with_point(lagr, &p)?;
        rep.equality_gap = rep.equality_gap.max(slack(&psi.z1, &psi.z2).abs());
    }
    Ok(rep)
}

/// `𝓗(y, A)` with `π^α_j = ∂S^α/∂yʲ`, `ε^α_β = ∂S^α/∂t^β`.
pub fn hj_residual_cara(lagr: &Lagrangian, s: &SlopeFunction) -> Result<NodeField> {
    let mut out = NodeField { points: Vec::new(), values: Vec::new() };
    for fj in field_jets(lagr, s)? {
        let m = CaraMomenta::new(fj.eps, fj.pi.clone())?;
        let sol = cara_hamiltonian(lagr, &fj.y, &pluecker(&m))?;
        out.values.push(sol.hamiltonian);
        out.points.push(fj.point);
    }
    ensure_finite(&out.values, "Carathéodory Hamilton-Jacobi residual")?;
    Ok(out)
}

/// `F(y, z) − det(πZ + ε)` over sampled `z` and at `z = 𝒵`.
pub fn calibration_cara(lagr: &Lagrangian, s: &SlopeFunction, zs: &[(Vec<f64>, Vec<f64>)]) -> Result<CalibrationReport> {
    let mut rep = CalibrationReport { min_slack: f64::INFINITY, equality_gap: 0.0 };
    for fj in field_jets(lagr, s)? {
        let m = CaraMomenta::new(fj.eps, fj.pi.clone())?;
        let slack = |z1: &[f64], z2: &[f64]| lagr.value_at(&fj.y, z1, z2) - m.matrix(z1, z2).determinant();
        for (z1, z2) in zs {
            rep.min_slack = rep.min_slack.min(slack(z1, z2));
        }
        let sol = cara_hamiltonian(lagr, &fj.y, &pluecker(&m))?;
        let JetSample { z1, z2, .. } = &sol.z;
        rep.equality_gap = rep.equality_gap.max(slack(z1, z2).abs());
    }
    Ok(rep)
}
