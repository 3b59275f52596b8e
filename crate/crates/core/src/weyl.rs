//! Weyl theory: the Legendre correspondence `z ↔ p = 2∂F/∂z̄`, the
//! Hamiltonian `H(y, p)` and residuals of the generalized Hamilton equations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::diffcore::{self, JetSample};
use crate::error::{ensure_finite, Error, Result};
use crate::grid::GridField;
use crate::lagrangian::Lagrangian;
use crate::linalg::max_abs;
use crate::newton::{self, Problem};

/// A point `(y, p = p¹ + i p²)` of the complexified cotangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentSample {
    pub y: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl CotangentSample {
    pub fn new(y: Vec<f64>, p1: Vec<f64>, p2: Vec<f64>) -> Result<Self> {
        let n = y.len();
        for v in [&p1, &p2] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        ensure_finite(&y, "cotangent y")?;
        ensure_finite(&p1, "cotangent p1")?;
        ensure_finite(&p2, "cotangent p2")?;
        Ok(CotangentSample { y, p1, p2 })
    }

    pub fn from_complex(y: Vec<f64>, p: &[Complex64]) -> Result<Self> {
        Self::new(y, p.iter().map(|c| c.re).collect(), p.iter().map(|c| c.im).collect())
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> Vec<Complex64> {
        self.p1.iter().zip(&self.p2).map(|(a, b)| Complex64::new(*a, *b)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.p1.iter().chain(&self.p2).all(|v| *v == 0.0)
    }

    pub fn scaled(&self, lambda: Complex64) -> CotangentSample {
        let (a, b) = (lambda.re, lambda.im);
        CotangentSample {
            y: self.y.clone(),
            p1: self.p1.iter().zip(&self.p2).map(|(x, y)| a * x - b * y).collect(),
            p2: self.p1.iter().zip(&self.p2).map(|(x, y)| b * x + a * y).collect(),
        }
    }
}

/// `p¹_j = ∂F/∂z₁ʲ`, `p²_j = ∂F/∂z₂ʲ`.
pub fn legendre_forward(lagr: &Lagrangian, s: &JetSample) -> Result<CotangentSample> {
    lagr.check_dim(s.dim())?;
    let n = s.dim();
    if s.is_zero() {
        return Ok(CotangentSample { y: s.y.clone(), p1: vec![0.0; n], p2: vec![0.0; n] });
    }
    let j = diffcore::eval_first(lagr, s)?;
    Ok(CotangentSample {
        y: s.y.clone(),
        p1: j.dfdz.row(0).iter().copied().collect(),
        p2: j.dfdz.row(1).iter().copied().collect(),
    })
}

/// `z ↦ F(y, z) − p·z`, strictly convex under ellipticity.
struct LegendreObjective<'a> {
    lagr: &'a Lagrangian,
    y: &'a [f64],
    p: Vec<f64>,
}

impl Problem for LegendreObjective<'_> {
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.y.len();
        let (mut g, _) = diffcore::grad_z_flat(self.lagr, self.y, &x[..n], &x[n..]);
        for (gi, pi) in g.iter_mut().zip(&self.p) {
            *gi -= pi;
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.y.len();
        let raw = diffcore::hessian_z_raw(self.lagr, self.y, &x[..n], &x[n..]);
        let m = DMatrix::from_row_slice(2 * n, 2 * n, &raw);
        (&m + m.transpose()) * 0.5
    }

    fn objective(&self, x: &[f64]) -> Option<f64> {
        let n = self.y.len();
        let lin: f64 = x.iter().zip(&self.p).map(|(a, b)| a * b).sum();
        Some(self.lagr.value_at(self.y, &x[..n], &x[n..]) - lin)
    }
}

/// Tolerance on `‖∂F/∂z − p‖_∞` used by the Legendre inversion.
pub(crate) fn legendre_tolerance(p: &[f64]) -> f64 {
    1e-12 * (1.0 + max_abs(p))
}

/// `z = Ψ(y, p)` by Newton on `∂F/∂z = p` starting from `z = p`.
pub fn legendre_inverse(lagr: &Lagrangian, c: &CotangentSample) -> Result<JetSample> {
    lagr.check_dim(c.dim())?;
    let n = c.dim();
    if c.is_zero() {
        return Ok(JetSample { y: c.y.clone(), z1: vec![0.0; n], z2: vec![0.0; n] });
    }
    let p: Vec<f64> = c.p1.iter().chain(&c.p2).copied().collect();
    let tol = legendre_tolerance(&p);
    let problem = LegendreObjective { lagr, y: &c.y, p: p.clone() };
    let out = newton::solve(&problem, p, tol)?;
    log::trace!("legendre inverse: {} iterations, residual {:.3e}", out.iterations, out.residual);
    JetSample::new(c.y.clone(), out.x[..n].to_vec(), out.x[n..].to_vec())
}

fn complex_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Residuals of `∂F/∂z̄(y, λz) = λ ∂F/∂z̄(y, z)` and `Ψ(y, λp) = λΨ(y, p)`.
pub fn check_equivariance(lagr: &Lagrangian, s: &JetSample, lambda: Complex64) -> Result<(f64, f64)> {
    if s.is_zero() || lambda.norm() == 0.0 {
        return Err(Error::InvalidArgument("equivariance check requires z ≠ 0 and λ ≠ 0".into()));
    }
    let p = legendre_forward(lagr, s)?;
    let p_scaled = legendre_forward(lagr, &s.scaled(lambda))?;
    let lp: Vec<Complex64> = p.p().iter().map(|v| v * lambda).collect();
    let r1 = complex_dist(&p_scaled.p(), &lp);

    let psi = legendre_inverse(lagr, &p)?;
    let psi_scaled = legendre_inverse(lagr, &p.scaled(lambda))?;
    let lz: Vec<Complex64> = psi.z().iter().map(|v| v * lambda).collect();
    let r2 = complex_dist(&psi_scaled.z(), &lz);
    Ok((r1, r2))
}

/// `H(y, p) = p^α_j ψ^j_α − F(y, Ψ(y, p))` together with `Ψ(y, p)`.
pub fn weyl_hamiltonian_with_point(lagr: &Lagrangian, c: &CotangentSample) -> Result<(JetSample, f64)> {
    let z = legendre_inverse(lagr, c)?;
    let pz: f64 = c.p1.iter().zip(&z.z1).chain(c.p2.iter().zip(&z.z2)).map(|(a, b)| a * b).sum();
    let h = pz - lagr.value(&z);
    ensure_finite(&[h], "Weyl Hamiltonian")?;
    Ok((z, h))
}

pub fn weyl_hamiltonian(lagr: &Lagrangian, c: &CotangentSample) -> Result<f64> {
    weyl_hamiltonian_with_point(lagr, c).map(|(_, h)| h)
}

/// Residual fields of the generalized Hamilton equations on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonResidual {
    /// `∂u/∂t^α − ∂H/∂p^α` for `α = 1, 2`.
    pub velocity: [GridField; 2],
    /// `∂₁p¹ + ∂₂p² + ∂H/∂y`.
    pub momentum: GridField,
    /// `∂₁(∂H/∂p²) − ∂₂(∂H/∂p¹)`.
    pub compatibility: GridField,
}

impl HamiltonResidual {
    pub fn max_abs(&self) -> f64 {
        self.velocity[0]
            .max_abs()
            .max(self.velocity[1].max_abs())
            .max(self.momentum.max_abs())
            .max(self.compatibility.max_abs())
    }
}

/// Interior-point residuals of the Hamilton system for `(u, p¹, p²)`.
///
/// `∂H/∂p^α_j = ψ^j_α` and `∂H/∂y = −∂F/∂y(y, Ψ)` by the envelope identity.
pub fn hamilton_residual(lagr: &Lagrangian, u: &GridField, p1: &GridField, p2: &GridField) -> Result<HamiltonResidual> {
    let n = lagr.dim();
    for f in [p1, p2] {
        u.check_same_grid(f)?;
    }
    for f in [u, p1, p2] {
        if f.components() != n {
            return Err(Error::GridMismatch { reason: format!("expected {n} components, got {}", f.components()) });
        }
    }
    let g = *u.grid();
    let mut psi1 = GridField::zeros(g, n);
    let mut psi2 = GridField::zeros(g, n);
    let mut v1 = GridField::zeros(g, n);
    let mut v2 = GridField::zeros(g, n);
    let mut mom = GridField::zeros(g, n);
    let mut compat = GridField::zeros(g, n);
    let (mut du, mut dp) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let c = CotangentSample::new(u.at(i, j).to_vec(), p1.at(i, j).to_vec(), p2.at(i, j).to_vec())?;
            let z = legendre_inverse(lagr, &c)?;
            psi1.at_mut(i, j).copy_from_slice(&z.z1);
            psi2.at_mut(i, j).copy_from_slice(&z.z2);
        }
    }
    for (i, j) in g.interior() {
        let z = JetSample { y: u.at(i, j).to_vec(), z1: psi1.at(i, j).to_vec(), z2: psi2.at(i, j).to_vec() };
        u.d1(i, j, &mut du);
        for k in 0..n {
            v1.at_mut(i, j)[k] = du[k] - z.z1[k];
        }
        u.d2(i, j, &mut du);
        for k in 0..n {
            v2.at_mut(i, j)[k] = du[k] - z.z2[k];
        }
        let dfdy = diffcore::grad_y_vec(lagr, &z.y, &z.z1, &z.z2);
        p1.d1(i, j, &mut du);
        p2.d2(i, j, &mut dp);
        for k in 0..n {
            mom.at_mut(i, j)[k] = du[k] + dp[k] - dfdy[k];
        }
        psi2.d1(i, j, &mut du);
        psi1.d2(i, j, &mut dp);
        for k in 0..n {
            compat.at_mut(i, j)[k] = du[k] - dp[k];
        }
    }
    let all = [v1.values(), v2.values(), mom.values(), compat.values()].concat();
    ensure_finite(&all, "Hamilton residual")?;
    Ok(HamiltonResidual { velocity: [v1, v2], momentum: mom, compatibility: compat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::lagrangian::{MetricField, TwoForm};
    use crate::linalg::{complex_solve, hermitian_from_parts, to_complex};
    use approx::assert_abs_diff_eq;

    fn herm() -> Lagrangian {
        Lagrangian::hermitian(2, MetricField::Constant(DMatrix::identity(2, 2)), TwoForm::planar(2, 0.5))
    }

    #[test]
    fn flat_correspondence_is_identity() {
        let l = Lagrangian::flat(2);
        let s = JetSample::new(vec![0.0; 2], vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let p = legendre_forward(&l, &s).unwrap();
        assert_eq!((p.p1.clone(), p.p2.clone()), (vec![1.0, 0.0], vec![0.0, 1.0]));
        let z = legendre_inverse(&l, &p).unwrap();
        assert_eq!(z, s);
        assert_abs_diff_eq!(weyl_hamiltonian(&l, &p).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hermitian_forward_is_h_times_z() {
        let l = herm();
        let s = JetSample::new(vec![0.0; 2], vec![0.3, -1.0], vec![0.8, 0.2]).unwrap();
        let (g, w) = l.hermitian_parts(&s.y).unwrap();
        let expected = hermitian_from_parts(&g, &w) * to_complex(&s.z1, &s.z2);
        let p = legendre_forward(&l, &s).unwrap();
        for (a, b) in p.p().iter().zip(expected.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn hermitian_inverse_and_hamiltonian_match_complex_solve() {
        let l = herm();
        let p = CotangentSample::new(vec![0.0; 2], vec![0.7, -0.2], vec![1.1, 0.4]).unwrap();
        let (g, w) = l.hermitian_parts(&p.y).unwrap();
        let h = hermitian_from_parts(&g, &w);
        let pv = to_complex(&p.p1, &p.p2);
        let z_oracle = complex_solve(&h, &pv).unwrap();
        let z = legendre_inverse(&l, &p).unwrap();
        for (a, b) in z.z().iter().zip(z_oracle.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
        let h_oracle = 0.5 * pv.dotc(&z_oracle).re;
        assert_abs_diff_eq!(weyl_hamiltonian(&l, &p).unwrap(), h_oracle, epsilon = 1e-12);
    }

    #[test]
    fn zero_momentum_maps_to_zero() {
        let l = Lagrangian::quartic_ratio(2, 0.1);
        let p = CotangentSample::new(vec![0.1, 0.2], vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert!(legendre_inverse(&l, &p).unwrap().is_zero());
        assert_eq!(weyl_hamiltonian(&l, &p).unwrap(), 0.0);
    }

    #[test]
    fn sign_flip_equivariance_is_exact_for_hermitian() {
        let s = JetSample::new(vec![0.0; 2], vec![0.4, 1.0], vec![-0.6, 0.1]).unwrap();
        let (r1, r2) = check_equivariance(&herm(), &s, Complex64::new(-1.0, 0.0)).unwrap();
        assert!(r1 <= 1e-12 && r2 <= 1e-12);
    }

    #[test]
    fn hamilton_residual_vanishes_for_constant_data() {
        let g = Grid::unit_square(8).unwrap();
        let u = GridField::from_fn(g, 2, |_, _| vec![0.3, -0.2]);
        let p = GridField::zeros(g, 2);
        let r = hamilton_residual(&Lagrangian::flat(2), &u, &p, &p).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn hamilton_residual_rejects_mismatched_grids() {
        let u = GridField::zeros(Grid::unit_square(8).unwrap(), 2);
        let p = GridField::zeros(Grid::unit_square(9).unwrap(), 2);
        assert!(matches!(
            hamilton_residual(&Lagrangian::flat(2), &u, &p, &p),
            Err(Error::GridMismatch { .. })
        ));
    }
}
