//! Derivatives of `F` in `z` and `y`, analytic when the evaluator supplies
//! them and central differences otherwise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::lagrangian::Lagrangian;

/// Relative step of all first-order central differences.
pub const FD_DELTA: f64 = 1e-5;

/// Outer step used when a second derivative is built from a numerically
/// differenced gradient.
pub const FD_DELTA_NESTED: f64 = 1e-4;

/// A point `(y, z)` of the complexified tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSample {
    pub y: Vec<f64>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
}

impl JetSample {
    pub fn new(y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::InvalidArgument("jet sample needs n ≥ 1".into()));
        }
        for v in [&z1, &z2] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        ensure_finite(&y, "jet sample y")?;
        ensure_finite(&z1, "jet sample z1")?;
        ensure_finite(&z2, "jet sample z2")?;
        Ok(JetSample { y, z1, z2 })
    }

    pub fn from_complex(y: Vec<f64>, z: &[Complex64]) -> Result<Self> {
        let z1 = z.iter().map(|c| c.re).collect();
        let z2 = z.iter().map(|c| c.im).collect();
        Self::new(y, z1, z2)
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn z(&self) -> Vec<Complex64> {
        self.z1.iter().zip(&self.z2).map(|(a, b)| Complex64::new(*a, *b)).collect()
    }

    pub fn z_norm(&self) -> f64 {
        self.z1.iter().chain(&self.z2).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.z1.iter().chain(&self.z2).all(|v| *v == 0.0)
    }

    /// The sample `(y, λz)`.
    pub fn scaled(&self, lambda: Complex64) -> JetSample {
        let (a, b) = (lambda.re, lambda.im);
        let z1 = self.z1.iter().zip(&self.z2).map(|(x, y)| a * x - b * y).collect();
        let z2 = self.z1.iter().zip(&self.z2).map(|(x, y)| b * x + a * y).collect();
        JetSample { y: self.y.clone(), z1, z2 }
    }

    /// `z` flattened as `(z₁, z₂)`, the ordering of the z-Hessian.
    pub fn z_flat(&self) -> Vec<f64> {
        self.z1.iter().chain(&self.z2).copied().collect()
    }
}

/// `F` with its first derivatives at one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstJet {
    pub value: f64,
    /// Row `α` holds `∂F/∂z^j_α`.
    pub dfdz: DMatrix<f64>,
    pub dfdy: DVector<f64>,
}

/// `G^{αβ}_{jk} = ∂²F/∂z^j_α ∂z^k_β`, index `(j, α) ↦ α·n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianZ {
    pub matrix: DMatrix<f64>,
}

impl HessianZ {
    pub fn dim(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// The `n × n` block `G^{αβ}` (α, β ∈ {0, 1}).
    pub fn block(&self, alpha: usize, beta: usize) -> DMatrix<f64> {
        let n = self.dim();
        self.matrix.view((alpha * n, beta * n), (n, n)).into_owned()
    }

    pub fn entry(&self, j: usize, alpha: usize, k: usize, beta: usize) -> f64 {
        let n = self.dim();
        self.matrix[(alpha * n + j, beta * n + k)]
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

fn step(x: f64, delta: f64) -> f64 {
    delta * x.abs().max(1.0)
}

/// Central-difference gradient of a scalar function.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], delta: f64) -> Vec<f64> {
    let mut xs = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step(x[i], delta);
            xs[i] = x[i] + h;
            let fp = f(&xs);
            xs[i] = x[i] - h;
            let fm = f(&xs);
            xs[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Gradient `(∂F/∂z₁, ∂F/∂z₂)` flattened, and whether it came from a closed form.
pub(crate) fn grad_z_flat(lagr: &Lagrangian, y: &[f64], z1: &[f64], z2: &[f64]) -> (Vec<f64>, bool) {
    let n = y.len();
    let mut out = vec![0.0; 2 * n];
    let (d1, d2) = out.split_at_mut(n);
    if lagr.evaluator().grad_z(y, z1, z2, d1, d2) {
        return (out, true);
    }
    let ev = lagr.evaluator();
    let x: Vec<f64> = z1.iter().chain(z2).copied().collect();
    let g = central_gradient(|x| ev.value(y, &x[..n], &x[n..]), &x, FD_DELTA);
    (g, false)
}

pub(crate) fn grad_y_vec(lagr: &Lagrangian, y: &[f64], z1: &[f64], z2: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    if lagr.evaluator().grad_y(y, z1, z2, &mut out) {
        return out;
    }
    let ev = lagr.evaluator();
    central_gradient(|yy| ev.value(yy, z1, z2), y, FD_DELTA)
}

pub fn eval_first(lagr: &Lagrangian, s: &JetSample) -> Result<FirstJet> {
    lagr.check_dim(s.dim())?;
    let n = s.dim();
    let value = lagr.value(s);
    let (gz, _) = grad_z_flat(lagr, &s.y, &s.z1, &s.z2);
    let gy = grad_y_vec(lagr, &s.y, &s.z1, &s.z2);
    ensure_finite(&[value], "F value")?;
    ensure_finite(&gz, "dF/dz")?;
    ensure_finite(&gy, "dF/dy")?;
    Ok(FirstJet {
        value,
        dfdz: DMatrix::from_row_slice(2, n, &gz),
        dfdy: DVector::from_vec(gy),
    })
}

/// Raw z-Hessian without symmetrization or checks, row-major.
pub(crate) fn hessian_z_raw(lagr: &Lagrangian, y: &[f64], z1: &[f64], z2: &[f64]) -> Vec<f64> {
    let n = y.len();
    let m = 2 * n;
    let mut out = vec![0.0; m * m];
    if lagr.evaluator().hessian_z(y, z1, z2, &mut out) {
        return out;
    }
    let (_, analytic) = grad_z_flat(lagr, y, z1, z2);
    let delta = if analytic { FD_DELTA } else { FD_DELTA_NESTED };
    let mut x: Vec<f64> = z1.iter().chain(z2).copied().collect();
    for c in 0..m {
        let x0 = x[c];
        let h = step(x0, delta);
        x[c] = x0 + h;
        let (gp, _) = grad_z_flat(lagr, y, &x[..n], &x[n..]);
        x[c] = x0 - h;
        let (gm, _) = grad_z_flat(lagr, y, &x[..n], &x[n..]);
        x[c] = x0;
        for r in 0..m {
            out[r * m + c] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    out
}

pub fn eval_hessian_z(lagr: &Lagrangian, s: &JetSample) -> Result<HessianZ> {
    lagr.check_dim(s.dim())?;
    let m = 2 * s.dim();
    let raw = hessian_z_raw(lagr, &s.y, &s.z1, &s.z2);
    ensure_finite(&raw, "z-Hessian")?;
    let mut matrix = DMatrix::from_row_slice(m, m, &raw);
    matrix = (&matrix + matrix.transpose()) * 0.5;
    Ok(HessianZ { matrix })
}

/// Mixed derivatives `∂²F/∂z^j_α ∂y^k`, shape `2n × n` with row `α·n + j`.
pub fn eval_mixed_zy(lagr: &Lagrangian, s: &JetSample) -> Result<DMatrix<f64>> {
    lagr.check_dim(s.dim())?;
    let n = s.dim();
    let (_, analytic) = grad_z_flat(lagr, &s.y, &s.z1, &s.z2);
    let delta = if analytic { FD_DELTA } else { FD_DELTA_NESTED };
    let mut out = DMatrix::zeros(2 * n, n);
    let mut y = s.y.clone();
    for k in 0..n {
        let h = step(s.y[k], delta);
        y[k] = s.y[k] + h;
        let (gp, _) = grad_z_flat(lagr, &y, &s.z1, &s.z2);
        y[k] = s.y[k] - h;
        let (gm, _) = grad_z_flat(lagr, &y, &s.z1, &s.z2);
        y[k] = s.y[k];
        for r in 0..2 * n {
            out[(r, k)] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    ensure_finite(out.as_slice(), "mixed z-y derivative")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{Evaluator, MetricField, TwoForm};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    #[derive(Debug)]
    struct ValueOnly(Lagrangian);

    impl Evaluator for ValueOnly {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, y: &[f64], z1: &[f64], z2: &[f64]) -> f64 {
            self.0.value_at(y, z1, z2)
        }
    }

    #[test]
    fn flat_first_jet() {
        let s = JetSample::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let j = eval_first(&Lagrangian::flat(2), &s).unwrap();
        assert_eq!(j.value, 1.0);
        assert_eq!(j.dfdz, DMatrix::identity(2, 2));
        assert_eq!(j.dfdy, DVector::zeros(2));
    }

    #[test]
    fn zero_tangent_gives_zero_jet() {
        let s = JetSample::new(vec![0.2, 0.1], vec![0.0; 2], vec![0.0; 2]).unwrap();
        for l in [Lagrangian::flat(2), Lagrangian::quartic_ratio(2, 0.1)] {
            let j = eval_first(&l, &s).unwrap();
            assert_eq!(j.value, 0.0);
            assert_eq!(j.dfdz.amax(), 0.0);
        }
    }

    #[test]
    fn numeric_fallback_matches_hermitian_closed_form() {
        let l = Lagrangian::hermitian(2, MetricField::Sphere, TwoForm::planar(2, 0.3));
        let numeric = Lagrangian::custom(Arc::new(ValueOnly(l.clone())));
        let s = JetSample::new(vec![0.3, -0.2], vec![0.7, 1.1], vec![-0.4, 0.5]).unwrap();
        let a = eval_first(&l, &s).unwrap();
        let b = eval_first(&numeric, &s).unwrap();
        assert_abs_diff_eq!((a.dfdz - b.dfdz).amax(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!((a.dfdy - b.dfdy).amax(), 0.0, epsilon = 1e-8);
        let ha = eval_hessian_z(&l, &s).unwrap();
        let hb = eval_hessian_z(&numeric, &s).unwrap();
        assert_abs_diff_eq!((ha.matrix - hb.matrix).amax(), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn hermitian_hessian_blocks() {
        let c = 0.7;
        let l = Lagrangian::hermitian(2, MetricField::Constant(DMatrix::identity(2, 2)), TwoForm::planar(2, c));
        let s = JetSample::new(vec![0.0; 2], vec![1.0, 2.0], vec![0.5, -1.0]).unwrap();
        let h = eval_hessian_z(&l, &s).unwrap();
        let omega = DMatrix::from_row_slice(2, 2, &[0.0, c, -c, 0.0]);
        assert_eq!(h.block(0, 0), DMatrix::identity(2, 2));
        assert_eq!(h.block(1, 1), DMatrix::identity(2, 2));
        assert_eq!(h.block(0, 1), omega);
        assert_eq!(h.block(1, 0), -omega);
    }

    #[test]
    fn non_finite_values_are_reported() {
        #[derive(Debug)]
        struct Blowup;
        impl Evaluator for Blowup {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, _: &[f64], z1: &[f64], _: &[f64]) -> f64 {
                1.0 / (z1[0] - 1.0)
            }
        }
        let l = Lagrangian::custom(Arc::new(Blowup));
        let s = JetSample::new(vec![0.0], vec![1.0], vec![0.0]).unwrap();
        assert!(matches!(eval_first(&l, &s), Err(Error::NonFiniteValue { .. })));
    }

    #[test]
    fn sample_validation() {
        assert!(JetSample::new(vec![], vec![], vec![]).is_err());
        assert!(JetSample::new(vec![0.0], vec![1.0, 2.0], vec![0.0]).is_err());
        assert!(JetSample::new(vec![f64::NAN], vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn scaling_by_i_rotates_components() {
        let s = JetSample::new(vec![0.0], vec![2.0], vec![3.0]).unwrap();
        let r = s.scaled(Complex64::new(0.0, 1.0));
        assert_eq!((r.z1[0], r.z2[0]), (-3.0, 2.0));
    }
}
