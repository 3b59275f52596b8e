//! Damped Newton iteration for the small nonlinear systems of the Legendre
//! and Carathéodory inversions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::max_abs;

pub(crate) const MAX_ITERATIONS: usize = 100;

/// A system `∇Φ(x) = 0` with Jacobian `∇²Φ`.
pub(crate) trait Problem {
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> DMatrix<f64>;
    /// `Φ(x)` when the problem is a minimization; `None` selects the
    /// residual-norm merit.
    fn objective(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Newton with backtracking. Convergence: `‖∇Φ‖_∞ ≤ tol`.
///
/// A trial step is accepted on sufficient decrease of the merit. Once the
/// merit change is below the floating-point resolution of the merit itself,
/// a step that reduces the gradient norm is accepted instead.
pub(crate) fn solve(problem: &impl Problem, x0: Vec<f64>, tol: f64) -> Result<Outcome> {
    let mut x = x0;
    let mut g = problem.gradient(&x);
    for it in 0..MAX_ITERATIONS {
        let r = max_abs(&g);
        if !r.is_finite() {
            return Err(Error::NonFiniteValue { context: "newton gradient" });
        }
        if r <= tol {
            return Ok(Outcome { x, iterations: it, residual: r });
        }
        let hess = problem.hessian(&x);
        let rhs = -DVector::from_column_slice(&g);
        let mut d = hess.clone().lu().solve(&rhs).map(|v| v.as_slice().to_vec());
        let phi0 = problem.objective(&x);
        if let (Some(_), Some(dir)) = (phi0, d.as_ref()) {
            let slope: f64 = dir.iter().zip(&g).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                d = None;
            }
        }
        let dir = match (d, phi0) {
            (Some(d), _) if d.iter().all(|v| v.is_finite()) => d,
            (_, Some(_)) => g.iter().map(|v| -v).collect(),
            _ => return Err(Error::NoConvergence { iterations: it, residual: r }),
        };
        let slope: f64 = dir.iter().zip(&g).map(|(a, b)| a * b).sum();
        let gnorm = norm(&g);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let gt = problem.gradient(&trial);
            let gtn = norm(&gt);
            let ok = match phi0 {
                Some(p0) => {
                    let p1 = problem.objective(&trial).unwrap_or(f64::NAN);
                    let resolution = 1e-14 * (1.0 + p0.abs());
                    p1 <= p0 + 1e-4 * t * slope || ((p1 - p0).abs() <= resolution && gtn < gnorm)
                }
                None => gtn <= (1.0 - 1e-4 * t) * gnorm || (gtn < gnorm && gnorm < 1e3 * tol),
            };
            if ok && gtn.is_finite() {
                accepted = Some((trial, gt));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, gn)) => {
                x = xn;
                g = gn;
            }
            None => return Err(Error::NoConvergence { iterations: it, residual: r }),
        }
    }
    let r = max_abs(&g);
    if r <= tol {
        Ok(Outcome { x, iterations: MAX_ITERATIONS, residual: r })
    } else {
        Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual: r })
    }
}
