//! Small dense helpers shared by several modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn sym_eigenvalues(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    SymmetricEigen::try_new(m.clone(), 1e-14, 10_000)
        .map(|e| e.eigenvalues)
        .ok_or(Error::EigenFailure)
}

/// `h = g − iω`.
pub(crate) fn hermitian_from_parts(g: &DMatrix<f64>, omega: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| Complex64::new(g[(i, j)], -omega[(i, j)]))
}

#[cfg(test)]
/// Solves `a x = b`, returning `None` when `a` is numerically singular
/// (smallest singular value below `1e-12` times the largest).
pub(crate) fn complex_solve(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    let sv = a.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-12 * smax.max(f64::MIN_POSITIVE)) {
        return None;
    }
    a.clone().lu().solve(b)
}

pub(crate) fn complex_inverse(a: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let n = a.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let sv = a.clone().singular_values();
    if !(sv.min() > 1e-12 * sv.max().max(f64::MIN_POSITIVE)) {
        return None;
    }
    a.clone().lu().solve(&id)
}

#[cfg(test)]
pub(crate) fn to_complex(re: &[f64], im: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(re.len(), re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)))
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
