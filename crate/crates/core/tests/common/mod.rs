#![allow(dead_code)]

use std::sync::Arc;

use cfinsler_core::lagrangian::{Evaluator, MetricField, TwoForm};
use cfinsler_core::{JetSample, Lagrangian};
use nalgebra::DMatrix;

pub fn hermitian_half() -> Lagrangian {
    Lagrangian::hermitian(2, MetricField::constant(DMatrix::identity(2, 2)).unwrap(), TwoForm::planar(2, 0.5))
}

/// The four invariant presets exercised throughout, with a label.
pub fn presets() -> Vec<(&'static str, Lagrangian)> {
    vec![
        ("flat", Lagrangian::flat(2)),
        ("hermitian", hermitian_half()),
        ("sphere", Lagrangian::sphere_chart(2)),
        ("quartic", Lagrangian::quartic_ratio(2, 0.1)),
    ]
}

/// Hides every closed-form derivative of the wrapped evaluator.
#[derive(Debug)]
pub struct ValueOnly(pub Lagrangian);

impl Evaluator for ValueOnly {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, y: &[f64], z1: &[f64], z2: &[f64]) -> f64 {
        self.0.value_at(y, z1, z2)
    }
}

pub fn value_only(l: &Lagrangian) -> Lagrangian {
    Lagrangian::custom(Arc::new(ValueOnly(l.clone())))
}

fn flat_value(l: &Lagrangian, s: &JetSample, x: &[f64]) -> f64 {
    let n = s.dim();
    l.value_at(&s.y, &x[..n], &x[n..])
}

/// Richardson-extrapolated central difference of `F` in the flattened `z`.
pub fn richardson_grad_z(l: &Lagrangian, s: &JetSample) -> Vec<f64> {
    let x0 = s.z_flat();
    let d = |i: usize, h: f64| {
        let mut p = x0.clone();
        let mut m = x0.clone();
        p[i] += h;
        m[i] -= h;
        (flat_value(l, s, &p) - flat_value(l, s, &m)) / (2.0 * h)
    };
    let h = 1e-3;
    (0..x0.len()).map(|i| (4.0 * d(i, h / 2.0) - d(i, h)) / 3.0).collect()
}

/// Richardson-extrapolated four-point mixed differences of `F` in `z`.
pub fn richardson_hessian_z(l: &Lagrangian, s: &JetSample) -> DMatrix<f64> {
    let x0 = s.z_flat();
    let m = x0.len();
    let d = |i: usize, j: usize, h: f64| {
        let at = |si: f64, sj: f64| {
            let mut x = x0.clone();
            x[i] += si * h;
            x[j] += sj * h;
            flat_value(l, s, &x)
        };
        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
    };
    let h = 2e-3;
    DMatrix::from_fn(m, m, |i, j| (4.0 * d(i, j, h / 2.0) - d(i, j, h)) / 3.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
