pub mod cara;
pub mod check;
pub mod conserve;
pub mod hj;
pub mod solve;
pub mod tensors;
pub mod weyl;

use cfinsler_core::sampling::{random_jets, random_lambda, rng};
use cfinsler_core::{Complex64, CotangentSample, JetSample, Lagrangian};
use nalgebra::DMatrix;

use crate::table::{numbered, Table};
use crate::{CliError, Context};

/// Stream offsets so each use of the seed draws an independent sequence.
pub(crate) const LAMBDA_STREAM: u64 = 0x9e37_79b9;
pub(crate) const AUX_STREAM: u64 = 0x7f4a_7c15;

pub(crate) fn lagrangian(ctx: &Context) -> Result<Lagrangian, CliError> {
    ctx.config.lagrangian.build()
}

pub(crate) fn samples(ctx: &Context, n: usize) -> Vec<JetSample> {
    let s = &ctx.config.samples;
    random_jets(ctx.config.seed, n, s.count, s.ranges())
}

pub(crate) fn lambdas(ctx: &Context, count: usize) -> Vec<Complex64> {
    let s = &ctx.config.samples;
    let mut r = rng(ctx.config.seed ^ LAMBDA_STREAM);
    (0..count).map(|_| random_lambda(&mut r, (s.lambda_min, s.lambda_max))).collect()
}

/// `y1..yn, z1_1..z1_n, z2_1..z2_n` where `z = z1 + i·z2`.
pub(crate) fn jet_header(n: usize) -> Vec<String> {
    let mut h = numbered("y", n);
    h.extend(numbered("z1_", n));
    h.extend(numbered("z2_", n));
    h
}

/// `y1..yn, p1_1..p1_n, p2_1..p2_n` where `p = p1 + i·p2`.
pub(crate) fn cotangent_header(n: usize) -> Vec<String> {
    let mut h = numbered("y", n);
    h.extend(numbered("p1_", n));
    h.extend(numbered("p2_", n));
    h
}

pub(crate) fn cotangent_row(c: &CotangentSample) -> Vec<f64> {
    c.y.iter().chain(&c.p1).chain(&c.p2).copied().collect()
}

/// Reads `names` from every record of `t`.
pub(crate) fn columns(t: &Table, names: &[String]) -> Result<Vec<Vec<f64>>, CliError> {
    let idx = names.iter().map(|c| t.require(c)).collect::<Result<Vec<_>, _>>()?;
    Ok(t.rows.iter().map(|r| idx.iter().map(|k| r[*k]).collect()).collect())
}

pub(crate) fn jet_row(s: &JetSample) -> Vec<f64> {
    s.y.iter().chain(&s.z1).chain(&s.z2).copied().collect()
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> impl Iterator<Item = f64> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| m[(i, j)]))
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
