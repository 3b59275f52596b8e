use cfinsler_core::caratheodory::forward;
use cfinsler_core::hamjac::{
    calibration_1d, calibration_cara, calibration_weyl, hj_residual_1d, hj_residual_cara, hj_residual_weyl, mayer_field_1d,
    CalibrationReport, Lagrangian1d, NodeField, ProductGrid, SlopeFunction,
};
use cfinsler_core::sampling::{random_jets, JetRanges};
use cfinsler_core::weyl::weyl_hamiltonian;
use cfinsler_core::{CotangentSample, JetSample};

use super::{lagrangian, AUX_STREAM};
use crate::table::{numbered, Table};
use crate::{CliError, Context, Report, Theory};

/// Grid of the one-variable check: `t ∈ [1, 2]`, `y ∈ [−1, 1]`.
const GRID_1D: [usize; 2] = [101, 21];

pub fn run(ctx: &Context, theory: Theory, w: Option<f64>) -> Result<Report, CliError> {
    match theory {
        Theory::OneD => one_d(ctx),
        Theory::Weyl => weyl(ctx),
        Theory::Cara => cara(ctx, w.unwrap_or(ctx.config.hj.w)),
    }
}

fn write_residual(ctx: &Context, name: &str, axes: &[&str], res: &NodeField) -> Result<(), CliError> {
    let mut header: Vec<String> = axes.iter().map(|s| s.to_string()).collect();
    header.push("residual".into());
    let mut t = Table::new(header);
    for (p, v) in res.points.iter().zip(&res.values) {
        let mut row = p.clone();
        row.push(*v);
        t.push(row);
    }
    t.write(&ctx.artifact(name))
}

fn finish(ctx: &Context, report: &mut Report, res: &NodeField, cal: &CalibrationReport) {
    let tol = &ctx.config.tolerances;
    report.at_most("hj_residual", res.max_abs(), tol.hj_residual);
    report.at_least("calibration_min_slack", cal.min_slack, -tol.calibration_slack);
    report.at_most("calibration_equality_gap", cal.equality_gap, tol.calibration_equality);
}

fn field_grid(ctx: &Context, n: usize) -> Result<ProductGrid, CliError> {
    let mut ranges = vec![(0.0, 1.0), (0.0, 1.0)];
    ranges.extend(std::iter::repeat((-0.5, 0.5)).take(n));
    let counts = vec![ctx.config.hj.points; n + 2];
    Ok(ProductGrid::new(&ranges, &counts)?)
}

fn field_axes(n: usize) -> Vec<String> {
    let mut a = vec!["t1".to_owned(), "t2".to_owned()];
    a.extend(numbered("y", n));
    a
}

fn z_samples(ctx: &Context, n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let ranges = JetRanges { y_radius: 0.0, z_norm: (0.01, 3.0) };
    random_jets(ctx.config.seed ^ AUX_STREAM, n, ctx.config.hj.calibration_samples, ranges)
        .into_iter()
        .map(|s| (s.z1, s.z2))
        .collect()
}

fn vector_or(given: &Option<(Vec<f64>, Vec<f64>)>, n: usize, default: impl Fn(usize) -> (f64, f64), what: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    match given {
        Some((a, b)) if a.len() == n && b.len() == n => Ok((a.clone(), b.clone())),
        Some(_) => Err(CliError::Config(format!("hj.{what} needs two vectors of length {n}"))),
        None => Ok((0..n).map(&default).unzip()),
    }
}

/// `L = ½z²` with the candidate `S = y²/(2t)`.
fn one_d(ctx: &Context) -> Result<Report, CliError> {
    let l = Lagrangian1d::quadratic();
    let g = ProductGrid::new(&[(1.0, 2.0), (-1.0, 1.0)], &GRID_1D)?;
    let s = SlopeFunction::sample(g, 1, |x| vec![x[1] * x[1] / (2.0 * x[0])])?;
    let res = hj_residual_1d(&l, &s)?;
    let psi = mayer_field_1d(&l, &s)?;
    let zs: Vec<f64> = {
        let m = ctx.config.hj.calibration_samples.max(2);
        (0..m).map(|k| -3.0 + 6.0 * k as f64 / (m - 1) as f64).collect()
    };
    let cal = calibration_1d(&l, &s, &zs)?;
    let mut t = Table::new(["t", "y", "residual", "psi"].map(String::from).to_vec());
    for ((p, r), v) in res.points.iter().zip(&res.values).zip(&psi.values) {
        t.push(vec![p[0], p[1], *r, *v]);
    }
    t.write(&ctx.artifact("hj_1d.csv"))?;
    let mut report = Report::new("hj 1d: L = z²/2, S = y²/(2t)");
    finish(ctx, &mut report, &res, &cal);
    Ok(report)
}

/// Affine solution `S¹ = p¹·y − H(p)t¹`, `S² = p²·y` for a constant `p`.
fn weyl(ctx: &Context) -> Result<Report, CliError> {
    let l = lagrangian(ctx)?;
    let n = l.dim();
    let (p1, p2) = vector_or(&ctx.config.hj.momentum, n, |k| (0.4 - 0.6 * k as f64, 0.1 + 0.7 * k as f64), "momentum")?;
    let p = CotangentSample::new(vec![0.0; n], p1, p2)?;
    let h = weyl_hamiltonian(&l, &p)?;
    let s = SlopeFunction::sample(field_grid(ctx, n)?, 2, |x| {
        let dot = |q: &[f64]| q.iter().zip(&x[2..]).map(|(a, b)| a * b).sum::<f64>();
        vec![dot(&p.p1) - h * x[0], dot(&p.p2)]
    })?;
    let res = hj_residual_weyl(&l, &s)?;
    let cal = calibration_weyl(&l, &s, &z_samples(ctx, n))?;
    let axes = field_axes(n);
    write_residual(ctx, "hj_weyl.csv", &axes.iter().map(String::as_str).collect::<Vec<_>>(), &res)?;
    let mut report = Report::new(format!("hj weyl: {}, affine slope with H(p) = {h:.6e}", l.family()));
    finish(ctx, &mut report, &res, &cal);
    Ok(report)
}

/// `S^α = π^α·y + ε^α_β t^β` from the forward momenta of the linear map
/// with Jacobian columns given by `hj.frame`, at level `w`. Only `w = 0`
/// solves the equation.
fn cara(ctx: &Context, w: f64) -> Result<Report, CliError> {
    let l = lagrangian(ctx)?;
    let n = l.dim();
    let (z1, z2) = vector_or(&ctx.config.hj.frame, n, |k| if k == 0 { (1.0, 0.3) } else { (0.2, 0.6) }, "frame")?;
    let m = forward(&l, &JetSample::new(vec![0.0; n], z1, z2)?, w, None)?;
    let s = SlopeFunction::sample(field_grid(ctx, n)?, 2, |x| {
        (0..2)
            .map(|a| (0..n).map(|k| m.pi[(a, k)] * x[2 + k]).sum::<f64>() + m.eps[(a, 0)] * x[0] + m.eps[(a, 1)] * x[1])
            .collect()
    })?;
    let res = hj_residual_cara(&l, &s)?;
    let cal = calibration_cara(&l, &s, &z_samples(ctx, n))?;
    let axes = field_axes(n);
    write_residual(ctx, "hj_cara.csv", &axes.iter().map(String::as_str).collect::<Vec<_>>(), &res)?;
    let mut report = Report::new(format!("hj cara: {}, affine slope at w = {w}", l.family()));
    if w != 0.0 {
        report.note(format!("w = {w}: the slope solves the level-w equation, so the residual is expected to be about {w}"));
    }
    finish(ctx, &mut report, &res, &cal);
    Ok(report)
}
