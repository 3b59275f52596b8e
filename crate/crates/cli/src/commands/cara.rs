use std::path::Path;

use cfinsler_core::caratheodory::{
    cara_field_residual, cara_hamiltonian, condensed_check, energy_momentum, forward, gauge_act, hermitian_closed_form,
    identity_residuals, pluecker,
};
use cfinsler_core::sampling::{random_sl2, rng};
use cfinsler_core::{CaraMomenta, Complex64, GridField, JetSample, Lagrangian, PlueckerA};
use nalgebra::{DMatrix, DVector};

use super::{columns, jet_header, jet_row, lagrangian, max_abs_diff, samples, AUX_STREAM};
use crate::table::{numbered, Table};
use crate::{CaraMode, CliError, Context, Report};

/// At `w = 0` the stationary point of `W` degenerates as `z` becomes
/// conformal. Samples whose conformality defect `|f|/(2F)` falls below this
/// are skipped (for flat `F` it equals `√(1 − A₁₂²)`, so 0.14 ≈ `|A₁₂| ≤ 0.99`).
const MIN_CONFORMALITY_DEFECT: f64 = 0.14;

/// Gauges drawn per sample, on the first `GAUGE_SAMPLES` samples.
const GAUGES: usize = 50;
const GAUGE_SAMPLES: usize = 10;

pub fn run(ctx: &Context, mode: CaraMode, w: f64, input: Option<&Path>) -> Result<Report, CliError> {
    if !w.is_finite() || w < 0.0 {
        return Err(CliError::Config(format!("--w must be finite and non-negative, got {w}")));
    }
    let l = lagrangian(ctx)?;
    match mode {
        CaraMode::Forward => forward_mode(ctx, &l, w),
        CaraMode::Invert => invert_mode(ctx, &l, w, input),
        CaraMode::Residual => residual_mode(ctx, &l, w),
        CaraMode::Roundtrip => roundtrip_mode(ctx, &l, w),
    }
}

/// Names of the Plücker coordinates: `A_j_k` (j ≠ k ≤ n), `A_j_{n+2}`,
/// `A_{n+1}_k` and `A_{n+1}_{n+2}`.
pub fn pluecker_names(n: usize) -> Vec<String> {
    let mut v = Vec::new();
    for j in 1..=n {
        for k in 1..=n {
            if j != k {
                v.push(format!("A_{j}_{k}"));
            }
        }
    }
    v.extend((1..=n).map(|j| format!("A_{j}_{}", n + 2)));
    v.extend((1..=n).map(|k| format!("A_{}_{k}", n + 1)));
    v.push(format!("A_{}_{}", n + 1, n + 2));
    v
}

fn pluecker_row(a: &PlueckerA) -> Vec<f64> {
    let n = a.dim();
    let mut v = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if j != k {
                v.push(a.vec_a(j, k));
            }
        }
    }
    v.extend(a.col_a.iter());
    v.extend(a.row_a.iter());
    v.push(a.scalar_a);
    v
}

fn pluecker_from_row(n: usize, r: &[f64]) -> Result<PlueckerA, CliError> {
    let mut vec_a = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                vec_a[(i, j)] = r[k];
                k += 1;
            }
        }
    }
    let skew = (&vec_a + vec_a.transpose()).amax();
    if skew > 1e-9 * (1.0 + vec_a.amax()) {
        return Err(CliError::Input(format!("A_j_k and A_k_j are not opposite (defect {skew:.3e})")));
    }
    let col = DVector::from_column_slice(&r[k..k + n]);
    let row = DVector::from_column_slice(&r[k + n..k + 2 * n]);
    Ok(PlueckerA::new(&vec_a, col, row, r[k + 2 * n])?)
}

fn momenta_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = ["eps_11", "eps_12", "eps_21", "eps_22"].map(String::from).to_vec();
    h.extend(numbered("pi1_", n));
    h.extend(numbered("pi2_", n));
    h
}

fn momenta_row(m: &CaraMomenta) -> Vec<f64> {
    let n = m.dim();
    let mut v = vec![m.eps[(0, 0)], m.eps[(0, 1)], m.eps[(1, 0)], m.eps[(1, 1)]];
    v.extend((0..2).flat_map(|a| (0..n).map(move |k| (a, k))).map(|(a, k)| m.pi[(a, k)]));
    v
}

fn conformality_defect(l: &Lagrangian, s: &JetSample) -> Result<f64, CliError> {
    Ok(energy_momentum(l, s)?.hopf().norm() / (2.0 * l.value(s)))
}

fn forward_mode(ctx: &Context, l: &Lagrangian, w: f64) -> Result<Report, CliError> {
    let n = l.dim();
    let mut header = jet_header(n);
    header.extend(momenta_header(n));
    header.extend(pluecker_names(n));
    let mut table = Table::new(header);
    let mut det = 0.0f64;
    for s in samples(ctx, n) {
        let m = forward(l, &s, w, None)?;
        det = det.max((m.determinant(&s) - (l.value(&s) + w)).abs() / (1.0 + w + l.value(&s)));
        let mut row = jet_row(&s);
        row.extend(momenta_row(&m));
        row.extend(pluecker_row(&pluecker(&m)));
        table.push(row);
    }
    table.write(&ctx.artifact("cara_forward.csv"))?;
    let mut report = Report::new(format!("cara forward: {}, w = {w}", l.family()));
    report.at_most("determinant_identity", det, ctx.config.tolerances.cara_roundtrip);
    Ok(report)
}

/// Plücker records from `input`, or from the forward map of the samples.
fn pluecker_records(ctx: &Context, l: &Lagrangian, w: f64, input: Option<&Path>) -> Result<Vec<(Vec<f64>, PlueckerA)>, CliError> {
    let n = l.dim();
    match input {
        Some(path) => {
            let t = Table::read(path)?;
            let ys = columns(&t, &numbered("y", n))?;
            let names = pluecker_names(n);
            let rows = columns(&t, &names)?;
            ys.into_iter().zip(rows).map(|(y, r)| Ok((y, pluecker_from_row(n, &r)?))).collect()
        }
        None => samples(ctx, n)
            .into_iter()
            .map(|s| {
                let a = pluecker(&forward(l, &s, w, None)?);
                Ok((s.y, a))
            })
            .collect(),
    }
}

fn invert_mode(ctx: &Context, l: &Lagrangian, w: f64, input: Option<&Path>) -> Result<Report, CliError> {
    let n = l.dim();
    let records = pluecker_records(ctx, l, w, input)?;
    let mut header = numbered("y", n);
    header.extend(pluecker_names(n));
    header.extend(numbered("z1_", n));
    header.extend(numbered("z2_", n));
    header.extend(["H", "W"].map(String::from));
    let mut table = Table::new(header);
    let (mut side, mut ident) = (0.0f64, 0.0f64);
    for (y, a) in &records {
        let sol = cara_hamiltonian(l, y, a)?;
        side = side.max(sol.side_residual.abs());
        ident = ident.max(identity_residuals(l, a, &sol.z, sol.hamiltonian)?.max_abs());
        let mut row = y.clone();
        row.extend(pluecker_row(a));
        row.extend(sol.z.z1.iter().chain(&sol.z.z2));
        row.extend([sol.hamiltonian, sol.w_value]);
        table.push(row);
    }
    table.write(&ctx.artifact("cara_invert.csv"))?;
    let mut report = Report::new(format!("cara invert: {}, {} records", l.family(), records.len()));
    report.at_most("side_condition", side, ctx.config.tolerances.cara_roundtrip);
    report.at_most("hamiltonian_identities", ident, ctx.config.tolerances.cara_identity);
    Ok(report)
}

fn residual_mode(ctx: &Context, l: &Lagrangian, w: f64) -> Result<Report, CliError> {
    let n = l.dim();
    let tol = &ctx.config.tolerances;
    let mut ident = 0.0f64;
    for s in samples(ctx, n) {
        let a = pluecker(&forward(l, &s, w, None)?);
        ident = ident.max(identity_residuals(l, &a, &s, w)?.max_abs());
    }

    let map = ctx.config.boundary.to_map();
    if map.dim() != n {
        return Err(CliError::Config(format!("boundary map has {} components, the Lagrangian {n}", map.dim())));
    }
    let g = ctx.config.grid.build()?;
    let u = map.sample(g);
    let mut eps = GridField::zeros(g, 4);
    let mut pi = GridField::zeros(g, 2 * n);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (x, y) = g.point(i, j);
            let (z1, z2) = map.jacobian(x, y);
            let row = momenta_row(&forward(l, &JetSample::new(u.at(i, j).to_vec(), z1, z2)?, w, None)?);
            eps.at_mut(i, j).copy_from_slice(&row[..4]);
            pi.at_mut(i, j).copy_from_slice(&row[4..]);
        }
    }
    let res = cara_field_residual(l, &u, &eps, &pi)?;
    let mut header = vec!["x".to_owned(), "y".to_owned()];
    header.extend(numbered("u_eq", n));
    header.extend(numbered("pi_eq", 2 * n));
    header.extend(numbered("eps_eq", 4));
    header.extend(numbered("conservation", 2));
    let mut table = Table::new(header);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (x, y) = g.point(i, j);
            let mut row = vec![x, y];
            for f in [&res.u_eq, &res.pi_eq, &res.eps_eq, &res.conservation] {
                row.extend_from_slice(f.at(i, j));
            }
            table.push(row);
        }
    }
    table.write(&ctx.artifact("cara_residual.csv"))?;
    let mut report = Report::new(format!("cara residual: {}, w = {w}", l.family()));
    report.at_most("hamiltonian_identities", ident, tol.cara_identity);
    report.at_most("field_equations", res.max_abs(), tol.grid_residual);
    Ok(report)
}

fn roundtrip_mode(ctx: &Context, l: &Lagrangian, w: f64) -> Result<Report, CliError> {
    let n = l.dim();
    let tol = &ctx.config.tolerances;
    let jets = samples(ctx, n);
    let hermitian = |y: &[f64]| {
        l.hermitian_parts(y)
            .map(|(g, om)| DMatrix::from_fn(n, n, |j, k| Complex64::new(g[(j, k)], -om[(j, k)])))
    };
    let mut header = jet_header(n);
    header.extend(["H", "error"].map(String::from));
    let mut table = Table::new(header);
    let (mut z_err, mut h_err, mut ident, mut gauge, mut closed, mut condensed) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut skipped = 0;
    let mut checked_hermitian = false;
    let mut r = rng(ctx.config.seed ^ AUX_STREAM);
    for (k, s) in jets.iter().enumerate() {
        let m = forward(l, s, w, None)?;
        let a = pluecker(&m);
        if k < GAUGE_SAMPLES {
            for _ in 0..GAUGES {
                let g = random_sl2(&mut r);
                gauge = gauge.max(pluecker(&gauge_act(&g, &m)?).distance(&a) / (1.0 + a.max_abs()));
            }
        }
        if w == 0.0 && conformality_defect(l, s)? < MIN_CONFORMALITY_DEFECT {
            skipped += 1;
            continue;
        }
        let sol = cara_hamiltonian(l, &s.y, &a)?;
        let e = max_abs_diff(&sol.z.z_flat(), &s.z_flat());
        z_err = z_err.max(e);
        h_err = h_err.max((sol.hamiltonian - w).abs().max((sol.hamiltonian - sol.w_value).abs()) / (1.0 + w));
        ident = ident.max(identity_residuals(l, &a, &sol.z, sol.hamiltonian)?.max_abs());
        if let Some(h) = hermitian(&s.y) {
            checked_hermitian = true;
            let cf = hermitian_closed_form(&h, &a)?;
            closed = closed.max(cf.z.iter().zip(sol.z.z()).fold((cf.hamiltonian - sol.hamiltonian).abs(), |m, (p, q)| m.max((p - q).norm())));
            let c = condensed_check(&h, &a, &sol.z.z(), sol.hamiltonian, &energy_momentum(l, &sol.z)?)?;
            condensed = condensed.max(c.residual / c.scale.max(1.0));
        }
        let mut row = jet_row(s);
        row.extend([sol.hamiltonian, e]);
        table.push(row);
    }
    table.write(&ctx.artifact("cara_roundtrip.csv"))?;

    let mut report = Report::new(format!("cara roundtrip: {}, w = {w}, {} samples", l.family(), jets.len()));
    if skipped > 0 {
        report.note(format!("{skipped} nearly conformal samples skipped (|f|/2F < {MIN_CONFORMALITY_DEFECT})"));
    }
    report.at_most("roundtrip_z", z_err, tol.cara_roundtrip);
    report.at_most("roundtrip_w", h_err, tol.cara_roundtrip);
    report.at_most("hamiltonian_identities", ident, tol.cara_identity);
    report.at_most("gauge_invariance", gauge, tol.gauge);
    if checked_hermitian {
        report.at_most("hermitian_closed_form", closed, tol.cara_roundtrip);
        report.at_most("condensed_system", condensed, tol.condensed);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pluecker_names_count() {
        for n in 1..5 {
            assert_eq!(pluecker_names(n).len(), 2 * n + n * (n - 1) + 1);
        }
        assert_eq!(pluecker_names(2), ["A_1_2", "A_2_1", "A_1_4", "A_2_4", "A_3_1", "A_3_2", "A_3_4"]);
    }

    #[test]
    fn pluecker_row_round_trip() {
        let l = Lagrangian::quartic_ratio(2, 0.1);
        let s = JetSample::new(vec![0.1, 0.2], vec![1.0, 0.3], vec![-0.4, 0.7]).unwrap();
        let a = pluecker(&forward(&l, &s, 1.0, None).unwrap());
        let back = pluecker_from_row(2, &pluecker_row(&a)).unwrap();
        assert_eq!(back.distance(&a), 0.0);
        let mut row = pluecker_row(&a);
        row[1] += 0.1;
        assert!(matches!(pluecker_from_row(2, &row), Err(CliError::Input(_))));
    }
}
