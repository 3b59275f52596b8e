use cfinsler_core::tensors::{check_null_identity, check_zero_homogeneity, energy_decomposition, metric_bundle, reconstruction_error};

use super::{jet_header, jet_row, lagrangian, lambdas, row_major, samples};
use crate::table::{matrix_names, Table};
use crate::{CliError, Context, Report};

pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let l = lagrangian(ctx)?;
    let n = l.dim();
    let tol = &ctx.config.tolerances;
    let jets = samples(ctx, n);
    let lams = lambdas(ctx, jets.len());
    let mut report = Report::new(format!("tensors: {}, n = {n}, {} samples", l.family(), jets.len()));

    let mut header = jet_header(n);
    for p in ["g", "omega", "a", "b"] {
        header.extend(matrix_names(p, n, n));
    }
    let mut table = Table::new(header);

    let (mut rec, mut zero, mut null, mut recomp, mut ab) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut definite = true;
    for (s, lam) in jets.iter().zip(&lams) {
        let mb = metric_bundle(&l, s)?;
        rec = rec.max(reconstruction_error(&l, s)?);
        zero = zero.max(check_zero_homogeneity(&l, s, *lam)?);
        // The null identity scales with ‖a‖ + ‖b‖ and ‖z‖.
        let scale = (mb.a.amax() + mb.b.amax() + 1.0) * s.z_norm();
        null = null.max(check_null_identity(&l, s)? / scale);
        let d = energy_decomposition(&l, s)?;
        recomp = recomp.max(d.recomposition_error / (1.0 + l.value(s).abs()));
        ab = ab.max(mb.a.amax().max(mb.b.amax()));
        definite &= mb.is_positive_definite()?;
        let mut row = jet_row(s);
        for m in [&mb.g, &mb.omega, &mb.a, &mb.b] {
            row.extend(row_major(m));
        }
        table.push(row);
    }
    table.write(&ctx.artifact("tensors.csv"))?;

    report.note(format!("max(|a|, |b|) over samples = {ab:.6e}"));
    report.note(format!("g positive definite at every sample: {definite}"));
    report.at_most("hessian_reconstruction", rec, tol.reconstruction);
    report.at_most("zero_homogeneity", zero, tol.zero_homogeneity);
    report.at_most("null_identity", null, tol.null_identity);
    report.at_most("energy_recomposition", recomp, tol.recomposition);
    Ok(report)
}
