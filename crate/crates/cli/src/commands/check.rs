use cfinsler_core::lagrangian::{check_ellipticity, check_euler_identities, check_homogeneity, check_infinitesimal_invariance};
use cfinsler_core::sampling::{random_lambda, rng};
use cfinsler_core::{Complex64, HolomorphicField};

use super::{jet_header, jet_row, lagrangian, lambdas, samples, AUX_STREAM};
use crate::table::Table;
use crate::{CliError, Context, Report};

/// Generators `1, t, t², it²` of the holomorphic vector fields used in the
/// infinitesimal check.
fn generators() -> Vec<HolomorphicField> {
    let one = Complex64::new(1.0, 0.0);
    vec![
        HolomorphicField::monomial(one, 0),
        HolomorphicField::monomial(one, 1),
        HolomorphicField::monomial(one, 2),
        HolomorphicField::monomial(Complex64::new(0.0, 1.0), 2),
    ]
}

pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let l = lagrangian(ctx)?;
    let tol = &ctx.config.tolerances;
    let jets = samples(ctx, l.dim());
    let lams = lambdas(ctx, ctx.config.samples.lambdas.max(1));
    let mut report = Report::new(format!("check: {}, n = {}, {} samples", l.family(), l.dim(), jets.len()));

    let mut header = jet_header(l.dim());
    header.extend(["F", "homogeneity", "euler_1", "euler_2", "invariance"].map(String::from));
    let mut table = Table::new(header);

    let fields = generators();
    let mut r = rng(ctx.config.seed ^ AUX_STREAM);
    let (mut hom, mut eul, mut inv) = (0.0f64, 0.0f64, 0.0f64);
    for s in &jets {
        let f = l.value(s);
        let h = check_homogeneity(&l, std::slice::from_ref(s), &lams)?.max_rel_error;
        let (r1, r2) = check_euler_identities(&l, s)?;
        let scale = 1.0 + f.abs();
        let t = random_lambda(&mut r, (0.2, 2.0));
        let mut worst = 0.0f64;
        for x in &fields {
            let res = check_infinitesimal_invariance(&l, x, t, s)?;
            worst = worst.max(res.abs() / (scale * x.derivative(t).norm().max(1.0)));
        }
        hom = hom.max(h);
        eul = eul.max(r1.abs().max(r2.abs()) / scale);
        inv = inv.max(worst);
        let mut row = jet_row(s);
        row.extend([f, h, r1, r2, worst]);
        table.push(row);
    }
    table.write(&ctx.artifact("check.csv"))?;

    report.at_most("homogeneity", hom, tol.homogeneity);
    report.at_most("euler_identities", eul, tol.euler);
    report.at_most("infinitesimal_invariance", inv, tol.invariance);
    let ell = check_ellipticity(&l, &jets)?;
    report.note(format!("ellipticity c_est = {:.6e} at sample {}", ell.c_est, ell.worst));
    report.at_least("ellipticity_c_est", ell.c_est, f64::MIN_POSITIVE);
    Ok(report)
}
