use std::path::Path;

use cfinsler_core::sampling::{random_cotangent, rng};
use cfinsler_core::weyl::{hamilton_residual, legendre_forward, legendre_inverse, weyl_hamiltonian_with_point};
use cfinsler_core::{CotangentSample, GridField, JetSample, Lagrangian};

use super::{columns, cotangent_header, cotangent_row, jet_header, jet_row, lagrangian, lambdas, max_abs_diff, samples, AUX_STREAM};
use crate::table::{numbered, Table};
use crate::{CliError, Context, Report, WeylMode};

pub fn run(ctx: &Context, mode: WeylMode, input: Option<&Path>) -> Result<Report, CliError> {
    let l = lagrangian(ctx)?;
    match mode {
        WeylMode::Roundtrip => roundtrip(ctx, &l),
        WeylMode::Hamiltonian => hamiltonian(ctx, &l, input),
        WeylMode::Residual => residual(ctx, &l),
    }
}

fn random_cotangents(ctx: &Context, n: usize) -> Vec<CotangentSample> {
    let mut r = rng(ctx.config.seed ^ AUX_STREAM);
    (0..ctx.config.samples.count).map(|_| random_cotangent(&mut r, n, ctx.config.samples.ranges())).collect()
}

fn roundtrip(ctx: &Context, l: &Lagrangian) -> Result<Report, CliError> {
    let n = l.dim();
    let tol = &ctx.config.tolerances;
    let mut report = Report::new(format!("weyl roundtrip: {}, n = {n}", l.family()));
    let mut header = jet_header(n);
    header.extend(numbered("p1_", n));
    header.extend(numbered("p2_", n));
    header.push("error".into());
    let mut table = Table::new(header);
    let mut forward_err = 0.0f64;
    for s in samples(ctx, n) {
        let p = legendre_forward(l, &s)?;
        let back = legendre_inverse(l, &p)?;
        let e = max_abs_diff(&back.z_flat(), &s.z_flat());
        forward_err = forward_err.max(e);
        let mut row = jet_row(&s);
        row.extend(p.p1.iter().chain(&p.p2));
        row.push(e);
        table.push(row);
    }
    table.write(&ctx.artifact("weyl_roundtrip.csv"))?;

    let cots = random_cotangents(ctx, n);
    let lams = lambdas(ctx, cots.len());
    let (mut inverse_err, mut ident, mut hom) = (0.0f64, 0.0f64, 0.0f64);
    for (c, lam) in cots.iter().zip(&lams) {
        let (z, h) = weyl_hamiltonian_with_point(l, c)?;
        let again = legendre_forward(l, &z)?;
        inverse_err = inverse_err.max(max_abs_diff(&again.p1, &c.p1).max(max_abs_diff(&again.p2, &c.p2)));
        ident = ident.max((h - l.value(&z)).abs() / (1.0 + h.abs()));
        let (_, hl) = weyl_hamiltonian_with_point(l, &c.scaled(*lam))?;
        hom = hom.max((hl - lam.norm_sqr() * h).abs() / (1.0 + hl.abs()));
    }
    report.at_most("inverse_after_forward", forward_err, tol.weyl_roundtrip);
    report.at_most("forward_after_inverse", inverse_err, tol.weyl_roundtrip);
    report.at_most("hamiltonian_equals_f", ident, tol.weyl_identity);
    report.at_most("hamiltonian_homogeneity", hom, tol.weyl_identity);
    Ok(report)
}

fn hamiltonian(ctx: &Context, l: &Lagrangian, input: Option<&Path>) -> Result<Report, CliError> {
    let n = l.dim();
    let cots = match input {
        Some(path) => {
            let t = Table::read(path)?;
            columns(&t, &cotangent_header(n))?
                .into_iter()
                .map(|r| CotangentSample::new(r[..n].to_vec(), r[n..2 * n].to_vec(), r[2 * n..].to_vec()))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => random_cotangents(ctx, n),
    };
    let mut report = Report::new(format!("weyl hamiltonian: {}, {} records", l.family(), cots.len()));
    let mut header = cotangent_header(n);
    header.push("H".into());
    header.extend(numbered("z1_", n));
    header.extend(numbered("z2_", n));
    let mut table = Table::new(header);
    let (mut ident, mut negative) = (0.0f64, 0.0f64);
    for c in &cots {
        let (z, h) = weyl_hamiltonian_with_point(l, c)?;
        ident = ident.max((h - l.value(&z)).abs() / (1.0 + h.abs()));
        negative = negative.max(-h);
        let mut row = cotangent_row(c);
        row.push(h);
        row.extend(z.z1.iter().chain(&z.z2));
        table.push(row);
    }
    table.write(&ctx.artifact("weyl_hamiltonian.csv"))?;
    report.at_most("hamiltonian_equals_f", ident, ctx.config.tolerances.weyl_identity);
    report.at_most("negative_hamiltonian", negative, 0.0);
    Ok(report)
}

/// Hamilton equations along the configured map with `p = 2∂F/∂z̄` of its
/// exact Jacobian.
fn residual(ctx: &Context, l: &Lagrangian) -> Result<Report, CliError> {
    let n = l.dim();
    let map = ctx.config.boundary.to_map();
    if map.dim() != n {
        return Err(CliError::Config(format!("boundary map has {} components, the Lagrangian {n}", map.dim())));
    }
    let g = ctx.config.grid.build()?;
    let u = map.sample(g);
    let mut p1 = GridField::zeros(g, n);
    let mut p2 = GridField::zeros(g, n);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (x, y) = g.point(i, j);
            let (z1, z2) = map.jacobian(x, y);
            let p = legendre_forward(l, &JetSample::new(u.at(i, j).to_vec(), z1, z2)?)?;
            p1.at_mut(i, j).copy_from_slice(&p.p1);
            p2.at_mut(i, j).copy_from_slice(&p.p2);
        }
    }
    let res = hamilton_residual(l, &u, &p1, &p2)?;
    let mut header = vec!["x".to_owned(), "y".to_owned()];
    for p in ["vel1_", "vel2_", "mom", "compat"] {
        header.extend(numbered(p, n));
    }
    let mut table = Table::new(header);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (x, y) = g.point(i, j);
            let mut row = vec![x, y];
            for f in [&res.velocity[0], &res.velocity[1], &res.momentum, &res.compatibility] {
                row.extend_from_slice(f.at(i, j));
            }
            table.push(row);
        }
    }
    table.write(&ctx.artifact("weyl_residual.csv"))?;
    let mut report = Report::new(format!("weyl residual: {}, {}×{} nodes", l.family(), g.nx, g.ny));
    report.at_most("hamilton_residual", res.max_abs(), ctx.config.tolerances.grid_residual);
    Ok(report)
}
