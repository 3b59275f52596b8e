use std::path::Path;

use cfinsler_core::elsolve::{coons_init, solve_dirichlet, SolveOptions, SolveReport};
use cfinsler_core::{GridField, Lagrangian};
use log::info;

use super::lagrangian;
use crate::table::Table;
use crate::{CliError, Context, Report};

pub(crate) fn options(ctx: &Context) -> SolveOptions {
    let s = &ctx.config.solver;
    SolveOptions { tol: s.tol, max_iters: s.max_iters, res_tol: s.res_tol, check_every: s.check_every }
}

/// Boundary values from `path`, or the configured map sampled on the grid.
pub(crate) fn boundary(ctx: &Context, l: &Lagrangian, path: Option<&Path>) -> Result<GridField, CliError> {
    let g = ctx.config.grid.build()?;
    let n = l.dim();
    match path {
        Some(p) => Table::read(p)?.to_field(g, n, "u"),
        None => {
            let map = ctx.config.boundary.to_map();
            if map.dim() != n {
                return Err(CliError::Config(format!("boundary map has {} components, the Lagrangian {n}", map.dim())));
            }
            Ok(map.sample(g))
        }
    }
}

pub(crate) fn solve_logged(l: &Lagrangian, b: &GridField, init: &GridField, opts: &SolveOptions) -> Result<SolveReport, CliError> {
    let rep = solve_dirichlet(l, b, init, opts)?;
    for (k, e) in rep.energy_history.iter().enumerate() {
        info!("iteration {k}: energy {e:.16e}");
    }
    Ok(rep)
}

pub fn run(ctx: &Context, boundary_csv: Option<&Path>, init_csv: Option<&Path>) -> Result<Report, CliError> {
    let l = lagrangian(ctx)?;
    let b = boundary(ctx, &l, boundary_csv)?;
    let init = match init_csv {
        Some(p) => Table::read(p)?.to_field(*b.grid(), l.dim(), "u")?,
        None => coons_init(&b),
    };
    let opts = options(ctx);
    let rep = solve_logged(&l, &b, &init, &opts)?;
    Table::from_field(&rep.solution, "u").write(&ctx.artifact("solution.csv"))?;
    Table::from_field(&rep.residual.residual, "r").write(&ctx.artifact("residual.csv"))?;

    let g = b.grid();
    let mut report = Report::new(format!("solve: {}, {}×{} nodes", l.family(), g.nx, g.ny));
    report.note(format!("{} iterations, energy {:.12e}", rep.iterations, rep.energy));
    report.note(format!("Euler–Lagrange residual {:.3e} (relative {:.3e})", rep.residual.max_abs(), rep.residual.relative()));
    if boundary_csv.is_none() {
        let exact = ctx.config.boundary.to_map().sample(*g);
        report.note(format!("max deviation from the boundary map {:.3e}", rep.solution.max_diff(&exact)?));
    }
    report.at_most("gradient_norm", rep.grad_norm, opts.tol);
    if let Some(rt) = opts.res_tol {
        report.at_most("el_residual_relative", rep.residual.max_abs() / rep.residual.scale.max(1.0), rt);
    }
    Ok(report)
}
