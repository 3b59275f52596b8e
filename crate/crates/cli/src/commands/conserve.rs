use cfinsler_core::conservation::{divergence_residual, holomorphy_residual, hopf};
use cfinsler_core::elsolve::coons_init;

use super::lagrangian;
use super::solve::{boundary, options, solve_logged};
use crate::table::Table;
use crate::{CliError, Context, Report};

/// Hopf differential and divergence of the energy–momentum tensor along the
/// configured map, or along the Dirichlet solution with its boundary values.
pub fn run(ctx: &Context, solve: bool) -> Result<Report, CliError> {
    let l = lagrangian(ctx)?;
    let mut u = boundary(ctx, &l, None)?;
    if solve {
        u = solve_logged(&l, &u, &coons_init(&u), &options(ctx))?.solution;
    }
    let g = *u.grid();
    let f = hopf(&l, &u)?;
    let div = divergence_residual(&l, &u)?;

    let mut hopf_t = Table::new(["x", "y", "re", "im"].map(String::from).to_vec());
    let mut div_t = Table::new(["x", "y", "div1", "div2"].map(String::from).to_vec());
    let mut div_max = 0.0f64;
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (x, y) = g.point(i, j);
            if let Some(v) = f.at(i, j) {
                hopf_t.push(vec![x, y, v.re, v.im]);
            }
            let (d1, d2) = (div[0].at(i, j)[0], div[1].at(i, j)[0]);
            div_max = div_max.max(d1.abs()).max(d2.abs());
            div_t.push(vec![x, y, d1, d2]);
        }
    }
    hopf_t.write(&ctx.artifact("hopf.csv"))?;
    div_t.write(&ctx.artifact("divergence.csv"))?;

    let tol = &ctx.config.tolerances;
    let source = if solve { "solution" } else { "map" };
    let mut report = Report::new(format!("conserve: {}, {source} on {}×{} nodes", l.family(), g.nx, g.ny));
    report.note(format!("max |f| = {:.6e}", f.max_abs()));
    report.at_most("hopf_holomorphy", holomorphy_residual(&f)?, tol.hopf_holomorphy);
    report.at_most("divergence", div_max, tol.divergence);
    Ok(report)
}
