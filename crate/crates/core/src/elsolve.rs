//! Discrete conformal energy, Euler–Lagrange residuals and a Dirichlet
//! solver by energy descent.

use log::{debug, info};
use nalgebra::DMatrix;

use crate::diffcore::{self, JetSample};
use crate::error::{ensure_finite, Error, Result};
use crate::grid::{Grid, GridField};
use crate::lagrangian::{min_eigenvalue, Lagrangian};
use crate::tensors::{christoffel, metric_inverse};

/// Scratch buffers for corner evaluations.
struct Scratch {
    d1: Vec<f64>,
    d2: Vec<f64>,
    dy: Vec<f64>,
    z1: Vec<f64>,
    z2: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch { d1: vec![0.0; n], d2: vec![0.0; n], dy: vec![0.0; n], z1: vec![0.0; n], z2: vec![0.0; n] }
    }
}

fn corner_gradients(lagr: &Lagrangian, y: &[f64], sc: &mut Scratch) {
    let ev = lagr.evaluator();
    let n = y.len();
    if !ev.grad_z(y, &sc.z1, &sc.z2, &mut sc.d1, &mut sc.d2) {
        let (g, _) = diffcore::grad_z_flat(lagr, y, &sc.z1, &sc.z2);
        sc.d1.copy_from_slice(&g[..n]);
        sc.d2.copy_from_slice(&g[n..]);
    }
    if !ev.grad_y(y, &sc.z1, &sc.z2, &mut sc.dy) {
        sc.dy = diffcore::grad_y_vec(lagr, y, &sc.z1, &sc.z2);
    }
}

/// Corner layout of one cell: `(corner, (x-edge from, to), (y-edge from, to))`.
fn cell_corners(g: &Grid, i: usize, j: usize) -> [(usize, (usize, usize), (usize, usize)); 4] {
    let (c00, c10, c01, c11) = (g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1));
    [
        (c00, (c00, c10), (c00, c01)),
        (c10, (c00, c10), (c10, c11)),
        (c01, (c01, c11), (c00, c01)),
        (c11, (c01, c11), (c10, c11)),
    ]
}

fn energy_impl(lagr: &Lagrangian, u: &GridField, mut grad: Option<&mut [f64]>) -> Result<f64> {
    let n = lagr.dim();
    if u.components() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.components() });
    }
    let g = *u.grid();
    let vals = u.values();
    let w = 0.25 * g.hx * g.hy;
    let (ihx, ihy) = (1.0 / g.hx, 1.0 / g.hy);
    let mut sc = Scratch::new(n);
    let mut total = 0.0;
    if let Some(gr) = grad.as_deref_mut() {
        gr.fill(0.0);
    }
    for i in 0..g.nx - 1 {
        for j in 0..g.ny - 1 {
            for (c, (xa, xb), (ya, yb)) in cell_corners(&g, i, j) {
                for k in 0..n {
                    sc.z1[k] = (vals[xb * n + k] - vals[xa * n + k]) * ihx;
                    sc.z2[k] = (vals[yb * n + k] - vals[ya * n + k]) * ihy;
                }
                let y = &vals[c * n..c * n + n];
                total += w * lagr.evaluator().value(y, &sc.z1, &sc.z2);
                if let Some(gr) = grad.as_deref_mut() {
                    corner_gradients(lagr, y, &mut sc);
                    for k in 0..n {
                        gr[c * n + k] += w * sc.dy[k];
                        let p1 = w * sc.d1[k] * ihx;
                        let p2 = w * sc.d2[k] * ihy;
                        gr[xb * n + k] += p1;
                        gr[xa * n + k] -= p1;
                        gr[yb * n + k] += p2;
                        gr[ya * n + k] -= p2;
                    }
                }
            }
        }
    }
    ensure_finite(&[total], "discrete energy")?;
    Ok(total)
}

/// Discrete energy `Σ_cells ¼·hx·hy·Σ_corners F(u_c, one-sided edge differences)`.
///
/// Exact for affine maps; its gradient reduces to the five-point Laplacian
/// for the flat Dirichlet energy.
pub fn energy(lagr: &Lagrangian, u: &GridField) -> Result<f64> {
    energy_impl(lagr, u, None)
}

/// Energy and its gradient with respect to the free (non-fixed) nodes.
pub fn energy_gradient(lagr: &Lagrangian, u: &GridField) -> Result<(f64, GridField)> {
    let mut grad = GridField::zeros(*u.grid(), u.components());
    let e = energy_impl(lagr, u, Some(grad.values_mut()))?;
    mask_fixed(u, &mut grad);
    ensure_finite(grad.values(), "energy gradient")?;
    Ok((e, grad))
}

fn mask_fixed(u: &GridField, grad: &mut GridField) {
    let n = u.components();
    let mask = u.fixed_mask().to_vec();
    for (idx, fixed) in mask.iter().enumerate() {
        if *fixed {
            grad.values_mut()[idx * n..idx * n + n].fill(0.0);
        }
    }
}

/// Interior residual of the Euler–Lagrange system and the magnitude of its
/// largest term.
#[derive(Debug, Clone, PartialEq)]
pub struct ElResidual {
    pub residual: GridField,
    pub scale: f64,
}

impl ElResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.max_abs()
    }

    pub fn relative(&self) -> f64 {
        self.max_abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

struct Derivatives {
    z1: Vec<f64>,
    z2: Vec<f64>,
    d11: Vec<f64>,
    d22: Vec<f64>,
    d12: Vec<f64>,
}

fn derivatives(u: &GridField, i: usize, j: usize) -> Derivatives {
    let g = u.grid();
    let n = u.components();
    let mut d = Derivatives { z1: vec![0.0; n], z2: vec![0.0; n], d11: vec![0.0; n], d22: vec![0.0; n], d12: vec![0.0; n] };
    u.d1(i, j, &mut d.z1);
    u.d2(i, j, &mut d.z2);
    let c = u.at(i, j);
    for k in 0..n {
        d.d11[k] = (u.at(i + 1, j)[k] - 2.0 * c[k] + u.at(i - 1, j)[k]) / (g.hx * g.hx);
        d.d22[k] = (u.at(i, j + 1)[k] - 2.0 * c[k] + u.at(i, j - 1)[k]) / (g.hy * g.hy);
        d.d12[k] = (u.at(i + 1, j + 1)[k] - u.at(i + 1, j - 1)[k] - u.at(i - 1, j + 1)[k] + u.at(i - 1, j - 1)[k])
            / (4.0 * g.hx * g.hy);
    }
    d
}

/// `G^{αβ}_{jk} ∂_α∂_β uᵏ + ∂²F/∂z^j_α∂yᵏ ∂_α uᵏ − ∂F/∂yʲ` at interior nodes.
pub fn el_residual(lagr: &Lagrangian, u: &GridField) -> Result<ElResidual> {
    let n = lagr.dim();
    if u.components() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.components() });
    }
    let g = *u.grid();
    let mut out = GridField::zeros(g, n);
    let mut scale: f64 = 0.0;
    for (i, j) in g.interior() {
        let d = derivatives(u, i, j);
        let s = JetSample { y: u.at(i, j).to_vec(), z1: d.z1.clone(), z2: d.z2.clone() };
        let h = diffcore::eval_hessian_z(lagr, &s)?;
        let mixed = diffcore::eval_mixed_zy(lagr, &s)?;
        let dfdy = diffcore::grad_y_vec(lagr, &s.y, &s.z1, &s.z2);
        let second = [[&d.d11, &d.d12], [&d.d12, &d.d22]];
        let first = [&d.z1, &d.z2];
        for jj in 0..n {
            let mut r = -dfdy[jj];
            let mut mag = dfdy[jj].abs();
            for a in 0..2 {
                for k in 0..n {
                    for b in 0..2 {
                        let t = h.matrix[(a * n + jj, b * n + k)] * second[a][b][k];
                        r += t;
                        mag = mag.max(t.abs());
                    }
                    let t = mixed[(a * n + jj, k)] * first[a][k];
                    r += t;
                    mag = mag.max(t.abs());
                }
            }
            out.at_mut(i, j)[jj] = r;
            scale = scale.max(mag);
        }
    }
    ensure_finite(out.values(), "Euler-Lagrange residual")?;
    Ok(ElResidual { residual: out, scale })
}

/// Geometric form for z-independent metrics:
/// `Δuᵐ + Γᵐ_kl(∂₁uᵏ∂₁uˡ + ∂₂uᵏ∂₂uˡ) − ½ g^{mj}(dω)_{jkl}(∂₁uᵏ∂₂uˡ − ∂₂uᵏ∂₁uˡ)`.
///
/// Equals `g⁻¹` times [`el_residual`] up to roundoff in the difference quotients.
pub fn el_residual_geometric(lagr: &Lagrangian, u: &GridField) -> Result<ElResidual> {
    let n = lagr.dim();
    if u.components() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.components() });
    }
    let g = *u.grid();
    let mut out = GridField::zeros(g, n);
    let mut scale: f64 = 0.0;
    for (i, j) in g.interior() {
        let d = derivatives(u, i, j);
        let y = u.at(i, j);
        let ch = christoffel(lagr, y)?;
        let (gm, _) = lagr.hermitian_parts(y).expect("christoffel succeeded");
        let ginv = metric_inverse(&gm)?;
        for m in 0..n {
            let lap = d.d11[m] + d.d22[m];
            let mut gam = 0.0;
            let mut tw = 0.0;
            for k in 0..n {
                for l in 0..n {
                    gam += ch.gamma(m, k, l) * (d.z1[k] * d.z1[l] + d.z2[k] * d.z2[l]);
                    let x = d.z1[k] * d.z2[l] - d.z2[k] * d.z1[l];
                    for jj in 0..n {
                        tw += ginv[(m, jj)] * ch.d_omega(jj, k, l) * x;
                    }
                }
            }
            out.at_mut(i, j)[m] = lap + gam - 0.5 * tw;
            scale = scale.max(lap.abs()).max(d.d11[m].abs()).max(gam.abs()).max((0.5 * tw).abs());
        }
    }
    ensure_finite(out.values(), "geometric Euler-Lagrange residual")?;
    Ok(ElResidual { residual: out, scale })
}

/// Max over interior nodes of `|g⁻¹·raw − geometric|`, relative to the term scale.
pub fn geometric_agreement(lagr: &Lagrangian, u: &GridField) -> Result<f64> {
    let raw = el_residual(lagr, u)?;
    let geo = el_residual_geometric(lagr, u)?;
    let g = *u.grid();
    let n = lagr.dim();
    let mut err: f64 = 0.0;
    for (i, j) in g.interior() {
        let (gm, _) = lagr.hermitian_parts(u.at(i, j)).expect("hermitian");
        let ginv = metric_inverse(&gm)?;
        let r = DMatrix::from_column_slice(n, 1, raw.residual.at(i, j));
        let mapped = &ginv * r;
        for m in 0..n {
            err = err.max((mapped[(m, 0)] - geo.residual.at(i, j)[m]).abs());
        }
    }
    Ok(err / geo.scale.max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop when `‖∇E‖_∞ / (hx·hy) ≤ tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Optional bound on `el_residual ≤ res_tol · scale` at the solution.
    pub res_tol: Option<f64>,
    /// Interval (in iterations) between ellipticity and chart checks.
    pub check_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_iters: 50_000, res_tol: None, check_every: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: GridField,
    pub iterations: usize,
    pub energy: f64,
    pub grad_norm: f64,
    /// Energy after each accepted step, starting with the initial field.
    pub energy_history: Vec<f64>,
    pub residual: ElResidual,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn check_chart(lagr: &Lagrangian, u: &GridField) -> Result<()> {
    if let Some(limit) = lagr.chart_radius() {
        let n = u.components();
        let radius = u
            .values()
            .chunks(n)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if !(radius <= limit) {
            return Err(Error::ChartOverflow { radius, limit });
        }
    }
    Ok(())
}

fn check_ellipticity_along(lagr: &Lagrangian, u: &GridField) -> Result<()> {
    let g = u.grid();
    for fi in [1, 2, 3] {
        for fj in [1, 2, 3] {
            let i = (g.nx * fi / 4).clamp(1, g.nx - 2);
            let j = (g.ny * fj / 4).clamp(1, g.ny - 2);
            let d = derivatives(u, i, j);
            let s = JetSample { y: u.at(i, j).to_vec(), z1: d.z1, z2: d.z2 };
            if s.is_zero() {
                continue;
            }
            let h = diffcore::eval_hessian_z(lagr, &s)?;
            let lam = min_eigenvalue(&h.matrix)?;
            if lam <= 0.0 {
                return Err(Error::EllipticityLost { min_eigenvalue: lam });
            }
        }
    }
    Ok(())
}

/// Initial field from the boundary values of `boundary` by Coons interpolation.
pub fn coons_init(boundary: &GridField) -> GridField {
    boundary.coons_fill()
}

/// Minimizes the discrete energy with the fixed nodes of `boundary` held.
///
/// Barzilai–Borwein steps safeguarded by an Armijo test. Near convergence,
/// where energy differences fall below floating-point resolution, the
/// decrease is measured by the trapezoidal estimate `½(g₀+g₁)·(x₁−x₀)`.
pub fn solve_dirichlet(lagr: &Lagrangian, boundary: &GridField, init: &GridField, opts: &SolveOptions) -> Result<SolveReport> {
    let n = lagr.dim();
    if boundary.components() != n {
        return Err(Error::DimensionMismatch { expected: n, got: boundary.components() });
    }
    ensure_finite(boundary.values(), "boundary data")?;
    let mut u = init.clone();
    boundary.impose_fixed_on(&mut u)?;
    ensure_finite(u.values(), "initial field")?;
    check_chart(lagr, &u)?;
    check_ellipticity_along(lagr, &u)?;
    let g = *u.grid();
    let area = g.hx * g.hy;
    let cmax = {
        let s = JetSample { y: u.at(g.nx / 2, g.ny / 2).to_vec(), z1: vec![1.0; n], z2: vec![0.0; n] };
        let h = diffcore::eval_hessian_z(lagr, &s)?;
        h.matrix.iter().fold(1e-12f64, |m, v| m.max(v.abs())) * n as f64
    };
    let alpha0 = 1.0 / (4.0 * cmax * (g.hx / g.hy + g.hy / g.hx));
    let (mut e, mut grad) = energy_gradient(lagr, &u)?;
    let mut history = vec![e];
    let mut alpha = alpha0;
    let mut iterations = 0;
    let mut gnorm = inf_norm(grad.values()) / area;
    while gnorm > opts.tol {
        if iterations >= opts.max_iters {
            return Err(Error::NoConvergence { iterations, residual: gnorm });
        }
        let gg = dot(grad.values(), grad.values());
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = u.clone();
            for (t, gv) in trial.values_mut().iter_mut().zip(grad.values()) {
                *t -= step * gv;
            }
            let (et, gt) = energy_gradient(lagr, &trial)?;
            let resolution = 1e-13 * (1.0 + e.abs());
            let decrease = if (e - et).abs() > resolution {
                et - e
            } else {
                -0.5 * step * (gg + dot(grad.values(), gt.values()))
            };
            if decrease <= -1e-4 * step * gg && et <= e + resolution {
                accepted = Some((trial, et, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((un, en, gn)) = accepted else {
            return Err(Error::NoConvergence { iterations, residual: gnorm });
        };
        let mut sy = 0.0;
        let mut ss = 0.0;
        for ((a, b), (ga, gb)) in un.values().iter().zip(u.values()).zip(gn.values().iter().zip(grad.values())) {
            let s = a - b;
            sy += s * (ga - gb);
            ss += s * s;
        }
        alpha = if sy > 0.0 { ss / sy } else { alpha0 };
        u = un;
        e = en;
        grad = gn;
        history.push(e);
        iterations += 1;
        gnorm = inf_norm(grad.values()) / area;
        if iterations % opts.check_every.max(1) == 0 {
            check_chart(lagr, &u)?;
            check_ellipticity_along(lagr, &u)?;
            debug!("iteration {iterations}: energy {e:.12e}, gradient {gnorm:.3e}");
        }
    }
    check_chart(lagr, &u)?;
    let residual = el_residual(lagr, &u)?;
    info!("solve_dirichlet converged in {iterations} iterations, energy {e:.12e}");
    if let Some(rt) = opts.res_tol {
        if residual.max_abs() > rt * residual.scale.max(1.0) {
            return Err(Error::NoConvergence { iterations, residual: residual.max_abs() });
        }
    }
    Ok(SolveReport { solution: u, iterations, energy: e, grad_norm: gnorm, energy_history: history, residual })
}
