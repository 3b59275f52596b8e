//! Carathéodory–Rund theory with the level parameter `w`: the momenta
//! `(ε, π)`, their Plücker invariants, the inversion through the function
//! `W`, the Hamiltonian `𝓗` and the field equations as residuals.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::diffcore::{self, JetSample};
use crate::error::{ensure_finite, Error, Result};
use crate::grid::GridField;
use crate::lagrangian::Lagrangian;
use crate::linalg::{complex_inverse, max_abs, sym_eigenvalues};
use crate::newton::{self, Problem};
use crate::weyl::{self, CotangentSample};

/// `H[(α, β)] = H^α_β = z^i_β ∂L/∂z^i_α − δ^α_β L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMomentum {
    pub h: Matrix2<f64>,
}

impl EnergyMomentum {
    pub fn trace(&self) -> f64 {
        self.h.trace()
    }

    /// `H^1_2 − H^2_1`.
    pub fn antisymmetry(&self) -> f64 {
        self.h[(0, 1)] - self.h[(1, 0)]
    }

    /// `f = (H¹₁ − H²₂) − i(H¹₂ + H²₁)`.
    pub fn hopf(&self) -> Complex64 {
        Complex64::new(self.h[(0, 0)] - self.h[(1, 1)], -(self.h[(0, 1)] + self.h[(1, 0)]))
    }
}

pub fn energy_momentum(lagr: &Lagrangian, s: &JetSample) -> Result<EnergyMomentum> {
    lagr.check_dim(s.dim())?;
    if s.is_zero() {
        return Ok(EnergyMomentum { h: Matrix2::zeros() });
    }
    let jet = diffcore::eval_first(lagr, s)?;
    Ok(EnergyMomentum { h: hmat(&jet.dfdz, jet.value, s) })
}

/// `(∂F/∂z)·Z − F·I`.
fn hmat(dfdz: &DMatrix<f64>, f: f64, s: &JetSample) -> Matrix2<f64> {
    let zs = [&s.z1, &s.z2];
    Matrix2::from_fn(|a, b| {
        let c: f64 = (0..s.dim()).map(|j| dfdz[(a, j)] * zs[b][j]).sum();
        if a == b {
            c - f
        } else {
            c
        }
    })
}

/// Carathéodory momenta: `eps[(α, β)] = ε^α_β`, row `α` of `pi` is `π^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct CaraMomenta {
    pub eps: Matrix2<f64>,
    pub pi: DMatrix<f64>,
}

impl CaraMomenta {
    pub fn new(eps: Matrix2<f64>, pi: DMatrix<f64>) -> Result<Self> {
        if pi.nrows() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: pi.nrows() });
        }
        ensure_finite(eps.as_slice(), "ε")?;
        ensure_finite(pi.as_slice(), "π")?;
        Ok(CaraMomenta { eps, pi })
    }

    pub fn dim(&self) -> usize {
        self.pi.ncols()
    }

    /// `πZ + ε`, with entry `(α, β) = π^α·z_β + ε^α_β`.
    pub fn matrix(&self, z1: &[f64], z2: &[f64]) -> Matrix2<f64> {
        let zs = [z1, z2];
        Matrix2::from_fn(|a, b| {
            let c: f64 = (0..self.dim()).map(|j| self.pi[(a, j)] * zs[b][j]).sum();
            c + self.eps[(a, b)]
        })
    }

    pub fn determinant(&self, s: &JetSample) -> f64 {
        self.matrix(&s.z1, &s.z2).determinant()
    }
}

/// Gauge `T = |F+w|^{-1/2}·diag(±1, 1)` with `det T = 1/(F+w)`.
pub fn default_gauge(level: f64) -> Result<Matrix2<f64>> {
    if !(level.abs() >= 1e-12) {
        return Err(Error::DegenerateLevel { level });
    }
    let s = level.abs().sqrt().recip();
    Ok(if level > 0.0 { Matrix2::new(s, 0.0, 0.0, s) } else { Matrix2::new(-s, 0.0, 0.0, s) })
}

/// `π = T ∂F/∂z`, `ε = wT − T·H` for a gauge with `(F+w) det T = 1`.
pub fn forward(lagr: &Lagrangian, s: &JetSample, w: f64, gauge: Option<Matrix2<f64>>) -> Result<CaraMomenta> {
    lagr.check_dim(s.dim())?;
    let n = s.dim();
    let (f, dfdz) = if s.is_zero() {
        (0.0, DMatrix::zeros(2, n))
    } else {
        let j = diffcore::eval_first(lagr, s)?;
        (j.value, j.dfdz)
    };
    let level = f + w;
    if !(level.abs() >= 1e-12) {
        return Err(Error::DegenerateLevel { level });
    }
    let t = match gauge {
        Some(t) => {
            let deviation = (t.determinant() * level - 1.0).abs();
            if !(deviation <= 1e-10) {
                return Err(Error::BadGauge { deviation });
            }
            t
        }
        None => default_gauge(level)?,
    };
    let tm = DMatrix::from_column_slice(2, 2, t.as_slice());
    let pi = &tm * &dfdz;
    let eps = t * w - t * hmat(&dfdz, f, s);
    CaraMomenta::new(eps, pi)
}

/// The SL(2, ℝ)-invariant 2×2 minors of `(π | ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlueckerA {
    n: usize,
    /// Strict upper triangle of `A_{jk}`, row-major.
    vec_upper: Vec<f64>,
    /// `A_{j,n+2}`.
    pub col_a: DVector<f64>,
    /// `A_{n+1,k}`.
    pub row_a: DVector<f64>,
    /// `A_{n+1,n+2} = det ε`.
    pub scalar_a: f64,
}

impl PlueckerA {
    /// Builds invariants from an antisymmetric `vecA` (only its upper triangle is read).
    pub fn new(vec_a: &DMatrix<f64>, col_a: DVector<f64>, row_a: DVector<f64>, scalar_a: f64) -> Result<Self> {
        let n = col_a.len();
        if vec_a.shape() != (n, n) || row_a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row_a.len().max(vec_a.nrows()) });
        }
        let mut vec_upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for j in 0..n {
            for k in j + 1..n {
                vec_upper.push(vec_a[(j, k)]);
            }
        }
        ensure_finite(&vec_upper, "vecA")?;
        ensure_finite(col_a.as_slice(), "colA")?;
        ensure_finite(row_a.as_slice(), "rowA")?;
        ensure_finite(&[scalar_a], "scalarA")?;
        Ok(PlueckerA { n, vec_upper, col_a, row_a, scalar_a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn upper_index(&self, j: usize, k: usize) -> usize {
        j * self.n - j * (j + 1) / 2 + (k - j - 1)
    }

    /// `A_{jk}` for `j, k < n`.
    pub fn vec_a(&self, j: usize, k: usize) -> f64 {
        use std::cmp::Ordering;
        match j.cmp(&k) {
            Ordering::Equal => 0.0,
            Ordering::Less => self.vec_upper[self.upper_index(j, k)],
            Ordering::Greater => -self.vec_upper[self.upper_index(k, j)],
        }
    }

    pub fn vec_a_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |j, k| self.vec_a(j, k))
    }

    pub fn vec_upper(&self) -> &[f64] {
        &self.vec_upper
    }

    /// `colA + i·rowA`.
    pub fn source(&self) -> Vec<Complex64> {
        self.col_a.iter().zip(self.row_a.iter()).map(|(c, r)| Complex64::new(*c, *r)).collect()
    }

    /// Same `vecA` and `scalarA`, source scaled by `λ`.
    pub fn with_scaled_source(&self, lambda: Complex64) -> PlueckerA {
        let v: Vec<Complex64> = self.source().iter().map(|s| s * lambda).collect();
        PlueckerA {
            col_a: DVector::from_iterator(self.n, v.iter().map(|c| c.re)),
            row_a: DVector::from_iterator(self.n, v.iter().map(|c| c.im)),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.vec_upper)
            .max(self.col_a.amax())
            .max(self.row_a.amax())
            .max(self.scalar_a.abs())
    }

    /// Max entrywise difference between two invariant sets.
    pub fn distance(&self, other: &PlueckerA) -> f64 {
        let v = self.vec_upper.iter().zip(&other.vec_upper).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        v.max((&self.col_a - &other.col_a).amax())
            .max((&self.row_a - &other.row_a).amax())
            .max((self.scalar_a - other.scalar_a).abs())
    }
}

pub fn pluecker(m: &CaraMomenta) -> PlueckerA {
    let n = m.dim();
    let col = |c: usize| -> (f64, f64) {
        if c < n {
            (m.pi[(0, c)], m.pi[(1, c)])
        } else {
            (m.eps[(0, c - n)], m.eps[(1, c - n)])
        }
    };
    let minor = |a: usize, b: usize| {
        let (a0, a1) = col(a);
        let (b0, b1) = col(b);
        a0 * b1 - b0 * a1
    };
    let mut vec_upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 0..n {
        for k in j + 1..n {
            vec_upper.push(minor(j, k));
        }
    }
    PlueckerA {
        n,
        vec_upper,
        col_a: DVector::from_fn(n, |j, _| minor(j, n + 1)),
        row_a: DVector::from_fn(n, |k, _| minor(n, k)),
        scalar_a: minor(n, n + 1),
    }
}

/// `(ε, π) ↦ (gε, gπ)` for `g ∈ SL(2, ℝ)`.
pub fn gauge_act(g: &Matrix2<f64>, m: &CaraMomenta) -> Result<CaraMomenta> {
    let det = g.determinant();
    if !((det - 1.0).abs() <= 1e-12) {
        return Err(Error::NotUnimodular { det });
    }
    let gm = DMatrix::from_column_slice(2, 2, g.as_slice());
    CaraMomenta::new(g * m.eps, &gm * &m.pi)
}

/// `W(y, z, A) = A_{jk} z₁ʲ z₂ᵏ + A_{j,n+2} z₁ʲ + A_{n+1,k} z₂ᵏ + A_{n+1,n+2} − F(y, z)`,
/// which equals `det(πZ + ε) − F` for momenta with invariants `A`.
pub fn w_function(lagr: &Lagrangian, y: &[f64], z1: &[f64], z2: &[f64], a: &PlueckerA) -> f64 {
    let n = a.dim();
    let mut acc = a.scalar_a;
    for j in 0..n {
        acc += a.col_a[j] * z1[j] + a.row_a[j] * z2[j];
        for k in 0..n {
            acc += a.vec_a(j, k) * z1[j] * z2[k];
        }
    }
    acc - lagr.value_at(y, z1, z2)
}

struct StationaryW<'a> {
    lagr: &'a Lagrangian,
    y: &'a [f64],
    a: &'a PlueckerA,
    v: DMatrix<f64>,
}

impl Problem for StationaryW<'_> {
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.a.dim();
        let (z1, z2) = (&x[..n], &x[n..]);
        let (p, _) = diffcore::grad_z_flat(self.lagr, self.y, z1, z2);
        let mut g = vec![0.0; 2 * n];
        for j in 0..n {
            let mut v2 = 0.0;
            let mut v1 = 0.0;
            for k in 0..n {
                v2 += self.v[(j, k)] * z2[k];
                v1 += self.v[(j, k)] * z1[k];
            }
            g[j] = v2 + self.a.col_a[j] - p[j];
            g[n + j] = -v1 + self.a.row_a[j] - p[n + j];
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        w_hessian(self.lagr, self.y, x, &self.v)
    }
}

fn w_hessian(lagr: &Lagrangian, y: &[f64], x: &[f64], v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = y.len();
    let raw = diffcore::hessian_z_raw(lagr, y, &x[..n], &x[n..]);
    let g = DMatrix::from_row_slice(2 * n, 2 * n, &raw);
    let mut h = -(&g + g.transpose()) * 0.5;
    for j in 0..n {
        for k in 0..n {
            h[(j, n + k)] += v[(j, k)];
            h[(n + j, k)] += v[(k, j)];
        }
    }
    h
}

fn non_unique(h: &DMatrix<f64>) -> Result<Option<f64>> {
    let eig = sym_eigenvalues(h)?;
    let big = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let small = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(if small < 1e-10 * big.max(1.0) { Some(small) } else { None })
}

/// Follows the stationary point from `τ = 0` (the Weyl problem, solved by
/// `x0`) to `τ = 1` along `vecA → τ·vecA`, with adaptive steps in `τ`.
fn continuation(lagr: &Lagrangian, y: &[f64], a: &PlueckerA, v: &DMatrix<f64>, x0: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let (mut tau, mut dt, mut x) = (0.0f64, 0.25f64, x0);
    while tau < 1.0 {
        if dt < 1.0 / 4096.0 {
            return None;
        }
        let next = (tau + dt).min(1.0);
        match newton::solve(&StationaryW { lagr, y, a, v: v * next }, x.clone(), tol) {
            Ok(out) => {
                tau = next;
                x = out.x;
                dt *= 2.0;
            }
            Err(_) => dt *= 0.5,
        }
    }
    log::debug!("stationary point of W reached by continuation in vecA");
    Some(x)
}

/// The stationary point `z = 𝒵(y, A)` of `W`.
pub fn solve_z(lagr: &Lagrangian, y: &[f64], a: &PlueckerA) -> Result<JetSample> {
    lagr.check_dim(y.len())?;
    lagr.check_dim(a.dim())?;
    let n = a.dim();
    let guess = CotangentSample::new(y.to_vec(), a.col_a.as_slice().to_vec(), a.row_a.as_slice().to_vec())?;
    let x0 = match weyl::legendre_inverse(lagr, &guess) {
        Ok(z) => z.z_flat(),
        Err(_) => guess.p1.iter().chain(&guess.p2).copied().collect(),
    };
    let v = a.vec_a_matrix();
    let tol = 1e-12 * (1.0 + a.max_abs());
    let x = match newton::solve(&StationaryW { lagr, y, a, v: v.clone() }, x0.clone(), tol) {
        Ok(out) => {
            log::trace!("stationary point of W: {} iterations, residual {:.3e}", out.iterations, out.residual);
            out.x
        }
        Err(e) => match continuation(lagr, y, a, &v, x0.clone(), tol) {
            Some(x) => x,
            None => {
                if let Some(min_eigenvalue) = non_unique(&w_hessian(lagr, y, &x0, &v))? {
                    return Err(Error::NonUniqueSuspect { min_eigenvalue });
                }
                return Err(e);
            }
        },
    };
    if let Some(min_eigenvalue) = non_unique(&w_hessian(lagr, y, &x, &v))? {
        return Err(Error::NonUniqueSuspect { min_eigenvalue });
    }
    JetSample::new(y.to_vec(), x[..n].to_vec(), x[n..].to_vec())
}

/// `𝓗(y, A)` with its stationary point and consistency data.
#[derive(Debug, Clone, PartialEq)]
pub struct CaraSolution {
    pub z: JetSample,
    /// `½(A_{j,n+2} z₁ʲ + A_{n+1,j} z₂ʲ) + A_{n+1,n+2}`.
    pub hamiltonian: f64,
    /// `W(y, 𝒵, A)`, the defining value of `𝓗`.
    pub w_value: f64,
    /// `A_{n+1,j} z₁ʲ − A_{j,n+2} z₂ʲ`, zero at the stationary point.
    pub side_residual: f64,
}

pub fn cara_hamiltonian(lagr: &Lagrangian, y: &[f64], a: &PlueckerA) -> Result<CaraSolution> {
    let z = solve_z(lagr, y, a)?;
    let n = a.dim();
    let mut half = 0.0;
    let mut side = 0.0;
    for j in 0..n {
        half += a.col_a[j] * z.z1[j] + a.row_a[j] * z.z2[j];
        side += a.row_a[j] * z.z1[j] - a.col_a[j] * z.z2[j];
    }
    let hamiltonian = 0.5 * half + a.scalar_a;
    let w_value = w_function(lagr, y, &z.z1, &z.z2, a);
    ensure_finite(&[hamiltonian, w_value], "Carathéodory Hamiltonian")?;
    Ok(CaraSolution { z, hamiltonian, w_value, side_residual: side })
}

/// Deviations of `H^α_β` from their expressions through `A`, `z` and `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `H¹₂ − A_{j,n+2} z₂ʲ`.
    pub h12: f64,
    /// `H²₁ − A_{n+1,k} z₁ᵏ`.
    pub h21: f64,
    /// `H¹₁ − (w − A_{n+1,k} z₂ᵏ − A_{n+1,n+2})`.
    pub h11: f64,
    /// `H²₂ − (w − A_{j,n+2} z₁ʲ − A_{n+1,n+2})`.
    pub h22: f64,
}

impl IdentityResiduals {
    pub fn max_abs(&self) -> f64 {
        self.h12.abs().max(self.h21.abs()).max(self.h11.abs()).max(self.h22.abs())
    }
}

pub fn identity_residuals(lagr: &Lagrangian, a: &PlueckerA, z: &JetSample, w: f64) -> Result<IdentityResiduals> {
    let h = energy_momentum(lagr, z)?.h;
    let ca1: f64 = a.col_a.iter().zip(&z.z1).map(|(x, y)| x * y).sum();
    let ca2: f64 = a.col_a.iter().zip(&z.z2).map(|(x, y)| x * y).sum();
    let ra1: f64 = a.row_a.iter().zip(&z.z1).map(|(x, y)| x * y).sum();
    let ra2: f64 = a.row_a.iter().zip(&z.z2).map(|(x, y)| x * y).sum();
    Ok(IdentityResiduals {
        h12: h[(0, 1)] - ca2,
        h21: h[(1, 0)] - ra1,
        h11: h[(0, 0)] - (w - ra2 - a.scalar_a),
        h22: h[(1, 1)] - (w - ca1 - a.scalar_a),
    })
}

/// Closed-form inversion when `F = ½ h_jk z̄ʲ zᵏ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianClosedForm {
    pub z: Vec<Complex64>,
    pub hamiltonian: f64,
    /// Imaginary part of the complex quadratic form, zero up to roundoff.
    pub imaginary: f64,
}

/// `h* = h + i·vecA`, `z = h*⁻¹(colA + i·rowA)`, `𝓗 = ½ v̄ᵀ K v + A_{n+1,n+2}`.
pub fn hermitian_closed_form(h: &DMatrix<Complex64>, a: &PlueckerA) -> Result<HermitianClosedForm> {
    let n = a.dim();
    if h.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, got: h.nrows() });
    }
    let va = a.vec_a_matrix();
    let hstar = DMatrix::from_fn(n, n, |j, k| h[(j, k)] + Complex64::new(0.0, va[(j, k)]));
    let k = complex_inverse(&hstar).ok_or(Error::SingularHStar)?;
    let v = DVector::from_vec(a.source());
    let z = &k * &v;
    let q = v.dotc(&z);
    Ok(HermitianClosedForm {
        z: z.iter().copied().collect(),
        hamiltonian: 0.5 * q.re + a.scalar_a,
        imaginary: 0.5 * q.im,
    })
}

/// The `(n+2) × (n+2)` matrix `G` whose kernel contains `ζ = (z, 1, i)`.
pub fn condensed_matrix(h: &DMatrix<Complex64>, a: &PlueckerA, w: f64, hten: &EnergyMomentum) -> DMatrix<Complex64> {
    let n = a.dim();
    let i = Complex64::new(0.0, 1.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut g = DMatrix::from_element(n + 2, n + 2, re(0.0));
    for j in 0..n {
        for k in 0..n {
            g[(j, k)] = h[(j, k)] + i * a.vec_a(j, k);
        }
        g[(j, n)] = -i * a.row_a[j];
        g[(j, n + 1)] = i * a.col_a[j];
        g[(n, j)] = i * a.row_a[j];
        g[(n + 1, j)] = -i * a.col_a[j];
    }
    let hm = hten.h;
    g[(n, n)] = re(w - hm[(0, 0)]);
    g[(n, n + 1)] = re(-hm[(1, 0)]) + i * a.scalar_a;
    g[(n + 1, n)] = re(-hm[(0, 1)]) - i * a.scalar_a;
    g[(n + 1, n + 1)] = re(w - hm[(1, 1)]);
    g
}

/// `‖Gζ‖` and the scale `‖G‖‖ζ‖` it should be compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensedResidual {
    pub residual: f64,
    pub scale: f64,
}

pub fn condensed_check(
    h: &DMatrix<Complex64>,
    a: &PlueckerA,
    z: &[Complex64],
    w: f64,
    hten: &EnergyMomentum,
) -> Result<CondensedResidual> {
    let n = a.dim();
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    let g = condensed_matrix(h, a, w, hten);
    let mut zeta: Vec<Complex64> = z.to_vec();
    zeta.push(Complex64::new(1.0, 0.0));
    zeta.push(Complex64::new(0.0, 1.0));
    let zeta = DVector::from_vec(zeta);
    Ok(CondensedResidual { residual: (&g * &zeta).norm(), scale: g.norm() * zeta.norm() })
}

fn adjugate(m: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// `T = (πZ+ε)/det(πZ+ε)` and `P = adj(πZ+ε) = T⁻¹`.
pub fn comatrix_t(m: &CaraMomenta, s: &JetSample) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let mz = m.matrix(&s.z1, &s.z2);
    let det = mz.determinant();
    if !(det.abs() >= 1e-12) {
        return Err(Error::DegenerateLevel { level: det });
    }
    Ok((mz / det, adjugate(&mz)))
}

/// Discrete residuals of the Carathéodory field equations.
#[derive(Debug, Clone, PartialEq)]
pub struct CaraFieldResidual {
    /// `∂_α(P̂^α_β π^β_j) − ∂F/∂yʲ(u, 𝒵)`, n components.
    pub u_eq: GridField,
    /// `P̂^β_α ∂_βuʲ − 𝒫^β_α 𝒵ʲ_β`, 2n components at `α·n + j`.
    pub pi_eq: GridField,
    /// `P̂ − 𝒫`, four components row-major.
    pub eps_eq: GridField,
    /// `∂_α(𝓗 δ^α_β − P̂^α_γ ε^γ_β)`, two components.
    pub conservation: GridField,
}

impl CaraFieldResidual {
    pub fn max_abs(&self) -> f64 {
        self.u_eq.max_abs().max(self.pi_eq.max_abs()).max(self.eps_eq.max_abs()).max(self.conservation.max_abs())
    }
}

/// Residuals at interior nodes; the two divergence-type equations are
/// evaluated one node further in.
pub fn cara_field_residual(
    lagr: &Lagrangian,
    u: &GridField,
    eps_field: &GridField,
    pi_field: &GridField,
) -> Result<CaraFieldResidual> {
    let n = lagr.dim();
    u.check_same_grid(eps_field)?;
    u.check_same_grid(pi_field)?;
    let expect = [(u, n), (eps_field, 4), (pi_field, 2 * n)];
    for (f, c) in expect {
        if f.components() != c {
            return Err(Error::GridMismatch { reason: format!("expected {c} components, got {}", f.components()) });
        }
    }
    let g = *u.grid();
    let mut flux_u = GridField::zeros(g, 2 * n);
    let mut flux_e = GridField::zeros(g, 4);
    let mut dfdy = GridField::zeros(g, n);
    let mut pi_eq = GridField::zeros(g, 2 * n);
    let mut eps_eq = GridField::zeros(g, 4);
    let (mut z1, mut z2) = (vec![0.0; n], vec![0.0; n]);
    for (i, j) in g.interior() {
        u.d1(i, j, &mut z1);
        u.d2(i, j, &mut z2);
        let e = eps_field.at(i, j);
        let m = CaraMomenta::new(Matrix2::new(e[0], e[1], e[2], e[3]), DMatrix::from_row_slice(2, n, pi_field.at(i, j)))?;
        let phat = adjugate(&m.matrix(&z1, &z2));
        let a = pluecker(&m);
        let y = u.at(i, j);
        let sol = cara_hamiltonian(lagr, y, &a)?;
        let zc = &sol.z;
        let pcal = adjugate(&m.matrix(&zc.z1, &zc.z2));
        let zs = [&z1, &z2];
        let zcs = [&zc.z1, &zc.z2];
        for alpha in 0..2 {
            for k in 0..n {
                let mut flux = 0.0;
                let mut r = 0.0;
                for beta in 0..2 {
                    flux += phat[(alpha, beta)] * m.pi[(beta, k)];
                    r += phat[(beta, alpha)] * zs[beta][k] - pcal[(beta, alpha)] * zcs[beta][k];
                }
                flux_u.at_mut(i, j)[alpha * n + k] = flux;
                pi_eq.at_mut(i, j)[alpha * n + k] = r;
            }
        }
        let pe = phat * m.eps;
        for alpha in 0..2 {
            for beta in 0..2 {
                let delta = if alpha == beta { sol.hamiltonian } else { 0.0 };
                flux_e.at_mut(i, j)[2 * alpha + beta] = delta - pe[(alpha, beta)];
                eps_eq.at_mut(i, j)[2 * alpha + beta] = phat[(alpha, beta)] - pcal[(alpha, beta)];
            }
        }
        dfdy.at_mut(i, j).copy_from_slice(&diffcore::grad_y_vec(lagr, y, &zc.z1, &zc.z2));
    }
    let mut u_eq = GridField::zeros(g, n);
    let mut conservation = GridField::zeros(g, 2);
    let (mut a1, mut a2) = (vec![0.0; 2 * n], vec![0.0; 2 * n]);
    let (mut e1, mut e2) = (vec![0.0; 4], vec![0.0; 4]);
    for (i, j) in g.inset(2) {
        flux_u.d1(i, j, &mut a1);
        flux_u.d2(i, j, &mut a2);
        for k in 0..n {
            u_eq.at_mut(i, j)[k] = a1[k] + a2[n + k] - dfdy.at(i, j)[k];
        }
        flux_e.d1(i, j, &mut e1);
        flux_e.d2(i, j, &mut e2);
        for beta in 0..2 {
            conservation.at_mut(i, j)[beta] = e1[beta] + e2[2 + beta];
        }
    }
    let out = CaraFieldResidual { u_eq, pi_eq, eps_eq, conservation };
    ensure_finite(&[out.max_abs()], "Carathéodory field residual")?;
    Ok(out)
}
