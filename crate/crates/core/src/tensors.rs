//! The metric bundle `(g, ω, a, b)` extracted from the z-Hessian, its
//! structural identities, and Christoffel data of z-independent metrics.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::diffcore::{self, HessianZ, JetSample, FD_DELTA};
use crate::error::{ensure_finite, Error, Result};
use crate::lagrangian::Lagrangian;
use crate::linalg::{hermitian_from_parts, sym_eigenvalues};

/// `g = ½(G¹¹+G²²)`, `ω = ½(G¹²−G²¹)`, `a = ½(G¹¹−G²²)`, `b = ½(G¹²+G²¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricBundle {
    pub g: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl MetricBundle {
    pub fn from_hessian(h: &HessianZ) -> Self {
        let (g11, g12, g21, g22) = (h.block(0, 0), h.block(0, 1), h.block(1, 0), h.block(1, 1));
        MetricBundle {
            g: (&g11 + &g22) * 0.5,
            omega: (&g12 - &g21) * 0.5,
            a: (&g11 - &g22) * 0.5,
            b: (&g12 + &g21) * 0.5,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `h = g − iω`.
    pub fn h(&self) -> DMatrix<Complex64> {
        hermitian_from_parts(&self.g, &self.omega)
    }

    /// The z-Hessian rebuilt as `[[g+a, ω+b], [−ω+b, g−a]]`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&(&self.g + &self.a));
        m.view_mut((0, n), (n, n)).copy_from(&(&self.omega + &self.b));
        m.view_mut((n, 0), (n, n)).copy_from(&(&self.b - &self.omega));
        m.view_mut((n, n), (n, n)).copy_from(&(&self.g - &self.a));
        m
    }

    /// Largest violation of the symmetry type of each tensor.
    pub fn symmetry_defect(&self) -> f64 {
        let sym = |m: &DMatrix<f64>| (m - m.transpose()).amax();
        let anti = (&self.omega + self.omega.transpose()).amax();
        sym(&self.g).max(sym(&self.a)).max(sym(&self.b)).max(anti)
    }

    pub fn is_positive_definite(&self) -> Result<bool> {
        Ok(sym_eigenvalues(&self.g)?.min() > 0.0)
    }
}

fn require_nonzero(s: &JetSample) -> Result<()> {
    if s.is_zero() {
        return Err(Error::InvalidArgument("tensor evaluation requires z ≠ 0".into()));
    }
    Ok(())
}

pub fn metric_bundle(lagr: &Lagrangian, s: &JetSample) -> Result<MetricBundle> {
    require_nonzero(s)?;
    let h = diffcore::eval_hessian_z(lagr, s)?;
    Ok(MetricBundle::from_hessian(&h))
}

/// `max |Hessian − reconstruct(bundle)|`.
pub fn reconstruction_error(lagr: &Lagrangian, s: &JetSample) -> Result<f64> {
    require_nonzero(s)?;
    let h = diffcore::eval_hessian_z(lagr, s)?;
    Ok((MetricBundle::from_hessian(&h).reconstruct() - h.matrix).amax())
}

/// Max entrywise change of `(g, ω)` under `z ↦ λz`.
pub fn check_zero_homogeneity(lagr: &Lagrangian, s: &JetSample, lambda: Complex64) -> Result<f64> {
    if lambda.norm() == 0.0 {
        return Err(Error::InvalidArgument("λ must be nonzero".into()));
    }
    let b0 = metric_bundle(lagr, s)?;
    let b1 = metric_bundle(lagr, &s.scaled(lambda))?;
    Ok((&b1.g - &b0.g).amax().max((&b1.omega - &b0.omega).amax()))
}

/// `‖(a_jk − i b_jk) zʲ‖` as a complex n-vector norm.
pub fn check_null_identity(lagr: &Lagrangian, s: &JetSample) -> Result<f64> {
    let mb = metric_bundle(lagr, s)?;
    Ok(null_identity_norm(&mb, s))
}

pub(crate) fn null_identity_norm(mb: &MetricBundle, s: &JetSample) -> f64 {
    let n = mb.dim();
    let z = s.z();
    let mut acc = 0.0;
    for k in 0..n {
        let mut v = Complex64::new(0.0, 0.0);
        for (j, zj) in z.iter().enumerate() {
            v += Complex64::new(mb.a[(j, k)], -mb.b[(j, k)]) * zj;
        }
        acc += v.norm_sqr();
    }
    acc.sqrt()
}

/// Split of `F` into its `g` and `ω` parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDecomposition {
    pub dirichlet: f64,
    pub omega: f64,
    /// `|dirichlet + omega − F|`.
    pub recomposition_error: f64,
    /// `|Im ½ h_jk z̄ʲ zᵏ|`, zero for a hermitian `h`.
    pub hermitian_imaginary: f64,
}

pub fn energy_decomposition(lagr: &Lagrangian, s: &JetSample) -> Result<EnergyDecomposition> {
    let mb = metric_bundle(lagr, s)?;
    let n = mb.dim();
    let (z1, z2) = (&s.z1, &s.z2);
    let mut dirichlet = 0.0;
    let mut omega = 0.0;
    let mut herm = Complex64::new(0.0, 0.0);
    let h = mb.h();
    for j in 0..n {
        for k in 0..n {
            dirichlet += 0.5 * mb.g[(j, k)] * (z1[j] * z1[k] + z2[j] * z2[k]);
            omega += 0.5 * mb.omega[(j, k)] * (z1[j] * z2[k] - z2[j] * z1[k]);
            herm += Complex64::new(z1[j], -z2[j]) * h[(j, k)] * Complex64::new(z1[k], z2[k]);
        }
    }
    let f = lagr.value(s);
    ensure_finite(&[dirichlet, omega, f], "energy decomposition")?;
    Ok(EnergyDecomposition {
        dirichlet,
        omega,
        recomposition_error: (dirichlet + omega - f).abs(),
        hermitian_imaginary: (0.5 * herm.im).abs(),
    })
}

/// Christoffel symbols of `g` and the exterior derivative of `ω` at `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelData {
    n: usize,
    /// `Γ^m_{kl}` at `(m·n + k)·n + l`.
    gamma: Vec<f64>,
    /// `(dω)_{jkl} = ∂_l ω_jk + ∂_k ω_lj + ∂_j ω_kl` at `(j·n + k)·n + l`.
    d_omega: Vec<f64>,
}

impl ChristoffelData {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gamma(&self, m: usize, k: usize, l: usize) -> f64 {
        self.gamma[(m * self.n + k) * self.n + l]
    }

    pub fn d_omega(&self, j: usize, k: usize, l: usize) -> f64 {
        self.d_omega[(j * self.n + k) * self.n + l]
    }

    /// Max of `|Γ^m_kl − Γ^m_lk|`.
    pub fn gamma_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut e: f64 = 0.0;
        for m in 0..n {
            for k in 0..n {
                for l in 0..n {
                    e = e.max((self.gamma(m, k, l) - self.gamma(m, l, k)).abs());
                }
            }
        }
        e
    }

    /// Max deviation of `dω` from total antisymmetry.
    pub fn d_omega_defect(&self) -> f64 {
        let n = self.n;
        let mut e: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = self.d_omega(j, k, l);
                    e = e.max((v + self.d_omega(k, j, l)).abs());
                    e = e.max((v + self.d_omega(j, l, k)).abs());
                    e = e.max((v + self.d_omega(l, k, j)).abs());
                }
            }
        }
        e
    }
}

/// Inverse of a symmetric metric, rejecting numerically singular ones.
pub(crate) fn metric_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sym_eigenvalues(g)?;
    let scale = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let smallest = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(smallest > 1e-13 * scale) {
        return Err(Error::SingularMetric);
    }
    g.clone().try_inverse().ok_or(Error::SingularMetric)
}

pub fn christoffel(lagr: &Lagrangian, y: &[f64]) -> Result<ChristoffelData> {
    lagr.check_dim(y.len())?;
    let (g, _) = lagr
        .hermitian_parts(y)
        .ok_or_else(|| Error::InvalidArgument("Christoffel data needs a z-independent (hermitian) metric".into()))?;
    let n = y.len();
    let ginv = metric_inverse(&g)?;
    let mut dg = Vec::with_capacity(n);
    let mut dw = Vec::with_capacity(n);
    let mut yy = y.to_vec();
    for k in 0..n {
        let h = FD_DELTA * y[k].abs().max(1.0);
        yy[k] = y[k] + h;
        let (gp, wp) = lagr.hermitian_parts(&yy).expect("hermitian parts exist");
        yy[k] = y[k] - h;
        let (gm, wm) = lagr.hermitian_parts(&yy).expect("hermitian parts exist");
        yy[k] = y[k];
        dg.push((gp - gm) / (2.0 * h));
        dw.push((wp - wm) / (2.0 * h));
    }
    let mut gamma = vec![0.0; n * n * n];
    let mut d_omega = vec![0.0; n * n * n];
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += ginv[(j, m)] * (dg[k][(j, l)] + dg[l][(k, j)] - dg[j][(k, l)]);
                }
                gamma[(m * n + k) * n + l] = 0.5 * acc;
            }
            for j in 0..n {
                d_omega[(j * n + k) * n + l] = dw[l][(j, k)] + dw[k][(l, j)] + dw[j][(k, l)];
            }
        }
    }
    ensure_finite(&gamma, "Christoffel symbols")?;
    Ok(ChristoffelData { n, gamma, d_omega })
}
