//! C-Finsler Lagrangians: the evaluator abstraction, the preset families and
//! the invariance / ellipticity checks.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::diffcore::{self, JetSample};
use crate::error::{ensure_finite, Error, Result};

/// Point evaluator of `F(y, z₁ + i z₂)`.
///
/// Only [`Evaluator::value`] is required. The derivative hooks write into the
/// supplied buffers and return `true` when a closed form is available; the
/// default implementations return `false`, in which case [`diffcore`] falls
/// back to central differences.
pub trait Evaluator: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, y: &[f64], z1: &[f64], z2: &[f64]) -> f64;

    /// `∂F/∂z₁ʲ` into `d1` and `∂F/∂z₂ʲ` into `d2`.
    fn grad_z(&self, _y: &[f64], _z1: &[f64], _z2: &[f64], _d1: &mut [f64], _d2: &mut [f64]) -> bool {
        false
    }

    /// `∂F/∂yʲ` into `out`.
    fn grad_y(&self, _y: &[f64], _z1: &[f64], _z2: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Row-major `2n × 2n` z-Hessian into `out`, index `(j, α) ↦ α·n + j`.
    fn hessian_z(&self, _y: &[f64], _z1: &[f64], _z2: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// `(g(y), ω(y))` for Lagrangians of the form `½ h_jk(y) z̄ʲ zᵏ`.
    fn hermitian_parts(&self, _y: &[f64]) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        None
    }
}

/// Family tag of a [`Lagrangian`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Riemannian,
    Hermitian,
    QuarticRatio,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Riemannian => "riemannian",
            Family::Hermitian => "hermitian",
            Family::QuarticRatio => "quartic_ratio",
            Family::Custom => "custom",
        };
        f.write_str(name)
    }
}

type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

fn fd_step(x: f64) -> f64 {
    diffcore::FD_DELTA * x.abs().max(1.0)
}

fn central_matrix_derivative(f: &MatrixFn, y: &[f64], k: usize) -> DMatrix<f64> {
    let h = fd_step(y[k]);
    let mut yp = y.to_vec();
    let mut ym = y.to_vec();
    yp[k] += h;
    ym[k] -= h;
    (f(&yp) - f(&ym)) / (2.0 * h)
}

/// The symmetric part `g(y)` of a hermitian C-Finsler metric.
#[derive(Clone)]
pub enum MetricField {
    Constant(DMatrix<f64>),
    /// Stereographic chart of the round sphere, `g = 4δ/(1+|y|²)²`.
    Sphere,
    Custom(MatrixFn),
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricField::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            MetricField::Sphere => f.write_str("Sphere"),
            MetricField::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn sphere_factor(y: &[f64]) -> f64 {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    4.0 / ((1.0 + r2) * (1.0 + r2))
}

fn sphere_factor_derivative(y: &[f64], k: usize) -> f64 {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    -16.0 * y[k] / (1.0 + r2).powi(3)
}

fn bilinear_dense(m: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let mut row = 0.0;
        for j in 0..b.len() {
            row += m[(i, j)] * b[j];
        }
        acc += a[i] * row;
    }
    acc
}

fn apply_dense(m: &DMatrix<f64>, v: &[f64], out: &mut [f64], scale: f64) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for j in 0..v.len() {
            acc += m[(i, j)] * v[j];
        }
        out[i] += scale * acc;
    }
}

impl MetricField {
    pub fn constant(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::InvalidArgument("metric must be square".into()));
        }
        if (&g - g.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidArgument("metric must be symmetric".into()));
        }
        Ok(MetricField::Constant(g))
    }

    pub fn at(&self, y: &[f64]) -> DMatrix<f64> {
        match self {
            MetricField::Constant(g) => g.clone(),
            MetricField::Sphere => DMatrix::identity(y.len(), y.len()) * sphere_factor(y),
            MetricField::Custom(f) => f(y),
        }
    }

    /// `∂g/∂yᵏ` at `y`.
    pub fn derivative(&self, y: &[f64], k: usize) -> DMatrix<f64> {
        match self {
            MetricField::Constant(g) => DMatrix::zeros(g.nrows(), g.ncols()),
            MetricField::Sphere => DMatrix::identity(y.len(), y.len()) * sphere_factor_derivative(y, k),
            MetricField::Custom(f) => central_matrix_derivative(f, y, k),
        }
    }

    fn bilinear(&self, y: &[f64], a: &[f64], b: &[f64]) -> f64 {
        match self {
            MetricField::Constant(g) => bilinear_dense(g, a, b),
            MetricField::Sphere => sphere_factor(y) * dot(a, b),
            MetricField::Custom(f) => bilinear_dense(&f(y), a, b),
        }
    }

    fn derivative_bilinear(&self, y: &[f64], k: usize, a: &[f64], b: &[f64]) -> f64 {
        match self {
            MetricField::Constant(_) => 0.0,
            MetricField::Sphere => sphere_factor_derivative(y, k) * dot(a, b),
            MetricField::Custom(f) => bilinear_dense(&central_matrix_derivative(f, y, k), a, b),
        }
    }

    /// `out += scale · g(y) v`.
    fn apply_add(&self, y: &[f64], v: &[f64], out: &mut [f64], scale: f64) {
        match self {
            MetricField::Constant(g) => apply_dense(g, v, out, scale),
            MetricField::Sphere => {
                let phi = sphere_factor(y) * scale;
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += phi * vi;
                }
            }
            MetricField::Custom(f) => apply_dense(&f(y), v, out, scale),
        }
    }
}

/// The antisymmetric part `ω(y)` of a hermitian C-Finsler metric.
#[derive(Clone)]
pub enum TwoForm {
    Zero,
    Constant(DMatrix<f64>),
    /// `ω(y) = base + Σ_k yᵏ slopes[k]`.
    Affine { base: DMatrix<f64>, slopes: Vec<DMatrix<f64>> },
    Custom(MatrixFn),
}

impl fmt::Debug for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwoForm::Zero => f.write_str("Zero"),
            TwoForm::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            TwoForm::Affine { base, slopes } => {
                f.debug_struct("Affine").field("base", base).field("slopes", slopes).finish()
            }
            TwoForm::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn check_antisymmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || (m + m.transpose()).amax() > 1e-12 {
        return Err(Error::InvalidArgument("two-form must be a square antisymmetric matrix".into()));
    }
    Ok(())
}

impl TwoForm {
    pub fn constant(omega: DMatrix<f64>) -> Result<Self> {
        check_antisymmetric(&omega)?;
        Ok(TwoForm::Constant(omega))
    }

    pub fn affine(base: DMatrix<f64>, slopes: Vec<DMatrix<f64>>) -> Result<Self> {
        check_antisymmetric(&base)?;
        for s in &slopes {
            check_antisymmetric(s)?;
            if s.shape() != base.shape() {
                return Err(Error::InvalidArgument("two-form slopes must match the base shape".into()));
            }
        }
        Ok(TwoForm::Affine { base, slopes })
    }

    /// The two-form with a single entry `ω₁₂ = −ω₂₁ = c`.
    pub fn planar(n: usize, c: f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        if n >= 2 {
            m[(0, 1)] = c;
            m[(1, 0)] = -c;
        }
        TwoForm::Constant(m)
    }

    pub fn at(&self, y: &[f64]) -> DMatrix<f64> {
        let n = y.len();
        match self {
            TwoForm::Zero => DMatrix::zeros(n, n),
            TwoForm::Constant(m) => m.clone(),
            TwoForm::Affine { base, slopes } => {
                let mut m = base.clone();
                for (yk, s) in y.iter().zip(slopes) {
                    m += s * *yk;
                }
                m
            }
            TwoForm::Custom(f) => f(y),
        }
    }

    pub fn derivative(&self, y: &[f64], k: usize) -> DMatrix<f64> {
        let n = y.len();
        match self {
            TwoForm::Zero | TwoForm::Constant(_) => DMatrix::zeros(n, n),
            TwoForm::Affine { slopes, .. } => slopes.get(k).cloned().unwrap_or_else(|| DMatrix::zeros(n, n)),
            TwoForm::Custom(f) => central_matrix_derivative(f, y, k),
        }
    }

    fn bilinear(&self, y: &[f64], a: &[f64], b: &[f64]) -> f64 {
        match self {
            TwoForm::Zero => 0.0,
            TwoForm::Constant(m) => bilinear_dense(m, a, b),
            TwoForm::Affine { base, slopes } => {
                let mut acc = bilinear_dense(base, a, b);
                for (yk, s) in y.iter().zip(slopes) {
                    acc += yk * bilinear_dense(s, a, b);
                }
                acc
            }
            TwoForm::Custom(f) => bilinear_dense(&f(y), a, b),
        }
    }

    fn derivative_bilinear(&self, y: &[f64], k: usize, a: &[f64], b: &[f64]) -> f64 {
        match self {
            TwoForm::Zero | TwoForm::Constant(_) => 0.0,
            TwoForm::Affine { slopes, .. } => slopes.get(k).map_or(0.0, |s| bilinear_dense(s, a, b)),
            TwoForm::Custom(f) => bilinear_dense(&central_matrix_derivative(f, y, k), a, b),
        }
    }

    fn apply_add(&self, y: &[f64], v: &[f64], out: &mut [f64], scale: f64) {
        match self {
            TwoForm::Zero => {}
            TwoForm::Constant(m) => apply_dense(m, v, out, scale),
            TwoForm::Affine { base, slopes } => {
                apply_dense(base, v, out, scale);
                for (yk, s) in y.iter().zip(slopes) {
                    apply_dense(s, v, out, scale * yk);
                }
            }
            TwoForm::Custom(f) => apply_dense(&f(y), v, out, scale),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F = ½( g_ij(z₁ⁱz₁ʲ + z₂ⁱz₂ʲ) + ω_ij(z₁ⁱz₂ʲ − z₂ⁱz₁ʲ) )`.
#[derive(Debug, Clone)]
pub struct HermitianEvaluator {
    n: usize,
    metric: MetricField,
    omega: TwoForm,
}

impl HermitianEvaluator {
    pub fn new(n: usize, metric: MetricField, omega: TwoForm) -> Self {
        HermitianEvaluator { n, metric, omega }
    }
}

impl Evaluator for HermitianEvaluator {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[f64], z1: &[f64], z2: &[f64]) -> f64 {
        let dirichlet = self.metric.bilinear(y, z1, z1) + self.metric.bilinear(y, z2, z2);
        let twist = self.omega.bilinear(y, z1, z2) - self.omega.bilinear(y, z2, z1);
        0.5 * (dirichlet + twist)
    }

    fn grad_z(&self, y: &[f64], z1: &[f64], z2: &[f64], d1: &mut [f64], d2: &mut [f64]) -> bool {
        d1.fill(0.0);
        d2.fill(0.0);
        self.metric.apply_add(y, z1, d1, 1.0);
        self.omega.apply_add(y, z2, d1, 1.0);
        self.metric.apply_add(y, z2, d2, 1.0);
        self.omega.apply_add(y, z1, d2, -1.0);
        true
    }

    fn grad_y(&self, y: &[f64], z1: &[f64], z2: &[f64], out: &mut [f64]) -> bool {
        for (k, o) in out.iter_mut().enumerate() {
            let dg = self.metric.derivative_bilinear(y, k, z1, z1) + self.metric.derivative_bilinear(y, k, z2, z2);
            let dw = self.omega.derivative_bilinear(y, k, z1, z2) - self.omega.derivative_bilinear(y, k, z2, z1);
            *o = 0.5 * (dg + dw);
        }
        true
    }

    fn hessian_z(&self, y: &[f64], _z1: &[f64], _z2: &[f64], out: &mut [f64]) -> bool {
        let n = self.n;
        let g = self.metric.at(y);
        let w = self.omega.at(y);
        let m = 2 * n;
        for j in 0..n {
            for k in 0..n {
                out[j * m + k] = g[(j, k)];
                out[(n + j) * m + n + k] = g[(j, k)];
                out[j * m + n + k] = w[(j, k)];
                out[(n + j) * m + k] = -w[(j, k)];
            }
        }
        true
    }

    fn hermitian_parts(&self, y: &[f64]) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        Some((self.metric.at(y), self.omega.at(y)))
    }
}

/// `F = ½|z|² + (κ/4)·|Σⱼ (zʲ)²|² / |z|²`.
///
/// Conformally invariant and smooth away from `z = 0`, but not of hermitian
/// form: its `a`, `b` tensors are nonzero for `κ ≠ 0`.
#[derive(Debug, Clone)]
pub struct QuarticRatio {
    n: usize,
    kappa: f64,
}

impl QuarticRatio {
    pub fn new(n: usize, kappa: f64) -> Self {
        QuarticRatio { n, kappa }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    // s = |z|², qr + i qi = Σ (zʲ)², q2 = qr² + qi².
    fn invariants(z1: &[f64], z2: &[f64]) -> (f64, f64, f64) {
        let mut s = 0.0;
        let mut qr = 0.0;
        let mut qi = 0.0;
        for (a, b) in z1.iter().zip(z2) {
            s += a * a + b * b;
            qr += a * a - b * b;
            qi += 2.0 * a * b;
        }
        (s, qr, qi)
    }
}

impl Evaluator for QuarticRatio {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, _y: &[f64], z1: &[f64], z2: &[f64]) -> f64 {
        let (s, qr, qi) = Self::invariants(z1, z2);
        if s == 0.0 {
            return 0.0;
        }
        0.5 * s + 0.25 * self.kappa * (qr * qr + qi * qi) / s
    }

    fn grad_z(&self, _y: &[f64], z1: &[f64], z2: &[f64], d1: &mut [f64], d2: &mut [f64]) -> bool {
        let (s, qr, qi) = Self::invariants(z1, z2);
        if s == 0.0 {
            d1.fill(0.0);
            d2.fill(0.0);
            return true;
        }
        let q2 = qr * qr + qi * qi;
        let c = 0.25 * self.kappa;
        for j in 0..self.n {
            let (a, b) = (z1[j], z2[j]);
            // ∇Q = 4(qr z₁ + qi z₂, qi z₁ − qr z₂), ∇s = 2(z₁, z₂)
            let dq1 = 4.0 * (qr * a + qi * b);
            let dq2 = 4.0 * (qi * a - qr * b);
            d1[j] = a + c * (dq1 / s - q2 * 2.0 * a / (s * s));
            d2[j] = b + c * (dq2 / s - q2 * 2.0 * b / (s * s));
        }
        true
    }

    fn grad_y(&self, _y: &[f64], _z1: &[f64], _z2: &[f64], out: &mut [f64]) -> bool {
        out.fill(0.0);
        true
    }

    fn hessian_z(&self, _y: &[f64], z1: &[f64], z2: &[f64], out: &mut [f64]) -> bool {
        let n = self.n;
        let m = 2 * n;
        out.fill(0.0);
        for i in 0..m {
            out[i * m + i] = 1.0;
        }
        let (s, qr, qi) = Self::invariants(z1, z2);
        if s == 0.0 {
            return true;
        }
        let q2 = qr * qr + qi * qi;
        let x: Vec<f64> = z1.iter().chain(z2).copied().collect();
        let ds: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let dqr: Vec<f64> = (0..m).map(|i| if i < n { 2.0 * x[i] } else { -2.0 * x[i] }).collect();
        let dqi: Vec<f64> = (0..m).map(|i| if i < n { 2.0 * x[n + i] } else { 2.0 * x[i - n] }).collect();
        let dq: Vec<f64> = (0..m).map(|i| 2.0 * qr * dqr[i] + 2.0 * qi * dqi[i]).collect();
        let c = 0.25 * self.kappa;
        for i in 0..m {
            for j in 0..m {
                let hqr = if i == j { if i < n { 2.0 } else { -2.0 } } else { 0.0 };
                let hqi = if (i < n && j == i + n) || (i >= n && j + n == i) { 2.0 } else { 0.0 };
                let hs = if i == j { 2.0 } else { 0.0 };
                let hq = 2.0 * dqr[i] * dqr[j] + 2.0 * qr * hqr + 2.0 * dqi[i] * dqi[j] + 2.0 * qi * hqi;
                let ratio = hq / s - (dq[i] * ds[j] + ds[i] * dq[j]) / (s * s) - q2 * hs / (s * s)
                    + 2.0 * q2 * ds[i] * ds[j] / (s * s * s);
                out[i * m + j] += c * ratio;
            }
        }
        true
    }
}

/// `L = (z₁¹)²`: a deliberately non-invariant control used to exercise the
/// checkers.
#[derive(Debug, Clone)]
pub struct NonInvariantControl {
    n: usize,
}

impl Evaluator for NonInvariantControl {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, _y: &[f64], z1: &[f64], _z2: &[f64]) -> f64 {
        z1[0] * z1[0]
    }

    fn grad_z(&self, _y: &[f64], z1: &[f64], _z2: &[f64], d1: &mut [f64], d2: &mut [f64]) -> bool {
        d1.fill(0.0);
        d2.fill(0.0);
        d1[0] = 2.0 * z1[0];
        true
    }

    fn grad_y(&self, _y: &[f64], _z1: &[f64], _z2: &[f64], out: &mut [f64]) -> bool {
        out.fill(0.0);
        true
    }

    fn hessian_z(&self, _y: &[f64], _z1: &[f64], _z2: &[f64], out: &mut [f64]) -> bool {
        out.fill(0.0);
        out[0] = 2.0;
        true
    }
}

/// A Lagrangian `F(y, z)` together with its family tag.
#[derive(Clone, Debug)]
pub struct Lagrangian {
    evaluator: Arc<dyn Evaluator>,
    family: Family,
    chart_radius: Option<f64>,
}

impl Lagrangian {
    /// Flat Dirichlet energy `½(|z₁|² + |z₂|²)`.
    pub fn flat(n: usize) -> Self {
        Self::riemannian(n, MetricField::Constant(DMatrix::identity(n, n)))
    }

    pub fn riemannian(n: usize, metric: MetricField) -> Self {
        Lagrangian {
            evaluator: Arc::new(HermitianEvaluator::new(n, metric, TwoForm::Zero)),
            family: Family::Riemannian,
            chart_radius: None,
        }
    }

    pub fn hermitian(n: usize, metric: MetricField, omega: TwoForm) -> Self {
        Lagrangian {
            evaluator: Arc::new(HermitianEvaluator::new(n, metric, omega)),
            family: Family::Hermitian,
            chart_radius: None,
        }
    }

    /// Stereographic chart of S²-like targets: `g = 4δ/(1+|y|²)²`, chart radius 10.
    pub fn sphere_chart(n: usize) -> Self {
        let mut l = Self::riemannian(n, MetricField::Sphere);
        l.chart_radius = Some(10.0);
        l
    }

    pub fn quartic_ratio(n: usize, kappa: f64) -> Self {
        Lagrangian {
            evaluator: Arc::new(QuarticRatio::new(n, kappa)),
            family: Family::QuarticRatio,
            chart_radius: None,
        }
    }

    pub fn non_invariant_control(n: usize) -> Self {
        Self::custom(Arc::new(NonInvariantControl { n }))
    }

    /// Extension point for evaluators registered in code.
    pub fn custom(evaluator: Arc<dyn Evaluator>) -> Self {
        Lagrangian { evaluator, family: Family::Custom, chart_radius: None }
    }

    pub fn with_chart_radius(mut self, radius: f64) -> Self {
        self.chart_radius = Some(radius);
        self
    }

    pub fn dim(&self) -> usize {
        self.evaluator.dim()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn chart_radius(&self) -> Option<f64> {
        self.chart_radius
    }

    pub fn evaluator(&self) -> &dyn Evaluator {
        self.evaluator.as_ref()
    }

    pub fn value(&self, s: &JetSample) -> f64 {
        self.evaluator.value(&s.y, &s.z1, &s.z2)
    }

    pub fn value_at(&self, y: &[f64], z1: &[f64], z2: &[f64]) -> f64 {
        self.evaluator.value(y, z1, z2)
    }

    pub fn hermitian_parts(&self, y: &[f64]) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        self.evaluator.hermitian_parts(y)
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }
}

/// Holomorphic vector field `X(t) = Σ c_k t^k` on the parameter domain, read
/// as `(X¹, X²)` with `X¹ + iX²` holomorphic.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicField {
    coeffs: Vec<Complex64>,
}

impl HolomorphicField {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("holomorphic field needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFiniteValue { context: "holomorphic field coefficients" });
        }
        Ok(HolomorphicField { coeffs })
    }

    /// `X(t) = c tᵏ`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        HolomorphicField { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    pub fn derivative(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * t + c * k as f64;
        }
        acc
    }

    /// Real Jacobian `dX[(α, β)] = ∂X^β/∂t^α` (Cauchy–Riemann structure).
    pub fn jacobian(&self, t: Complex64) -> [[f64; 2]; 2] {
        let d = self.derivative(t);
        [[d.re, d.im], [-d.im, d.re]]
    }
}

/// Result of [`check_homogeneity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneityReport {
    pub max_rel_error: f64,
    /// `(sample index, lambda index)` of the worst case.
    pub worst: (usize, usize),
}

/// Max relative deviation from `F(y, λz) = |λ|² F(y, z)` over all sample/λ pairs.
pub fn check_homogeneity(lagr: &Lagrangian, samples: &[JetSample], lambdas: &[Complex64]) -> Result<HomogeneityReport> {
    let mut report = HomogeneityReport { max_rel_error: 0.0, worst: (0, 0) };
    for (si, s) in samples.iter().enumerate() {
        lagr.check_dim(s.dim())?;
        if s.is_zero() {
            return Err(Error::InvalidArgument("homogeneity check requires z ≠ 0".into()));
        }
        let f = lagr.value(s);
        for (li, lambda) in lambdas.iter().enumerate() {
            if lambda.norm() == 0.0 {
                return Err(Error::InvalidArgument("homogeneity check requires λ ≠ 0".into()));
            }
            let scaled = lagr.value(&s.scaled(*lambda));
            let m2 = lambda.norm_sqr();
            ensure_finite(&[f, scaled], "homogeneity check")?;
            let err = (scaled - m2 * f).abs() / (m2 * f.abs() + 1e-30);
            if err > report.max_rel_error {
                report = HomogeneityReport { max_rel_error: err, worst: (si, li) };
            }
        }
    }
    Ok(report)
}

/// Residuals of the two Euler identities equivalent to conformal invariance:
/// `r₁ = ∂L/∂z₁·z₁ + ∂L/∂z₂·z₂ − 2L` and `r₂ = ∂L/∂z₁·z₂ − ∂L/∂z₂·z₁`.
pub fn check_euler_identities(lagr: &Lagrangian, s: &JetSample) -> Result<(f64, f64)> {
    let jet = diffcore::eval_first(lagr, s)?;
    let d1 = jet.dfdz.row(0);
    let d2 = jet.dfdz.row(1);
    let mut r1 = -2.0 * jet.value;
    let mut r2 = 0.0;
    for j in 0..s.dim() {
        r1 += d1[j] * s.z1[j] + d2[j] * s.z2[j];
        r2 += d1[j] * s.z2[j] - d2[j] * s.z1[j];
    }
    Ok((r1, r2))
}

/// The contraction `(∂L/∂z^i_α z^i_β − L δ^α_β) ∂X^β/∂t^α` at parameter point `t`.
pub fn check_infinitesimal_invariance(
    lagr: &Lagrangian,
    field: &HolomorphicField,
    t: Complex64,
    s: &JetSample,
) -> Result<f64> {
    let em = crate::caratheodory::energy_momentum(lagr, s)?;
    let dx = field.jacobian(t);
    let mut acc = 0.0;
    for (alpha, row) in dx.iter().enumerate() {
        for (beta, d) in row.iter().enumerate() {
            acc += em.h[(alpha, beta)] * d;
        }
    }
    ensure_finite(&[acc], "infinitesimal invariance")?;
    Ok(acc)
}

/// Result of [`check_ellipticity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityReport {
    /// Minimum over samples of the smallest z-Hessian eigenvalue.
    pub c_est: f64,
    pub worst: usize,
}

impl EllipticityReport {
    pub fn is_elliptic(&self) -> bool {
        self.c_est > 0.0
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let eig = SymmetricEigen::try_new(m.clone(), 1e-14, 10_000).ok_or(Error::EigenFailure)?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

pub fn check_ellipticity(lagr: &Lagrangian, samples: &[JetSample]) -> Result<EllipticityReport> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("ellipticity check needs at least one sample".into()));
    }
    let mut report = EllipticityReport { c_est: f64::INFINITY, worst: 0 };
    for (i, s) in samples.iter().enumerate() {
        if s.is_zero() {
            return Err(Error::InvalidArgument("ellipticity check requires z ≠ 0".into()));
        }
        let hess = diffcore::eval_hessian_z(lagr, s)?;
        let lam = min_eigenvalue(&hess.matrix)?;
        if lam < report.c_est {
            report = EllipticityReport { c_est: lam, worst: i };
        }
    }
    Ok(report)
}
