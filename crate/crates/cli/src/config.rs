//! JSON run configuration. Every block is optional except `lagrangian`;
//! unknown keys are rejected.

use std::path::Path;

use cfinsler_core::lagrangian::{MetricField, TwoForm};
use cfinsler_core::maps::PlaneMap;
use cfinsler_core::sampling::JetRanges;
use cfinsler_core::{Complex64, Grid, Lagrangian};
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lagrangian: LagrangianSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub samples: SampleSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub boundary: MapSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub hj: HjSpec,
}

fn default_seed() -> u64 {
    42
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let s = &self.samples;
        if s.count == 0 || !(s.z_min > 0.0 && s.z_min <= s.z_max) || !(s.lambda_min > 0.0 && s.lambda_min <= s.lambda_max) {
            return Err(CliError::Config("samples: need count ≥ 1, 0 < z_min ≤ z_max, 0 < lambda_min ≤ lambda_max".into()));
        }
        if self.grid.cells < 2 {
            return Err(CliError::Config("grid.cells must be at least 2".into()));
        }
        self.lagrangian.build()?;
        let m = self.boundary.to_map();
        m.validate().map_err(|e| CliError::Config(format!("boundary: {e}")))?;
        Ok(())
    }
}

/// Lagrangian family with its parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LagrangianSpec {
    Flat {
        #[serde(default = "two")]
        n: usize,
    },
    /// Constant metric `g`.
    Riemannian { metric: Vec<Vec<f64>> },
    /// Constant `g` (identity when omitted) and constant two-form `ω`.
    Hermitian {
        #[serde(default)]
        metric: Option<Vec<Vec<f64>>>,
        omega: Vec<Vec<f64>>,
    },
    Sphere {
        #[serde(default = "two")]
        n: usize,
    },
    QuarticRatio {
        #[serde(default = "two")]
        n: usize,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
    /// `L = (z₁¹)²`, a negative control.
    NonInvariantControl {
        #[serde(default = "two")]
        n: usize,
    },
}

fn two() -> usize {
    2
}

fn default_kappa() -> f64 {
    0.1
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{what} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn metric(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let g = matrix(rows, "metric")?;
    if g.clone().cholesky().is_none() {
        return Err(CliError::Config("metric must be symmetric positive definite".into()));
    }
    Ok(g)
}

impl LagrangianSpec {
    pub fn build(&self) -> Result<Lagrangian, CliError> {
        let bad = |e: cfinsler_core::Error| CliError::Config(format!("lagrangian: {e}"));
        let positive = |n: usize| if n == 0 { Err(CliError::Config("lagrangian: n must be ≥ 1".into())) } else { Ok(n) };
        Ok(match self {
            LagrangianSpec::Flat { n } => Lagrangian::flat(positive(*n)?),
            LagrangianSpec::Riemannian { metric } => {
                let g = self::metric(metric)?;
                Lagrangian::riemannian(g.nrows(), MetricField::constant(g).map_err(bad)?)
            }
            LagrangianSpec::Hermitian { metric, omega } => {
                let w = matrix(omega, "omega")?;
                let n = w.nrows();
                let g = match metric {
                    Some(m) => self::metric(m)?,
                    None => DMatrix::identity(n, n),
                };
                if g.nrows() != n {
                    return Err(CliError::Config("metric and omega sizes differ".into()));
                }
                Lagrangian::hermitian(n, MetricField::constant(g).map_err(bad)?, TwoForm::constant(w).map_err(bad)?)
            }
            LagrangianSpec::Sphere { n } => Lagrangian::sphere_chart(positive(*n)?),
            LagrangianSpec::QuarticRatio { n, kappa } => {
                if !kappa.is_finite() {
                    return Err(CliError::Config("kappa must be finite".into()));
                }
                Lagrangian::quartic_ratio(positive(*n)?, *kappa)
            }
            LagrangianSpec::NonInvariantControl { n } => Lagrangian::non_invariant_control(positive(*n)?),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSpec {
    pub count: usize,
    pub y_radius: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Number of random `λ` per sample in the homogeneity check.
    pub lambdas: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { count: 200, y_radius: 1.0, z_min: 0.5, z_max: 2.0, lambda_min: 0.1, lambda_max: 10.0, lambdas: 4 }
    }
}

impl SampleSpec {
    pub fn ranges(&self) -> JetRanges {
        JetRanges { y_radius: self.y_radius, z_norm: (self.z_min, self.z_max) }
    }
}

/// A `cells × cells` grid on `x × y`.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub cells: usize,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { cells: 32, x: (0.0, 1.0), y: (0.0, 1.0) }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, CliError> {
        Grid::rect(self.cells, self.cells, self.x, self.y).map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

/// Closed-form boundary map.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    #[default]
    HarmonicQuadratic,
    Identity,
    ExpHarmonic,
    SphereBenchmark,
    /// `Σ c_k t^k` with `c_k = [re, im]`.
    Holomorphic { coeffs: Vec<(f64, f64)> },
    Constant { value: Vec<f64> },
    Linear { matrix: Vec<[f64; 2]>, offset: Vec<f64> },
}

impl MapSpec {
    pub fn to_map(&self) -> PlaneMap {
        match self {
            MapSpec::HarmonicQuadratic => PlaneMap::HarmonicQuadratic,
            MapSpec::Identity => PlaneMap::Identity,
            MapSpec::ExpHarmonic => PlaneMap::ExpHarmonic,
            MapSpec::SphereBenchmark => PlaneMap::sphere_benchmark(),
            MapSpec::Holomorphic { coeffs } => {
                PlaneMap::Holomorphic(coeffs.iter().map(|(re, im)| Complex64::new(*re, *im)).collect())
            }
            MapSpec::Constant { value } => PlaneMap::Constant(value.clone()),
            MapSpec::Linear { matrix, offset } => PlaneMap::Linear { matrix: matrix.clone(), offset: offset.clone() },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iters: usize,
    pub res_tol: Option<f64>,
    pub check_every: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = cfinsler_core::elsolve::SolveOptions::default();
        SolverSpec { tol: d.tol, max_iters: d.max_iters, res_tol: d.res_tol, check_every: d.check_every }
    }
}

/// Pass thresholds of every reported check.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub homogeneity: f64,
    pub euler: f64,
    pub invariance: f64,
    pub reconstruction: f64,
    pub zero_homogeneity: f64,
    pub null_identity: f64,
    pub recomposition: f64,
    pub weyl_roundtrip: f64,
    pub weyl_identity: f64,
    pub cara_roundtrip: f64,
    pub gauge: f64,
    pub cara_identity: f64,
    pub condensed: f64,
    pub grid_residual: f64,
    pub hopf_holomorphy: f64,
    pub divergence: f64,
    pub hj_residual: f64,
    pub calibration_slack: f64,
    pub calibration_equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            homogeneity: 1e-9,
            euler: 1e-8,
            invariance: 1e-8,
            reconstruction: 1e-8,
            zero_homogeneity: 1e-6,
            null_identity: 1e-7,
            recomposition: 1e-7,
            weyl_roundtrip: 1e-8,
            weyl_identity: 1e-7,
            cara_roundtrip: 1e-8,
            gauge: 1e-12,
            cara_identity: 1e-7,
            condensed: 1e-7,
            grid_residual: 1e-3,
            hopf_holomorphy: 5e-2,
            divergence: 5e-2,
            hj_residual: 1e-7,
            calibration_slack: 1e-9,
            calibration_equality: 1e-6,
        }
    }
}

/// Candidate slope functions for the `hj` subcommand.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HjSpec {
    /// Nodes per axis of the product grid.
    pub points: usize,
    /// Number of sampled `z` in the calibration checks.
    pub calibration_samples: usize,
    /// Weyl theory: constant momentum `(p¹, p²)` of the affine solution.
    pub momentum: Option<(Vec<f64>, Vec<f64>)>,
    /// Carathéodory theory: Jacobian columns of the linear reference map.
    pub frame: Option<(Vec<f64>, Vec<f64>)>,
    /// Carathéodory theory: level `w` of the forward data.
    pub w: f64,
}

impl Default for HjSpec {
    fn default() -> Self {
        HjSpec { points: 8, calibration_samples: 1000, momentum: None, frame: None, w: 0.0 }
    }
}
