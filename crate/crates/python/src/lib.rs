//! Python module `cfinsler`: Lagrangian presets, metric tensors, the Weyl
//! and Carathéodory correspondences and the Dirichlet solver.

use cfinsler_core::caratheodory::{self, CaraMomenta};
use cfinsler_core::elsolve::{coons_init, solve_dirichlet, SolveOptions};
use cfinsler_core::lagrangian::{check_ellipticity, check_homogeneity};
use cfinsler_core::maps::PlaneMap;
use cfinsler_core::sampling::{random_jets, random_lambda, rng, JetRanges};
use cfinsler_core::{conservation, diffcore, tensors, weyl};
use cfinsler_core::{CotangentSample, Grid, JetSample, Lagrangian, MetricField, PlueckerA, TwoForm};
use nalgebra::{DMatrix, DVector};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(cfinsler, NumericalError, PyException, "A numerical routine failed or an input was rejected.");

fn err(e: cfinsler_core::Error) -> PyErr {
    NumericalError::new_err(e.to_string())
}

type Matrix = Vec<Vec<f64>>;

fn to_rows(m: &DMatrix<f64>) -> Matrix {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(rows: &Matrix) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != c) {
        return Err(PyValueError::new_err("expected a non-empty rectangular matrix"));
    }
    Ok(DMatrix::from_fn(n, c, |i, j| rows[i][j]))
}

fn spd(g: DMatrix<f64>) -> PyResult<DMatrix<f64>> {
    if g.nrows() != g.ncols() || (&g - g.transpose()).amax() > 1e-12 || g.clone().cholesky().is_none() {
        return Err(NumericalError::new_err("metric must be symmetric positive-definite"));
    }
    Ok(g)
}

fn jet(y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>) -> PyResult<JetSample> {
    JetSample::new(y, z1, z2).map_err(err)
}

/// A C-Finsler Lagrangian `F(y, z)` from one of the preset families.
#[pyclass(name = "Lagrangian", frozen)]
struct PyLagrangian {
    inner: Lagrangian,
}

#[pymethods]
impl PyLagrangian {
    #[staticmethod]
    #[pyo3(signature = (n = 2))]
    fn flat(n: usize) -> Self {
        PyLagrangian { inner: Lagrangian::flat(n) }
    }

    /// Constant metric `g`.
    #[staticmethod]
    fn riemannian(metric: Matrix) -> PyResult<Self> {
        let g = spd(from_rows(&metric)?)?;
        let n = g.nrows();
        Ok(PyLagrangian { inner: Lagrangian::riemannian(n, MetricField::constant(g).map_err(err)?) })
    }

    /// Constant metric (identity by default) and constant two-form `ω`.
    #[staticmethod]
    #[pyo3(signature = (omega, metric = None))]
    fn hermitian(omega: Matrix, metric: Option<Matrix>) -> PyResult<Self> {
        let w = from_rows(&omega)?;
        let n = w.nrows();
        let g = match metric {
            Some(m) => spd(from_rows(&m)?)?,
            None => DMatrix::identity(n, n),
        };
        let l = Lagrangian::hermitian(n, MetricField::constant(g).map_err(err)?, TwoForm::constant(w).map_err(err)?);
        Ok(PyLagrangian { inner: l })
    }

    #[staticmethod]
    #[pyo3(signature = (n = 2))]
    fn sphere(n: usize) -> Self {
        PyLagrangian { inner: Lagrangian::sphere_chart(n) }
    }

    #[staticmethod]
    #[pyo3(signature = (n = 2, kappa = 0.1))]
    fn quartic_ratio(n: usize, kappa: f64) -> Self {
        PyLagrangian { inner: Lagrangian::quartic_ratio(n, kappa) }
    }

    /// `(z₁¹)²`, which is not conformally invariant.
    #[staticmethod]
    #[pyo3(signature = (n = 2))]
    fn non_invariant_control(n: usize) -> Self {
        PyLagrangian { inner: Lagrangian::non_invariant_control(n) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn family(&self) -> String {
        self.inner.family().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Lagrangian({}, n={})", self.inner.family(), self.inner.dim())
    }

    fn value(&self, y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.value(&jet(y, z1, z2)?))
    }

    /// `∂F/∂z` as two rows `(∂F/∂z₁, ∂F/∂z₂)`.
    fn gradient_z(&self, y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>) -> PyResult<Matrix> {
        let j = diffcore::eval_first(&self.inner, &jet(y, z1, z2)?).map_err(err)?;
        Ok(to_rows(&j.dfdz))
    }

    /// `2n × 2n` z-Hessian with index `(j, α) ↦ α·n + j`.
    fn hessian_z(&self, y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>) -> PyResult<Matrix> {
        let h = diffcore::eval_hessian_z(&self.inner, &jet(y, z1, z2)?).map_err(err)?;
        Ok(to_rows(&h.matrix))
    }

    /// Dictionary with the matrices `g`, `omega`, `a`, `b`.
    fn metric_bundle<'py>(&self, py: Python<'py>, y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let mb = tensors::metric_bundle(&self.inner, &jet(y, z1, z2)?).map_err(err)?;
        let d = pyo3::types::PyDict::new(py);
        for (k, m) in [("g", &mb.g), ("omega", &mb.omega), ("a", &mb.a), ("b", &mb.b)] {
            d.set_item(k, to_rows(m))?;
        }
        Ok(d)
    }

    /// Largest relative homogeneity error over seeded random jets and `λ`.
    #[pyo3(signature = (seed = 0, count = 200, lambdas = 4))]
    fn homogeneity_error(&self, seed: u64, count: usize, lambdas: usize) -> PyResult<f64> {
        let samples = random_jets(seed, self.inner.dim(), count, JetRanges::default());
        let mut r = rng(seed ^ 1);
        let lams: Vec<_> = (0..lambdas).map(|_| random_lambda(&mut r, (0.1, 10.0))).collect();
        Ok(check_homogeneity(&self.inner, &samples, &lams).map_err(err)?.max_rel_error)
    }

    /// Smallest z-Hessian eigenvalue over seeded random jets.
    #[pyo3(signature = (seed = 0, count = 200))]
    fn ellipticity(&self, seed: u64, count: usize) -> PyResult<f64> {
        let samples = random_jets(seed, self.inner.dim(), count, JetRanges::default());
        Ok(check_ellipticity(&self.inner, &samples).map_err(err)?.c_est)
    }

    /// `p = 2∂F/∂z̄` as `(p1, p2)`.
    fn legendre_forward(&self, y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = weyl::legendre_forward(&self.inner, &jet(y, z1, z2)?).map_err(err)?;
        Ok((p.p1, p.p2))
    }

    /// The jet `(z1, z2)` whose momentum is `p`.
    fn legendre_inverse(&self, y: Vec<f64>, p1: Vec<f64>, p2: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let c = CotangentSample::new(y, p1, p2).map_err(err)?;
        let z = weyl::legendre_inverse(&self.inner, &c).map_err(err)?;
        Ok((z.z1, z.z2))
    }

    fn weyl_hamiltonian(&self, y: Vec<f64>, p1: Vec<f64>, p2: Vec<f64>) -> PyResult<f64> {
        let c = CotangentSample::new(y, p1, p2).map_err(err)?;
        weyl::weyl_hamiltonian(&self.inner, &c).map_err(err)
    }

    /// Carathéodory momenta at level `w` in the default gauge.
    #[pyo3(signature = (y, z1, z2, w = 0.0))]
    fn cara_forward(&self, y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>, w: f64) -> PyResult<Momenta> {
        let m = caratheodory::forward(&self.inner, &jet(y, z1, z2)?, w, None).map_err(err)?;
        Ok(Momenta { inner: m })
    }

    /// Stationary point `(z1, z2)` of `W` and the Hamiltonian value.
    fn cara_hamiltonian(&self, y: Vec<f64>, a: PyRef<'_, Pluecker>) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
        let sol = caratheodory::cara_hamiltonian(&self.inner, &y, &a.inner).map_err(err)?;
        Ok((sol.z.z1, sol.z.z2, sol.hamiltonian))
    }
}

/// Carathéodory momenta `(ε, π)`.
#[pyclass(name = "Momenta", frozen)]
struct Momenta {
    inner: CaraMomenta,
}

#[pymethods]
impl Momenta {
    #[getter]
    fn eps(&self) -> Matrix {
        let e = &self.inner.eps;
        vec![vec![e[(0, 0)], e[(0, 1)]], vec![e[(1, 0)], e[(1, 1)]]]
    }

    #[getter]
    fn pi(&self) -> Matrix {
        to_rows(&self.inner.pi)
    }

    fn determinant(&self, y: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.determinant(&jet(y, z1, z2)?))
    }

    /// Plücker coordinates of `(π | ε)`.
    fn pluecker(&self) -> Pluecker {
        Pluecker { inner: caratheodory::pluecker(&self.inner) }
    }

    /// Momenta after the gauge `g ∈ SL(2, ℝ)`.
    fn gauge(&self, g: [[f64; 2]; 2]) -> PyResult<Momenta> {
        let t = nalgebra::Matrix2::new(g[0][0], g[0][1], g[1][0], g[1][1]);
        Ok(Momenta { inner: caratheodory::gauge_act(&t, &self.inner).map_err(err)? })
    }
}

/// Plücker coordinates: `vec_a` (antisymmetric `n × n`), `col_a`, `row_a`,
/// `scalar_a`.
#[pyclass(name = "Pluecker", frozen)]
struct Pluecker {
    inner: PlueckerA,
}

#[pymethods]
impl Pluecker {
    #[new]
    fn new(vec_a: Matrix, col_a: Vec<f64>, row_a: Vec<f64>, scalar_a: f64) -> PyResult<Self> {
        let v = from_rows(&vec_a)?;
        let a = PlueckerA::new(&v, DVector::from_vec(col_a), DVector::from_vec(row_a), scalar_a).map_err(err)?;
        Ok(Pluecker { inner: a })
    }

    #[getter]
    fn vec_a(&self) -> Matrix {
        to_rows(&self.inner.vec_a_matrix())
    }

    #[getter]
    fn col_a(&self) -> Vec<f64> {
        self.inner.col_a.iter().copied().collect()
    }

    #[getter]
    fn row_a(&self) -> Vec<f64> {
        self.inner.row_a.iter().copied().collect()
    }

    #[getter]
    fn scalar_a(&self) -> f64 {
        self.inner.scalar_a
    }

    fn distance(&self, other: PyRef<'_, Pluecker>) -> f64 {
        self.inner.distance(&other.inner)
    }
}

fn plane_map(name: &str) -> PyResult<PlaneMap> {
    Ok(match name {
        "identity" => PlaneMap::Identity,
        "harmonic_quadratic" => PlaneMap::HarmonicQuadratic,
        "exp_harmonic" => PlaneMap::ExpHarmonic,
        "sphere_benchmark" => PlaneMap::sphere_benchmark(),
        other => return Err(PyValueError::new_err(format!("unknown map `{other}`"))),
    })
}

/// Solves the Dirichlet problem with the boundary values of a named map on a
/// `cells × cells` grid. Returns a dict with `x`, `y`, `u` (row per node),
/// `energy`, `iterations` and `max_error` against the map itself.
#[pyfunction]
#[pyo3(signature = (lagrangian, boundary, cells, x = (0.0, 1.0), y = (0.0, 1.0), tol = 1e-8))]
fn solve<'py>(
    py: Python<'py>,
    lagrangian: PyRef<'_, PyLagrangian>,
    boundary: &str,
    cells: usize,
    x: (f64, f64),
    y: (f64, f64),
    tol: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let map = plane_map(boundary)?;
    let g = Grid::rect(cells, cells, x, y).map_err(err)?;
    let b = map.sample(g);
    let opts = SolveOptions { tol, ..SolveOptions::default() };
    let l = &lagrangian.inner;
    let rep = py.detach(|| solve_dirichlet(l, &b, &coons_init(&b), &opts)).map_err(err)?;
    let (mut xs, mut ys, mut us) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (px, py_) = g.point(i, j);
            xs.push(px);
            ys.push(py_);
            us.push(rep.solution.at(i, j).to_vec());
        }
    }
    let d = pyo3::types::PyDict::new(py);
    d.set_item("x", xs)?;
    d.set_item("y", ys)?;
    d.set_item("u", us)?;
    d.set_item("energy", rep.energy)?;
    d.set_item("iterations", rep.iterations)?;
    d.set_item("max_error", rep.solution.max_diff(&b).map_err(err)?)?;
    d.set_item("hopf_holomorphy", conservation::holomorphy_residual(&conservation::hopf(l, &rep.solution).map_err(err)?).map_err(err)?)?;
    Ok(d)
}

#[pymodule]
fn cfinsler(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLagrangian>()?;
    m.add_class::<Momenta>()?;
    m.add_class::<Pluecker>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
