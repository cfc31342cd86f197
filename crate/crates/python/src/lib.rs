//! Python bindings for the `cuspkahler` core crate.

use ::cuspkahler as core;
use core::asymptotics::{self, DEFAULT_AE_WINDOW, DEFAULT_CUSP_WINDOW};
use core::cylinder::{self, IndicialProblem};
use core::gluing::{self, BaseCorrection, HarmonicMode};
use core::momentum;
use core::topo::{self, KahlerClassData};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(cuspkahler, NumericError, PyException);

fn to_py(e: core::Error) -> PyErr {
    use core::Error::*;
    match e {
        Domain(_)
        | Precondition(_)
        | Inadmissible(_)
        | Dimension(_)
        | DivisionByZero(_)
        | Pole(_)
        | UnsupportedOrder { .. }
        | WeightOnWall { .. } => PyValueError::new_err(e.to_string()),
        _ => NumericError::new_err(e.to_string()),
    }
}

/// Scalar-flat momentum profile `phi = P / Q`.
#[pyclass(name = "MomentumProfile", frozen)]
struct PyProfile {
    inner: momentum::MomentumProfile,
}

#[pymethods]
impl PyProfile {
    /// `profile_cp1(k, beta)` for `n = 2`, the conical family for `n >= 3`.
    #[new]
    #[pyo3(signature = (n, k, beta = 0.0))]
    fn new(n: usize, k: u32, beta: f64) -> PyResult<Self> {
        Ok(PyProfile {
            inner: momentum::profile_family(n, k, beta).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (k, beta = 0.0))]
    fn cp1(k: u32, beta: f64) -> PyResult<Self> {
        Ok(PyProfile {
            inner: momentum::profile_cp1(k, beta).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn cpn(n: usize, bundle_beta: i64) -> PyResult<Self> {
        Ok(PyProfile {
            inner: momentum::profile_cpn(n, bundle_beta).map_err(to_py)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }

    fn phi(&self, tau: f64) -> f64 {
        self.inner.phi(tau)
    }

    fn scalar_curvature(&self, tau: f64) -> PyResult<f64> {
        self.inner.scalar_curvature_momentum(tau).map_err(to_py)
    }

    /// `(quotient, remainder)` of `P / Q` as strings in `tau`.
    fn simplify(&self) -> (String, String) {
        let (q, r) = self.inner.simplify_phi();
        (q.display("tau"), r.display("tau"))
    }

    fn radial_coordinate(&self, tau: f64) -> PyResult<f64> {
        momentum::radial_log_coordinate(&self.inner, tau, 1.0).map_err(to_py)
    }

    fn invert_radius(&self, r: f64) -> PyResult<f64> {
        momentum::invert_radius(&self.inner, r).map_err(to_py)
    }

    /// Momentum-formula residual and potential-based oracle on `taus`.
    fn check_scalar_flat<'py>(&self, py: Python<'py>, taus: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let rep = momentum::check_scalar_flat(&self.inner, &taus).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("max_residual", rep.max_residual)?;
        d.set_item("max_oracle_difference", rep.max_oracle_difference)?;
        d.set_item("oracle", rep.rows.iter().map(|r| r.oracle).collect::<Vec<_>>())?;
        Ok(d)
    }

    #[pyo3(signature = (window = DEFAULT_AE_WINDOW))]
    fn fit_ae<'py>(&self, py: Python<'py>, window: (f64, f64)) -> PyResult<Bound<'py, PyDict>> {
        let fit = asymptotics::fit_ae_remainder(&self.inner, window).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("exponent", fit.exponent)?;
        d.set_item("coefficient", fit.coefficient)?;
        d.set_item("r2", fit.r_squared)?;
        d.set_item("window", fit.window)?;
        Ok(d)
    }

    #[pyo3(signature = (window = DEFAULT_CUSP_WINDOW))]
    fn fit_cusp<'py>(&self, py: Python<'py>, window: (f64, f64)) -> PyResult<Bound<'py, PyDict>> {
        let fit = asymptotics::fit_cusp_coefficient(&self.inner, window).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("coefficient", fit.coefficient)?;
        d.set_item("a", fit.a)?;
        d.set_item("r2", fit.r_squared)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let r = self.inner.record();
        format!("MomentumProfile(dim={}, k={}, beta={})", self.inner.dim(), r.k, r.beta)
    }
}

/// Principal branch of Lambert W.
#[pyfunction]
fn lambert_w0(x: f64) -> PyResult<f64> {
    Ok(core::specialfn::lambert_w0(x).map_err(to_py)?.w)
}

/// Indicial roots for a base eigenvalue, sorted by real part.
#[pyfunction]
fn indicial_roots(lambda_e: f64) -> Vec<num_complex::Complex64> {
    cylinder::indicial_roots(&IndicialProblem::from_eigenvalue(lambda_e)).roots
}

/// `(ae_local, cusp_local, index)`.
#[pyfunction]
#[pyo3(signature = (n, eta = 0.25, delta = 0.5))]
fn fredholm_index(n: usize, eta: f64, delta: f64) -> PyResult<(i64, i64, i64)> {
    let b = cylinder::fredholm_index(n, eta, delta).map_err(to_py)?;
    Ok((b.ae_local, b.cusp_local, b.index))
}

/// `[(j, eigenvalue, multiplicity)]` with exact eigenvalues as strings.
#[pyfunction]
fn cp_spectrum(n: usize, j_max: u32) -> PyResult<Vec<(u32, String, u64)>> {
    let s = core::spectral_e::cp_spectrum(n, j_max).map_err(to_py)?;
    Ok(s.entries
        .into_iter()
        .map(|e| (e.j, e.eigenvalue, e.multiplicity))
        .collect())
}

/// Exact average scalar curvatures; rationals are passed and returned as strings.
#[pyfunction]
fn topology<'py>(py: Python<'py>, n: usize, epsilon: &str, c1: &str, vol: &str) -> PyResult<Bound<'py, PyDict>> {
    let p = |s: &str| topo::parse_rational(s).map_err(to_py);
    let d = KahlerClassData::new(n, p(c1)?, p(vol)?, p(epsilon)?).map_err(to_py)?;
    let r = topo::topology_report(&d).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("n", r.n)?;
    out.set_item("epsilon", r.epsilon)?;
    out.set_item("s_sol", r.s_sol)?;
    out.set_item("s_divisor", r.s_divisor)?;
    out.set_item("a", r.a)?;
    out.set_item("lambda_eps", r.lambda_eps)?;
    Ok(out)
}

/// Sweep of the glued potential over `epsilons` with the Hwang–Singer model end.
#[pyfunction]
#[pyo3(signature = (n, epsilons, phi1 = 0.1, k = 1))]
fn glue_sweep(n: usize, epsilons: Vec<f64>, phi1: f64, k: u32) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let profile = if n == 2 {
        momentum::profile_cp1(k, 0.0)
    } else {
        momentum::profile_cpn(n, -(k as i64))
    }
    .map_err(to_py)?;
    let s_base = -2.0 * phi1 * (n * (n + 1)) as f64;
    let sweep = gluing::deviation_sweep(&epsilons, n, &BaseCorrection::quadratic(phi1), Some(&profile), s_base)
        .map_err(to_py)?;
    Ok(sweep
        .rows
        .iter()
        .map(|r| (r.epsilon, r.min_margin, r.sup_deviation, r.scaled_deviation))
        .collect())
}

fn modes(v: Vec<(u32, f64)>) -> Vec<HarmonicMode> {
    v.into_iter()
        .map(|(degree, coeff)| HarmonicMode {
            degree,
            index: 0,
            coeff,
        })
        .collect()
}

/// Per-degree radial terms `[(degree, [(power, coeff)])]` of the biharmonic extension.
#[pyfunction]
#[pyo3(signature = (n, h, k, exterior = false))]
fn biharmonic(
    n: usize,
    h: Vec<(u32, f64)>,
    k: Vec<(u32, f64)>,
    exterior: bool,
) -> PyResult<Vec<(u32, Vec<(i64, f64)>)>> {
    let (h, k) = (modes(h), modes(k));
    let sol = if exterior {
        gluing::biharmonic_exterior(n, &h, &k, gluing::DEFAULT_MAX_DEGREE)
    } else {
        gluing::biharmonic_interior(n, &h, &k, gluing::DEFAULT_MAX_DEGREE)
    }
    .map_err(to_py)?;
    Ok(sol.modes.into_iter().map(|m| (m.degree, m.terms)).collect())
}

#[pymodule(name = "cuspkahler")]
pub fn cuspkahler_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add("NumericError", m.py().get_type::<NumericError>())?;
    m.add_function(wrap_pyfunction!(lambert_w0, m)?)?;
    m.add_function(wrap_pyfunction!(indicial_roots, m)?)?;
    m.add_function(wrap_pyfunction!(fredholm_index, m)?)?;
    m.add_function(wrap_pyfunction!(cp_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(topology, m)?)?;
    m.add_function(wrap_pyfunction!(glue_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(biharmonic, m)?)?;
    Ok(())
}
