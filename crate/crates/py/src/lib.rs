//! Python bindings for `stringsens`.
//!
//! Structured reports come back as plain dicts; complex numbers inside them
//! are `[re, im]` pairs.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use stringsens::string_sensitivity::{self as ss, FrequencyGrid, Method, Variant};
use stringsens::{fundamental_limits as fl, Error, Poly};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Refused(_)
        | Error::InvalidGrid(_)
        | Error::ZeroDenominator
        | Error::ZeroPolynomial
        | Error::PoleNotFound(_)
        | Error::NotAxisPole(_)
        | Error::MultiplicityMismatch { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(|e: String| PyValueError::new_err(e))
}

fn variant(name: &str) -> PyResult<Variant> {
    match name {
        "pinned" => Ok(Variant::Pinned),
        "dirichlet" => Ok(Variant::Dirichlet),
        other => Err(PyValueError::new_err(format!(
            "variant must be \"pinned\" or \"dirichlet\", got \"{other}\""
        ))),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A real rational transfer function, coefficients in ascending powers of s.
#[pyclass(name = "RationalTF", module = "stringsens_py", frozen)]
struct PyRationalTF {
    inner: stringsens::RationalTF,
}

#[pymethods]
impl PyRationalTF {
    #[new]
    fn new(num: Vec<f64>, den: Vec<f64>) -> PyResult<Self> {
        let inner = stringsens::RationalTF::from_coeffs(&num, &den).map_err(to_py)?;
        Ok(PyRationalTF { inner })
    }

    #[getter]
    fn num(&self) -> Vec<f64> {
        self.inner.num().coeffs().to_vec()
    }

    #[getter]
    fn den(&self) -> Vec<f64> {
        self.inner.den().coeffs().to_vec()
    }

    fn relative_degree(&self) -> i64 {
        self.inner.relative_degree()
    }

    /// Distinct poles as `(location, multiplicity)` pairs.
    fn poles(&self) -> Vec<(Complex64, usize)> {
        self.inner
            .poles()
            .iter()
            .map(|r| (r.location, r.multiplicity))
            .collect()
    }

    fn zeros(&self) -> Vec<(Complex64, usize)> {
        self.inner
            .zeros()
            .iter()
            .map(|r| (r.location, r.multiplicity))
            .collect()
    }

    fn __call__(&self, s: Complex64) -> PyResult<Complex64> {
        self.inner.eval(s).map_err(to_py)
    }

    fn __mul__(&self, other: &PyRationalTF) -> PyResult<PyRationalTF> {
        let inner = self.inner.mul(&other.inner).map_err(to_py)?;
        Ok(PyRationalTF { inner })
    }

    /// Laurent coefficients `[a_{-m}, ..., a_{num_terms-m-1}]` at pole `p`.
    #[pyo3(signature = (p, m, num_terms = 3))]
    fn laurent_at(&self, p: Complex64, m: usize, num_terms: usize) -> PyResult<Vec<Complex64>> {
        let l = self.inner.laurent_at(p, m, num_terms).map_err(to_py)?;
        Ok(l.coeffs)
    }

    fn __repr__(&self) -> String {
        format!("RationalTF(num={:?}, den={:?})", self.num(), self.den())
    }
}

#[pyfunction]
fn eig_pinned(n: usize) -> Vec<f64> {
    ss::eig_pinned(n)
}

#[pyfunction]
fn eig_dirichlet(n: usize) -> Vec<f64> {
    ss::eig_dirichlet(n)
}

/// The root of `ζ² - (2 + 1/L)ζ + 1 = 0` inside the unit disk.
#[pyfunction]
fn zeta(loop_value: Complex64) -> PyResult<Complex64> {
    ss::zeta(loop_value).map_err(to_py)
}

/// `S_N(s)` for the loop `lp`.
#[pyfunction]
#[pyo3(signature = (lp, n, s, method = "auto"))]
fn sensitivity(lp: &PyRationalTF, n: usize, s: Complex64, method: &str) -> PyResult<Complex64> {
    let m = self::method(method)?;
    Ok(ss::evaluate(&lp.inner, n, s, m).map_err(to_py)?.value)
}

/// `S_N(jω)` on a log grid; returns `(omegas, values)`.
#[pyfunction]
#[pyo3(signature = (lp, n, omega_min = 1e-2, omega_max = 1e2, points_per_decade = 200, method = "auto"))]
fn sweep(
    lp: &PyRationalTF,
    n: usize,
    omega_min: f64,
    omega_max: f64,
    points_per_decade: usize,
    method: &str,
) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let grid = FrequencyGrid::log(omega_min, omega_max, points_per_decade);
    let r = ss::sweep(&lp.inner, n, &grid, self::method(method)?).map_err(to_py)?;
    Ok((r.omegas, r.values))
}

#[pyfunction]
#[pyo3(signature = (lp, axis_tol = 1e-7))]
fn hinf_lower_bound<'py>(
    py: Python<'py>,
    lp: &PyRationalTF,
    axis_tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_dict(
        py,
        &fl::hinf_lower_bound(&lp.inner, axis_tol).map_err(to_py)?,
    )
}

#[pyfunction]
#[pyo3(signature = (lp, pole, n, method = "auto", axis_tol = 1e-7))]
fn probe_peak<'py>(
    py: Python<'py>,
    lp: &PyRationalTF,
    pole: Complex64,
    n: usize,
    method: &str,
    axis_tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = fl::probe_peak(&lp.inner, pole, n, self::method(method)?, axis_tol).map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
fn stable_for_all_gains<'py>(py: Python<'py>, lp: &PyRationalTF) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &fl::stable_for_all_gains(&lp.inner).map_err(to_py)?)
}

#[pyfunction]
fn gain_crossings<'py>(py: Python<'py>, lp: &PyRationalTF) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &fl::gain_crossings(&lp.inner).map_err(to_py)?)
}

/// Routh-Hurwitz test on ascending real coefficients.
#[pyfunction]
fn routh_hurwitz_stable(coeffs: Vec<f64>) -> PyResult<bool> {
    fl::routh_hurwitz_stable(&Poly::new(coeffs)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (lp, n, method = "auto", tol = 1e-6))]
fn bode_integral<'py>(
    py: Python<'py>,
    lp: &PyRationalTF,
    n: usize,
    method: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = fl::bode_integral(&lp.inner, n, self::method(method)?, tol).map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (lp, n, variant = "pinned", tol = 1e-6))]
fn det_log_integral<'py>(
    py: Python<'py>,
    lp: &PyRationalTF,
    n: usize,
    variant: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = fl::det_log_integral(&lp.inner, n, self::variant(variant)?, tol).map_err(to_py)?;
    to_dict(py, &r)
}

#[pymodule]
fn stringsens_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRationalTF>()?;
    m.add_function(wrap_pyfunction!(eig_pinned, m)?)?;
    m.add_function(wrap_pyfunction!(eig_dirichlet, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(hinf_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(probe_peak, m)?)?;
    m.add_function(wrap_pyfunction!(stable_for_all_gains, m)?)?;
    m.add_function(wrap_pyfunction!(gain_crossings, m)?)?;
    m.add_function(wrap_pyfunction!(routh_hurwitz_stable, m)?)?;
    m.add_function(wrap_pyfunction!(bode_integral, m)?)?;
    m.add_function(wrap_pyfunction!(det_log_integral, m)?)?;
    Ok(())
}
