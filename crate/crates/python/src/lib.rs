//! Python bindings: run configurations, catalog scenarios, and direct
//! access to the solver and its a-priori envelopes.

use std::path::PathBuf;

use mclaw_core::analysis::{a_priori_bounds, discrete_tv};
use mclaw_core::call::Call;
use mclaw_core::cli::{self as runner, scenarios};
use mclaw_core::expr::Expression;
use mclaw_core::flux::flux_from_call;
use mclaw_core::geometry::metric_from_call;
use mclaw_core::{CellComplex, Error, MetricField, NumericalFlux, Profile, SchemeConfig};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        e if runner::exit_code(&e) == 2 => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn call(text: &str) -> PyResult<Call> {
    Call::parse(text).map_err(|e| PyValueError::new_err(format!("`{text}`: {e}")))
}

fn json_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_flux_kind(s: &str) -> PyResult<NumericalFlux> {
    NumericalFlux::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown numerical flux `{s}`; use eo or llf")))
}

/// A validated run configuration.
#[pyclass(name = "RunConfig", from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: runner::RunConfig,
}

#[pymethods]
impl PyRunConfig {
    /// Parses the sectioned `key = value` configuration format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        runner::parse_config(text).map(|inner| Self { inner }).map_err(|e| to_py(e.into()))
    }

    /// Configuration of a built-in scenario.
    #[staticmethod]
    fn scenario(name: &str) -> PyResult<Self> {
        scenarios::scenario(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown scenario `{name}`")))
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[setter]
    fn set_n(&mut self, n: usize) {
        self.inner.n = n;
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }

    /// Also drops output times past the new end time.
    #[setter]
    fn set_t_end(&mut self, t: f64) {
        self.inner.t_end = t;
        self.inner.output_times.retain(|&o| o <= t);
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[setter]
    fn set_epsilon(&mut self, eps: f64) {
        self.inner.epsilon = eps;
    }

    #[getter]
    fn numerical_flux(&self) -> String {
        format!("{:?}", self.inner.numerical_flux)
    }

    #[setter]
    fn set_numerical_flux(&mut self, s: &str) -> PyResult<()> {
        self.inner.numerical_flux = parse_flux_kind(s)?;
        Ok(())
    }

    #[getter]
    fn output_times(&self) -> Vec<f64> {
        self.inner.times()
    }

    #[setter]
    fn set_output_times(&mut self, times: Vec<f64>) {
        self.inner.output_times = times;
    }

    #[getter]
    fn checks(&self) -> Vec<String> {
        self.inner.checks.iter().map(|c| c.to_string()).collect()
    }

    #[setter]
    fn set_checks(&mut self, checks: Vec<String>) -> PyResult<()> {
        self.inner.checks = checks.iter().map(|c| call(c)).collect::<PyResult<_>>()?;
        Ok(())
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        json_to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("RunConfig(name={:?}, dim={}, n={}, t_end={})", self.inner.name, self.inner.dim, self.inner.n, self.inner.t_end)
    }
}

/// Outcome of [`run`]: check verdicts, the report, and the stored states.
#[pyclass(name = "RunResult")]
struct PyRunResult {
    #[pyo3(get)]
    passed: bool,
    #[pyo3(get)]
    failed_checks: Vec<String>,
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    states: Vec<Vec<f64>>,
    #[pyo3(get)]
    cell_centers: Vec<[f64; 2]>,
    #[pyo3(get)]
    entropy_constant: f64,
    #[pyo3(get)]
    steps: usize,
    report: Py<PyAny>,
}

#[pymethods]
impl PyRunResult {
    /// Measured series, envelopes, constants and per-check outcomes.
    #[getter]
    fn report(&self, py: Python<'_>) -> Py<PyAny> {
        self.report.clone_ref(py)
    }

    fn __repr__(&self) -> String {
        format!("RunResult(passed={}, steps={}, failed_checks={:?})", self.passed, self.steps, self.failed_checks)
    }
}

/// Runs a configuration and evaluates its checks; writes the CSV and JSON
/// artifacts when `out_dir` is given.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None))]
fn run(py: Python<'_>, config: &PyRunConfig, out_dir: Option<PathBuf>) -> PyResult<PyRunResult> {
    let cfg = config.inner.clone();
    let outcome = py.detach(|| match &out_dir {
        Some(dir) => runner::run_scenario(&cfg, dir),
        None => runner::execute(&cfg),
    });
    let o = outcome.map_err(to_py)?;
    Ok(PyRunResult {
        passed: o.pass,
        failed_checks: o.failed_checks().into_iter().map(String::from).collect(),
        times: o.trajectory.times(),
        states: o.trajectory.states.iter().map(|s| s.u.clone()).collect(),
        cell_centers: o.centers.clone(),
        entropy_constant: o.entropy_constant,
        steps: o.trajectory.steps,
        report: json_to_py(py, &o.report)?,
    })
}

/// L¹ errors and observed orders over `resolutions`.
#[pyfunction]
fn converge(py: Python<'_>, config: &PyRunConfig, resolutions: Vec<usize>) -> PyResult<Py<PyAny>> {
    let cfg = config.inner.clone();
    let table = py.detach(|| runner::convergence_study(&cfg, &resolutions)).map_err(to_py)?;
    json_to_py(py, &table)
}

/// `(name, summary)` of every built-in scenario.
#[pyfunction]
fn list_scenarios() -> Vec<(&'static str, &'static str)> {
    scenarios::summaries()
}

/// Finite-volume solver on a uniform chart grid.
#[pyclass(name = "Solver")]
struct PySolver {
    inner: mclaw_core::Solver,
}

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (metric, flux, n, *, dim=None, profile=None, numerical_flux="eo", cfl=0.45, epsilon=0.0, t_end=1.0, quadrature=4))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        metric: &str,
        flux: &str,
        n: usize,
        dim: Option<usize>,
        profile: Option<&str>,
        numerical_flux: &str,
        cfl: f64,
        epsilon: f64,
        t_end: f64,
        quadrature: usize,
    ) -> PyResult<Self> {
        let family = metric_from_call(&call(metric)?, dim).map_err(to_py)?;
        let dim = family.dim();
        let profile = profile.map(Profile::parse).transpose().map_err(to_py)?;
        let flux = flux_from_call(&call(flux)?, dim, profile).map_err(to_py)?;
        let scheme = SchemeConfig { numerical_flux: parse_flux_kind(numerical_flux)?, cfl, epsilon, t_end, ..SchemeConfig::default() };
        let complex = CellComplex::build(dim, n, quadrature).map_err(to_py)?;
        let inner = mclaw_core::Solver::new(complex, MetricField::new(family), flux, scheme).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn cell_count(&self) -> usize {
        self.inner.complex().cell_count()
    }

    fn cell_centers(&self) -> Vec<[f64; 2]> {
        let c = self.inner.complex();
        (0..c.cell_count()).map(|k| c.cell_center(k)).collect()
    }

    /// Riemannian cell volumes at time `t`.
    #[pyo3(signature = (t=0.0))]
    fn cell_volumes(&self, t: f64) -> PyResult<Vec<f64>> {
        Ok(self.inner.snapshot(t).map_err(to_py)?.cell_volumes.clone())
    }

    /// Cell averages of an expression in `x`, `y` at `t = 0`.
    fn initial_state(&self, expression: &str) -> PyResult<Vec<f64>> {
        let e = Expression::parse(expression).map_err(to_py)?;
        Ok(self.inner.initial_state(&|r| e.eval(r, 0.0, 0.0)).map_err(to_py)?.u)
    }

    /// Integrates from `u0` (cell values or an expression) and returns the
    /// states at `times`.
    fn run(&self, py: Python<'_>, u0: &Bound<'_, PyAny>, times: Vec<f64>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let values: Vec<f64> = match u0.extract::<String>() {
            Ok(expr) => self.initial_state(&expr)?,
            Err(_) => u0.extract()?,
        };
        let state = self.inner.state_from_values(values, 0.0).map_err(to_py)?;
        let solver = &self.inner;
        let tr = py.detach(|| solver.run(state, &times, &mut [])).map_err(to_py)?;
        Ok((tr.times(), tr.states.into_iter().map(|s| s.u).collect()))
    }

    /// Axis-aligned discrete total variation of cell values at time `t`.
    #[pyo3(signature = (u, t=0.0))]
    fn total_variation(&self, u: Vec<f64>, t: f64) -> PyResult<f64> {
        if u.len() != self.inner.complex().cell_count() {
            return Err(PyValueError::new_err("state length differs from the cell count"));
        }
        Ok(discrete_tv(self.inner.complex(), &u, &*self.inner.snapshot(t).map_err(to_py)?))
    }

    /// L∞ and TV envelopes with their constants for data `u0`.
    fn bounds(&self, py: Python<'_>, u0: Vec<f64>, times: Vec<f64>) -> PyResult<Py<PyAny>> {
        let state = self.inner.state_from_values(u0, 0.0).map_err(to_py)?;
        let tv0 = discrete_tv(self.inner.complex(), &state.u, &*self.inner.snapshot(0.0).map_err(to_py)?);
        let b = a_priori_bounds(&self.inner, state.linf(), tv0, &times).map_err(to_py)?;
        json_to_py(py, &b)
    }
}

#[pymodule]
pub fn mclaw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PySolver>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(converge, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
