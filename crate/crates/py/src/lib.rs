//! Python bindings. Structured results are returned as plain dicts and lists.

use std::path::PathBuf;

use bosebox_core as core;
use core::twobody::{BoxGeometry, PotentialSampling, SolverOptions};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: core::Error) -> PyErr {
    use core::Error::*;
    match e {
        Config(_) | Domain(_) | Dimension(_) | Invalid(_) | Regime(_) | Size(_) | Pipeline { .. } | InsufficientData(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Serializes through JSON so that every report keeps its field names.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn sampling(name: &str) -> PyResult<PotentialSampling> {
    match name {
        "cell-center" => Ok(PotentialSampling::CellCenter),
        "cell-average" => Ok(PotentialSampling::CellAverage),
        other => Err(PyValueError::new_err(format!("unknown sampling `{other}`"))),
    }
}

#[pyclass(name = "Potential", frozen)]
struct PyPotential(core::Potential);

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn soft_sphere(v0: f64, r0: f64, kappa: f64) -> PyResult<Self> {
        core::Potential::soft_sphere(v0, r0, kappa).map(Self).map_err(err)
    }

    #[staticmethod]
    fn truncated_polynomial(v0: f64, r0: f64, kappa: f64) -> PyResult<Self> {
        core::Potential::truncated_polynomial(v0, r0, kappa).map(Self).map_err(err)
    }

    #[staticmethod]
    fn tabulated(samples: Vec<(f64, f64)>, kappa: f64) -> PyResult<Self> {
        core::Potential::tabulated(samples, kappa).map(Self).map_err(err)
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa()
    }

    #[getter]
    fn range(&self) -> f64 {
        self.0.r0()
    }

    fn __call__(&self, r: f64) -> f64 {
        self.0.coupled(r)
    }

    fn scattering_length(&self) -> PyResult<f64> {
        core::scattering::scattering_length(&self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Potential({:?}, R0={}, kappa={})", self.0.shape(), self.0.r0(), self.0.kappa())
    }
}

#[pyclass(name = "TwoBodySolution", frozen)]
struct PyTwoBody(core::twobody::TwoBodySolution);

#[pymethods]
impl PyTwoBody {
    #[getter]
    fn eigenvalue(&self) -> f64 {
        self.0.eigenvalue
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    /// (d, ℓ, m)
    #[getter]
    fn geometry(&self) -> (usize, f64, usize) {
        let g = &self.0.geometry;
        (g.d, g.ell, g.m)
    }

    /// Grid values of the minimizer, flattened with x before y.
    fn values(&self) -> Vec<f64> {
        self.0.field.values.clone()
    }

    fn properties<'py>(&self, py: Python<'py>, scattering_length: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &core::twobody::verify_minimizer_properties(&self.0, scattering_length))
    }

    #[pyo3(signature = (n, route="position", cutoff=None, coarse=None))]
    fn constant_term<'py>(
        &self,
        py: Python<'py>,
        n: f64,
        route: &str,
        cutoff: Option<usize>,
        coarse: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let sol = &self.0;
        let m = sol.geometry.m;
        let out = match route {
            "position" => core::energy::constant_term_position(n, sol),
            "spectral" => {
                let (unit, _) = core::twobody::rescale_to_unit_box(sol);
                let grid = coarse.unwrap_or(m);
                let (_, k) = core::kernels::build_w_and_k(&unit, sol.geometry.ell, n, grid).map_err(err)?;
                let (eta, _) = core::kernels::project_eta(&k);
                let p = cutoff.unwrap_or(grid - 1);
                core::energy::constant_term_spectral(&sol.potential, n, sol.geometry.ell, &eta, p, sol.sampling)
            }
            other => return Err(PyValueError::new_err(format!("unknown route `{other}`"))),
        }
        .map_err(err)?;
        to_py(py, &out)
    }
}

#[pyfunction]
#[pyo3(signature = (potential, r_max=None, steps=20_000))]
fn scatter<'py>(py: Python<'py>, potential: &PyPotential, r_max: Option<f64>, steps: usize) -> PyResult<Bound<'py, PyAny>> {
    let r_max = r_max.unwrap_or_else(|| core::scattering::default_r_max(&potential.0));
    let rep = core::scattering::scatter(&potential.0, r_max, steps).map_err(err)?;
    to_py(py, &rep)
}

#[pyfunction]
fn bessel_k(nu: u32, z: f64) -> PyResult<f64> {
    core::bessel::bessel_k(nu, z).map_err(err)
}

#[pyfunction]
fn free_kernel(dim: usize, eps: f64, x: Vec<f64>) -> PyResult<f64> {
    let spec = core::green::FreeKernelSpec::new(dim, eps).map_err(err)?;
    core::green::free_kernel(&spec, &x).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (eps, ell, x, y, radius=4))]
fn neumann_green<'py>(
    py: Python<'py>,
    eps: f64,
    ell: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    radius: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = core::green::FreeKernelSpec::new(x.len(), eps).map_err(err)?;
    to_py(py, &core::green::neumann_green(&spec, ell, &x, &y, radius).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (potential, d, ell, m, tol=1e-8, max_iter=500, sampling="cell-center"))]
fn solve_twobody(
    py: Python<'_>,
    potential: &PyPotential,
    d: usize,
    ell: f64,
    m: usize,
    tol: f64,
    max_iter: usize,
    sampling: &str,
) -> PyResult<PyTwoBody> {
    let g = BoxGeometry::new(d, ell, m).map_err(err)?;
    let opts = SolverOptions { tol, max_iter, sampling: self::sampling(sampling)? };
    let pot = potential.0.clone();
    py.detach(move || core::twobody::solve_with(&g, &pot, opts)).map(PyTwoBody).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (potential, d, ell, n, modes, order=core::energy::DEFAULT_ORDER))]
fn solve_fock<'py>(
    py: Python<'py>,
    potential: &PyPotential,
    d: usize,
    ell: f64,
    n: usize,
    modes: usize,
    order: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let pot = potential.0.clone();
    let s = py.detach(move || core::fock::solve_toy(&pot, d, ell, n, modes, order)).map_err(err)?;
    to_py(py, &s)
}

#[pyfunction]
fn periodic_ground_state<'py>(py: Python<'py>, a: f64, n: f64, cutoff: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &core::energy::periodic_ground_state(a, n, cutoff).map_err(err)?)
}

#[pyfunction]
fn lhy_energy(rho: f64, a: f64) -> PyResult<f64> {
    core::energy::lhy_energy(rho, a).map_err(err)
}

/// Minimizer (t, value) of the relaxed cell occupancy problem.
#[pyfunction]
fn minimize_occupancy(density: f64, ell: f64, p_cut: f64, a_factor: f64, c_lin: f64) -> PyResult<(f64, f64)> {
    let prob = core::thermo::CellProblem::from_parts(density, ell, p_cut, a_factor, c_lin).map_err(err)?;
    core::thermo::minimize_occupancy(&prob).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (potential, rhos, c=core::thermo::DEFAULT_REGIME, c_const=1.0))]
fn lower_bound<'py>(
    py: Python<'py>,
    potential: &PyPotential,
    rhos: Vec<f64>,
    c: f64,
    c_const: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &core::thermo::lower_bound_curve(&potential.0, &rhos, c, c_const).map_err(err)?)
}

/// Executes a TOML run configuration without writing files; returns the record.
#[pyfunction]
#[pyo3(signature = (text, base=None))]
fn execute_config<'py>(py: Python<'py>, text: &str, base: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = core::runs::RunConfig::from_toml(text).map_err(err)?;
    let rec = py.detach(move || core::runs::execute(&cfg, base.as_deref())).map_err(err)?;
    to_py(py, &rec)
}

#[pymodule]
fn bosebox(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add_class::<PyTwoBody>()?;
    m.add_function(wrap_pyfunction!(scatter, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(free_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(neumann_green, m)?)?;
    m.add_function(wrap_pyfunction!(solve_twobody, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fock, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(lhy_energy, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_occupancy, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(execute_config, m)?)?;
    Ok(())
}
