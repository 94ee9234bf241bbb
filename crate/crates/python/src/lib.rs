//! Python bindings: Kerr geometry, angular eigenvalues, Jost solutions and field evolution.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use teukolsky::angular::{eigenpairs, AngularParams, EigenOptions};
use teukolsky::grid::UniformGrid;
use teukolsky::propagator::{hamiltonian_coeffs, propagate, ContourSpec, GaussianBump, HamiltonianCoefficients, WaveState};
use teukolsky::radial::{jost_left, jost_right, wronskian, Branch, JostOptions, ModeParams, RadialGeometry, RadialProblem};
use teukolsky::timedomain::{evolve, EvolutionConfig};
use teukolsky::{Complex64, Error, KerrParams, TortoiseChart};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParams(_) | Error::Extreme { .. } | Error::Parity(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Deserializes an optional keyword dictionary through its JSON form.
fn from_dict<T: DeserializeOwned + Default>(py: Python<'_>, d: Option<&Bound<'_, PyDict>>) -> PyResult<T> {
    let Some(d) = d else { return Ok(T::default()) };
    let text: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

type Field = Vec<Vec<Complex64>>;

fn rows(a: &ndarray::Array2<Complex64>) -> Field {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Kerr black hole of mass `mass` and rotation `a`, `0 ≤ a < mass`.
#[pyclass(name = "Kerr", module = "teukolsky_py", frozen)]
struct PyKerr {
    params: KerrParams,
    chart: TortoiseChart,
}

#[pymethods]
impl PyKerr {
    #[new]
    #[pyo3(signature = (a, mass = 1.0))]
    fn new(a: f64, mass: f64) -> PyResult<Self> {
        let params = KerrParams::new(mass, a).map_err(py_err)?;
        let chart = TortoiseChart::new(params).map_err(py_err)?;
        Ok(PyKerr { params, chart })
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.params.mass
    }

    #[getter]
    fn a(&self) -> f64 {
        self.params.a
    }

    /// `(r₀, r₁)`, inner and outer horizon.
    fn horizons(&self) -> (f64, f64) {
        self.params.horizons()
    }

    fn r_of_u(&self, u: f64) -> PyResult<f64> {
        self.chart.r_of_u(u).map_err(py_err)
    }

    fn u_of_r(&self, r: f64) -> PyResult<f64> {
        self.chart.u_of_r(r).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Kerr(a={}, mass={})", self.params.a, self.params.mass)
    }
}

/// Lowest `n_max + 1` eigenvalues of the angular operator at `Ω_a = −aω`.
#[pyfunction]
#[pyo3(signature = (s, k, omega_a, n_max = 5, basis_size = 128))]
fn angular_eigenvalues(s: f64, k: f64, omega_a: Complex64, n_max: usize, basis_size: usize) -> PyResult<Vec<Complex64>> {
    let p = AngularParams::new(s, k, omega_a).map_err(py_err)?;
    let opts = EigenOptions { basis_size, grid_points: basis_size, ..EigenOptions::default() };
    Ok(eigenpairs(&p, n_max, &opts).map_err(py_err)?.lambdas().into_iter().take(n_max + 1).collect())
}

/// Normalized left and right Jost solutions on `u` and their Wronskian.
#[pyfunction]
#[pyo3(signature = (kerr, s, k, omega, lam, u, branch = "minus", rtol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn jost<'py>(
    py: Python<'py>,
    kerr: &PyKerr,
    s: f64,
    k: f64,
    omega: Complex64,
    lam: Complex64,
    u: Vec<f64>,
    branch: &str,
    rtol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let branch = match branch {
        "minus" => Branch::Minus,
        "plus" => Branch::Plus,
        b => return Err(PyValueError::new_err(format!("unknown branch {b:?}"))),
    };
    let geom = RadialGeometry::new(kerr.params, s, k).map_err(py_err)?;
    let mode = ModeParams::new(kerr.params, s, k, omega, lam).map_err(py_err)?;
    let p = RadialProblem::kerr(geom, mode).map_err(py_err)?;
    let opts = JostOptions { rtol, ..JostOptions::default() };
    let (left, right, w) = py
        .detach(|| -> teukolsky::Result<_> {
            let left = jost_left(&p, &u, &opts)?;
            let right = jost_right(&p, &u, branch, &opts)?;
            let w = wronskian(&left, &right)?;
            Ok((left, right, w))
        })
        .map_err(py_err)?;
    let column = |sol: &teukolsky::radial::JostSolution| -> (Vec<Complex64>, Vec<Complex64>) {
        (0..sol.u.len()).map(|i| sol.normalized(i)).unzip()
    };
    let d = PyDict::new(py);
    d.set_item("u", u.clone())?;
    d.set_item("left", column(&left))?;
    d.set_item("right", column(&right))?;
    d.set_item("wronskian", w.w)?;
    d.set_item("wronskian_spread", w.spread)?;
    Ok(d)
}

/// Discretized field problem for one `(s, k)` on a uniform `u`-grid.
#[pyclass(name = "FieldProblem", module = "teukolsky_py", frozen)]
struct PyFieldProblem {
    coeffs: Arc<HamiltonianCoefficients>,
}

#[pymethods]
impl PyFieldProblem {
    #[new]
    #[pyo3(signature = (kerr, s, k, u_min, u_max, du, angular_size = 24, fd_order = 8))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        py: Python<'_>,
        kerr: &PyKerr,
        s: f64,
        k: f64,
        u_min: f64,
        u_max: f64,
        du: f64,
        angular_size: usize,
        fd_order: usize,
    ) -> PyResult<Self> {
        let geom = RadialGeometry::new(kerr.params, s, k).map_err(py_err)?;
        let grid = UniformGrid::spanning(u_min, u_max, du).map_err(py_err)?;
        let coeffs = py.detach(|| hamiltonian_coeffs(&geom, grid, angular_size, fd_order)).map_err(py_err)?;
        Ok(PyFieldProblem { coeffs: Arc::new(coeffs) })
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.coeffs.grid.points()
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.coeffs.angular.theta.clone()
    }

    /// Spectral constant `c` bounding the non-real spectrum.
    fn spectral_constant(&self) -> f64 {
        self.coeffs.spectral_constant()
    }

    /// Fields `Φ(t)` at each of `times` (all `≤ 0`) from the contour representation.
    /// `initial` holds the Gaussian bump keys, `contour` overrides contour settings.
    #[pyo3(signature = (initial, times, contour = None))]
    fn propagate(
        &self,
        py: Python<'_>,
        initial: &Bound<'_, PyDict>,
        times: Vec<f64>,
        contour: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Vec<(f64, Field)>> {
        let psi0 = self.initial(py, initial)?;
        let spec: ContourSpec = from_dict(py, contour)?;
        let coeffs = self.coeffs.clone();
        let p = py.detach(|| propagate(&coeffs, &psi0, &times, &spec)).map_err(py_err)?;
        Ok(p.times.iter().zip(&p.states).map(|(t, st)| (*t, rows(&st.phi))).collect())
    }

    /// Fields at `times` from the time-domain integrator; `settings` overrides its defaults.
    #[pyo3(signature = (initial, times, settings = None))]
    fn evolve(
        &self,
        py: Python<'_>,
        initial: &Bound<'_, PyDict>,
        times: Vec<f64>,
        settings: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Vec<(f64, Field)>> {
        let psi0 = self.initial(py, initial)?;
        let mut cfg: EvolutionConfig = from_dict(py, settings)?;
        cfg.duration = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        cfg.snapshot_times = times.clone();
        let coeffs = self.coeffs.clone();
        let tr = py.detach(|| evolve(&coeffs, &psi0, &cfg)).map_err(py_err)?;
        times
            .iter()
            .map(|t| {
                let i = tr
                    .times
                    .iter()
                    .position(|s| (s - t).abs() < 1e-9)
                    .ok_or_else(|| PyRuntimeError::new_err(format!("no snapshot at t = {t}")))?;
                Ok((*t, rows(&tr.states[i].phi)))
            })
            .collect()
    }
}

impl PyFieldProblem {
    fn initial(&self, py: Python<'_>, d: &Bound<'_, PyDict>) -> PyResult<WaveState> {
        let text: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
        let bump: GaussianBump = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        bump.sample(&self.coeffs.basis, &self.coeffs.angular.x, &self.coeffs.grid).map_err(py_err)
    }
}

#[pymodule]
fn teukolsky_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", teukolsky::VERSION)?;
    m.add_class::<PyKerr>()?;
    m.add_class::<PyFieldProblem>()?;
    m.add_function(wrap_pyfunction!(angular_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(jost, m)?)?;
    Ok(())
}
