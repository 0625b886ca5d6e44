//! Python bindings: `import pycondcap`.

use std::path::PathBuf;

use condcap::config::ProblemConfig;
use condcap::{
    BoundaryComponent, CaseInfo, CondenserGeometry, CondenserProblem, Error, ErrorKind,
    Orientation, Role, RunOutput, SolveMode, SolverOptions, C64,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e.kind() {
        ErrorKind::Solver => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn orientation(name: &str) -> PyResult<Orientation> {
    match name {
        "ccw" => Ok(Orientation::Ccw),
        "cw" => Ok(Orientation::Cw),
        _ => Err(PyValueError::new_err(format!(
            "orientation must be 'ccw' or 'cw', got {name:?}"
        ))),
    }
}

fn role(name: &str) -> PyResult<Role> {
    match name {
        "plate" => Ok(Role::Plate),
        "neumann" | "wall" => Ok(Role::Neumann),
        _ => Err(PyValueError::new_err(format!(
            "role must be 'plate' or 'neumann', got {name:?}"
        ))),
    }
}

fn options(mode: Option<&str>, tol: Option<f64>, maxit: Option<usize>) -> PyResult<SolverOptions> {
    let defaults = SolverOptions::default();
    let mode = match mode {
        None | Some("auto") => SolveMode::Auto,
        Some("direct") => SolveMode::Direct,
        Some("iterative") => SolveMode::Iterative,
        Some(other) => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    Ok(SolverOptions {
        mode,
        tol: tol.unwrap_or(defaults.tol),
        maxit: maxit.unwrap_or(defaults.maxit),
        ..defaults
    })
}

/// One boundary curve.
#[pyclass(frozen, from_py_object, module = "pycondcap")]
#[derive(Clone)]
pub struct Curve {
    inner: BoundaryComponent,
}

#[pymethods]
impl Curve {
    #[staticmethod]
    #[pyo3(signature = (center, radius, orientation = "cw", role = "plate"))]
    fn circle(center: C64, radius: f64, orientation: &str, role: &str) -> PyResult<Self> {
        let c = BoundaryComponent::circle(center, radius, self::orientation(orientation)?)
            .map_err(to_py)?;
        Ok(Self {
            inner: c.with_role(self::role(role)?),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (center, semi_axes, rotation = 0.0, orientation = "cw", role = "plate"))]
    fn ellipse(
        center: C64,
        semi_axes: (f64, f64),
        rotation: f64,
        orientation: &str,
        role: &str,
    ) -> PyResult<Self> {
        let c = BoundaryComponent::ellipse(
            center,
            semi_axes,
            rotation,
            self::orientation(orientation)?,
        )
        .map_err(to_py)?;
        Ok(Self {
            inner: c.with_role(self::role(role)?),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (vertices, orientation = "cw", grading = 3, role = "plate"))]
    fn polygon(vertices: Vec<C64>, orientation: &str, grading: u32, role: &str) -> PyResult<Self> {
        let c = BoundaryComponent::polygon(vertices, self::orientation(orientation)?, grading)
            .map_err(to_py)?;
        Ok(Self {
            inner: c.with_role(self::role(role)?),
        })
    }

    /// `η(t) = Σ c_k e^{ikt}` from `(k, c_k)` pairs.
    #[staticmethod]
    #[pyo3(signature = (coefficients, orientation = "cw", role = "plate"))]
    fn trigonometric(
        coefficients: Vec<(i64, C64)>,
        orientation: &str,
        role: &str,
    ) -> PyResult<Self> {
        let c = BoundaryComponent::trigonometric(coefficients, self::orientation(orientation)?)
            .map_err(to_py)?;
        Ok(Self {
            inner: c.with_role(self::role(role)?),
        })
    }

    /// `(η(t), η'(t))`.
    fn eval(&self, t: f64) -> (C64, C64) {
        let p = self.inner.eval(t);
        (p.z, p.dz)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.shape().kind()
    }

    #[getter]
    fn orientation(&self) -> &'static str {
        self.inner.orientation().name()
    }

    #[getter]
    fn role(&self) -> &'static str {
        match self.inner.role() {
            Role::Plate => "plate",
            Role::Neumann => "neumann",
        }
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    fn __repr__(&self) -> String {
        format!(
            "Curve({}, {}, {})",
            self.kind(),
            self.orientation(),
            self.role()
        )
    }
}

fn case_dict<'py>(py: Python<'py>, case: &CaseInfo) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("case", case.label())?;
    d.set_item("g_bounded", case.g_bounded)?;
    d.set_item("b_bounded", case.b_bounded)?;
    d.set_item("m", case.m)?;
    d.set_item("ell", case.ell)?;
    d.set_item("m_prime", case.m_prime)?;
    d.set_item("ell_prime", case.ell_prime)?;
    Ok(d)
}

/// Plates followed by Neumann walls, with optional auxiliary points.
#[pyclass(frozen, module = "pycondcap")]
pub struct Geometry {
    inner: CondenserGeometry,
}

#[pymethods]
impl Geometry {
    /// `aux_points` maps a 0-based plate index to a point inside that plate.
    #[new]
    #[pyo3(signature = (curves, aux_points = None, field_point = None))]
    fn new(
        curves: Vec<Curve>,
        aux_points: Option<Vec<(usize, C64)>>,
        field_point: Option<C64>,
    ) -> PyResult<Self> {
        let mut g =
            CondenserGeometry::new(curves.into_iter().map(|c| c.inner).collect()).map_err(to_py)?;
        for (k, z) in aux_points.unwrap_or_default() {
            g = g.with_aux_point(k, z).map_err(to_py)?;
        }
        if let Some(z) = field_point {
            g = g.with_field_point(z);
        }
        Ok(Self { inner: g })
    }

    #[getter]
    fn num_plates(&self) -> usize {
        self.inner.num_plates()
    }

    #[getter]
    fn num_walls(&self) -> usize {
        self.inner.num_walls()
    }

    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let case = condcap::classify(&self.inner).map_err(to_py)?;
        case_dict(py, &case)
    }

    /// Image under `z ↦ rho·z + w`.
    fn transformed(&self, rho: C64, w: C64) -> Self {
        Self {
            inner: self.inner.transformed(rho, w),
        }
    }
}

/// Capacity, constants and potential of one condenser.
#[pyclass(frozen, module = "pycondcap")]
pub struct Solution {
    inner: RunOutput,
}

#[pymethods]
impl Solution {
    #[getter]
    fn capacity(&self) -> f64 {
        self.inner.capacity
    }

    #[getter]
    fn a(&self) -> Vec<f64> {
        self.inner.constants.a.clone()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.constants.c
    }

    #[getter]
    fn nu(&self) -> Vec<f64> {
        self.inner.constants.nu.clone()
    }

    #[getter]
    fn case<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        case_dict(py, self.inner.case())
    }

    /// `f` at the boundary nodes.
    fn boundary_values(&self) -> Vec<C64> {
        self.inner.boundary_values().to_vec()
    }

    /// `u` at points of the field; points outside or too close to the
    /// boundary raise `ValueError`.
    fn potential(&self, points: Vec<C64>) -> PyResult<Vec<f64>> {
        self.inner.field.potential_at(&points).map_err(to_py)
    }

    /// `(points, values, masks)` on an `nx × ny` grid over
    /// `(xmin, xmax, ymin, ymax)`; masked values are `None`.
    #[allow(clippy::type_complexity)]
    fn grid(
        &self,
        bounds: (f64, f64, f64, f64),
        nx: usize,
        ny: usize,
    ) -> PyResult<(Vec<C64>, Vec<Option<f64>>, Vec<String>)> {
        let (x0, x1, y0, y1) = bounds;
        let g = condcap::grid(&self.inner.field, [x0, x1, y0, y1], nx, ny).map_err(to_py)?;
        let masks = g.mask.iter().map(|m| m.label()).collect();
        Ok((g.points, g.values, masks))
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(capacity={}, case={})",
            self.inner.capacity,
            self.inner.case().label()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (geometry, levels, n = 256, mode = None, tol = None, maxit = None))]
fn solve(
    py: Python<'_>,
    geometry: &Geometry,
    levels: Vec<f64>,
    n: usize,
    mode: Option<&str>,
    tol: Option<f64>,
    maxit: Option<usize>,
) -> PyResult<Solution> {
    let opts = options(mode, tol, maxit)?;
    let problem = CondenserProblem::new(geometry.inner.clone(), levels).map_err(to_py)?;
    let out = py
        .detach(|| condcap::run(&problem, n, &opts))
        .map_err(to_py)?;
    Ok(Solution { inner: out })
}

#[pyfunction]
#[pyo3(signature = (geometry, levels, n = 256, mode = None, tol = None, maxit = None))]
fn capacity(
    py: Python<'_>,
    geometry: &Geometry,
    levels: Vec<f64>,
    n: usize,
    mode: Option<&str>,
    tol: Option<f64>,
    maxit: Option<usize>,
) -> PyResult<f64> {
    Ok(solve(py, geometry, levels, n, mode, tol, maxit)?
        .inner
        .capacity)
}

/// Harmonic measure of plate `j` (1-based) at `points`.
#[pyfunction]
#[pyo3(signature = (geometry, j, points, n = 256))]
fn harmonic_measure(
    py: Python<'_>,
    geometry: &Geometry,
    j: usize,
    points: Vec<C64>,
    n: usize,
) -> PyResult<Vec<f64>> {
    let opts = SolverOptions::default();
    py.detach(|| condcap::harmonic_measure(&geometry.inner, j, &points, n, &opts))
        .map_err(to_py)
}

/// Harmonic measures of all plates; one list per plate.
#[pyfunction]
#[pyo3(signature = (geometry, points, n = 256))]
fn harmonic_measures(
    py: Python<'_>,
    geometry: &Geometry,
    points: Vec<C64>,
    n: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let opts = SolverOptions::default();
    py.detach(|| condcap::harmonic_measures(&geometry.inner, &points, n, &opts))
        .map_err(to_py)
}

/// Runs a JSON config file and returns the `cap` result document as a JSON string.
#[pyfunction]
#[pyo3(signature = (path, n = None))]
fn cap_config(py: Python<'_>, path: PathBuf, n: Option<usize>) -> PyResult<String> {
    let cfg = ProblemConfig::load(&path).map_err(to_py)?;
    let n = n.unwrap_or(cfg.n);
    let problem = cfg.problem().map_err(to_py)?;
    let opts = cfg.solver_options();
    let out = py
        .detach(|| condcap::run(&problem, n, &opts))
        .map_err(to_py)?;
    Ok(condcap::cli::cap_document(&out, n, &cfg).to_string())
}

/// Exact capacity of the unit disk and the disk `|z − a| ≤ r`.
#[pyfunction]
fn two_circle_capacity(a: f64, r: f64) -> f64 {
    condcap::two_circle_capacity(a, r)
}

#[pymodule]
pub fn pycondcap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Curve>()?;
    m.add_class::<Geometry>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_measure, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_measures, m)?)?;
    m.add_function(wrap_pyfunction!(cap_config, m)?)?;
    m.add_function(wrap_pyfunction!(two_circle_capacity, m)?)?;
    Ok(())
}
