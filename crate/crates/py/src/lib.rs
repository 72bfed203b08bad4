//! Python module `crescent`: label matrices, classification, realization,
//! verification and rigidity.

use crescent_core::classify::{classify_pipeline, distance_set, Budget};
use crescent_core::geometry::{self, Condition, SquaredDistanceMatrix};
use crescent_core::rigidity::{self, Framework, DEFAULT_RANK_TOL};
use crescent_core::solver::{self, embed_from_distances, solve_realization};
use crescent_core::{DistanceAssignment, Error, IsoClass, Tolerances};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "LabelMatrix", module = "crescent", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyLabelMatrix(crescent_core::LabelMatrix);

#[pymethods]
impl PyLabelMatrix {
    /// Parses canonical text "n u_12 u_13 ... u_(n-1)n".
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(PyLabelMatrix).map_err(py_err)
    }

    #[staticmethod]
    fn from_rows(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        crescent_core::LabelMatrix::from_rows(&rows).map(PyLabelMatrix).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn rows(&self) -> Vec<Vec<u8>> {
        self.0.rows()
    }

    fn upper_triangle(&self) -> Vec<u8> {
        self.0.upper_triangle()
    }

    fn distance_set(&self) -> Vec<Vec<u8>> {
        distance_set(&self.0).coordinates().iter().map(|c| c.labels().to_vec()).collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("LabelMatrix('{}')", self.0)
    }
}

#[pyclass(name = "IsoClass", module = "crescent", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyIsoClass(IsoClass);

#[pymethods]
impl PyIsoClass {
    #[getter]
    fn class_id(&self) -> usize {
        self.0.class_id
    }

    #[getter]
    fn representative(&self) -> PyLabelMatrix {
        PyLabelMatrix(self.0.representative.clone())
    }

    #[getter]
    fn member_count(&self) -> u64 {
        self.0.member_count
    }

    fn __repr__(&self) -> String {
        format!("IsoClass(class_id={}, representative='{}')", self.0.class_id, self.0.representative)
    }
}

#[pyclass(name = "ClassificationReport", module = "crescent", frozen)]
struct PyClassificationReport(crescent_core::ClassificationReport);

#[pymethods]
impl PyClassificationReport {
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn total_matrices(&self) -> u64 {
        self.0.total_matrices
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.0.class_count
    }

    /// (star, shared_base, trapezoid) rejection counts.
    #[getter]
    fn rejected(&self) -> (usize, usize, usize) {
        (self.0.star_rejected, self.0.shared_base_rejected, self.0.trapezoid_rejected)
    }

    #[getter]
    fn surviving(&self) -> Vec<PyIsoClass> {
        self.0.surviving_classes.iter().cloned().map(PyIsoClass).collect()
    }

    fn summary(&self) -> String {
        self.0.summary()
    }
}

#[pyclass(name = "SolverConfig", module = "crescent", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    starts: usize,
    max_iters: usize,
    residual_tol: f64,
    zero_tol: f64,
    margin_tol: f64,
    distinct_tol: f64,
    seed: u64,
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (starts=200, max_iters=500, residual_tol=1e-10, zero_tol=1e-9, margin_tol=1e-6, distinct_tol=1e-4, seed=42))]
    fn new(
        starts: usize,
        max_iters: usize,
        residual_tol: f64,
        zero_tol: f64,
        margin_tol: f64,
        distinct_tol: f64,
        seed: u64,
    ) -> Self {
        PySolverConfig { starts, max_iters, residual_tol, zero_tol, margin_tol, distinct_tol, seed }
    }
}

impl PySolverConfig {
    fn core(cfg: Option<&PySolverConfig>) -> solver::SolverConfig {
        let Some(c) = cfg else {
            return solver::SolverConfig::default();
        };
        solver::SolverConfig {
            starts: c.starts,
            max_iters: c.max_iters,
            residual_tol: c.residual_tol,
            zero_tol: c.zero_tol,
            margin_tol: c.margin_tol,
            distinct_tol: c.distinct_tol,
            rng_seed: c.seed,
            ..solver::SolverConfig::default()
        }
    }
}

#[pyclass(name = "Realization", module = "crescent", frozen, get_all)]
struct PyRealization {
    class_id: usize,
    coordinates: Vec<(f64, f64)>,
    distances: Vec<f64>,
    residual: f64,
    start_index: usize,
    family_dimension: usize,
}

impl From<solver::Realization> for PyRealization {
    fn from(r: solver::Realization) -> Self {
        PyRealization {
            class_id: r.class_id,
            coordinates: r.coordinates.iter().map(|p| (p[0], p[1])).collect(),
            distances: r.assignment.values().to_vec(),
            residual: r.residual,
            start_index: r.start_index,
            family_dimension: r.family_dimension,
        }
    }
}

#[pyclass(name = "Verdict", module = "crescent", frozen, get_all)]
struct PyVerdict {
    ok: bool,
    reason: Option<String>,
    failing_subset: Option<Vec<usize>>,
    value: Option<f64>,
}

#[pyclass(name = "RigidityReport", module = "crescent", frozen, get_all)]
struct PyRigidityReport {
    rank: usize,
    s_allowed: usize,
    rigid: bool,
    deletion_ranks: Vec<usize>,
    redundantly_rigid: bool,
    connectivity: usize,
    unique_realization: bool,
}

#[pyfunction]
fn count_matrices(n: usize) -> PyResult<u128> {
    crescent_core::count_matrices(n).map_err(py_err)
}

/// Full pipeline for n points; `max_n` caps the enumeration.
#[pyfunction]
#[pyo3(signature = (n, max_n=6))]
fn classify(py: Python<'_>, n: usize, max_n: usize) -> PyResult<PyClassificationReport> {
    let report = py.detach(|| classify_pipeline(n, &Budget { max_n })).map_err(py_err)?;
    Ok(PyClassificationReport(report))
}

/// First accepted witness for the matrix, or None under the budget.
#[pyfunction]
#[pyo3(signature = (matrix, config=None, class_id=1))]
fn realize(
    py: Python<'_>,
    matrix: &PyLabelMatrix,
    config: Option<PySolverConfig>,
    class_id: usize,
) -> PyResult<Option<PyRealization>> {
    let m = matrix.0.clone();
    let c = IsoClass { class_id, key: distance_set(&m), representative: m, member_count: 1 };
    let cfg = PySolverConfig::core(config.as_ref());
    let r = py.detach(|| solve_realization(&c, &cfg)).map_err(py_err)?;
    Ok(r.map(PyRealization::from))
}

/// (realizable_count, surviving_count) for n points.
#[pyfunction]
#[pyo3(signature = (n, config=None))]
fn census(py: Python<'_>, n: usize, config: Option<PySolverConfig>) -> PyResult<(usize, usize)> {
    let cfg = PySolverConfig::core(config.as_ref());
    let c = py.detach(|| solver::realizable_census(n, &cfg, &Budget::default())).map_err(py_err)?;
    Ok((c.realizable_count, c.surviving_count))
}

/// `values` lists d_1 = 1, d_2, ...
#[pyfunction]
#[pyo3(signature = (matrix, values, zero_tol=1e-9, margin_tol=1e-6, distinct_tol=1e-4))]
fn verify_realizable(
    matrix: &PyLabelMatrix,
    values: Vec<f64>,
    zero_tol: f64,
    margin_tol: f64,
    distinct_tol: f64,
) -> PyResult<PyVerdict> {
    let a = DistanceAssignment::from_values(values).map_err(py_err)?;
    let tol = Tolerances { zero: zero_tol, margin: margin_tol, distinct: distinct_tol };
    let v = geometry::verify_realizable(&matrix.0, &a, &tol, 2).map_err(py_err)?;
    Ok(PyVerdict {
        ok: v.ok,
        reason: v.reason.map(|r| condition_name(r).to_string()),
        failing_subset: v.failing_subset.map(|s| s.0.iter().map(|i| i + 1).collect()),
        value: v.value,
    })
}

fn condition_name(c: Condition) -> &'static str {
    match c {
        Condition::Planarity => "planarity",
        Condition::Collinearity => "collinearity",
        Condition::Concyclicity => "concyclicity",
        Condition::DistinctDistances => "distinct_distances",
    }
}

fn squared(rows: Vec<Vec<f64>>) -> PyResult<SquaredDistanceMatrix<f64>> {
    SquaredDistanceMatrix::from_rows(rows).map_err(py_err)
}

/// Cayley-Menger determinant of a squared-distance matrix.
#[pyfunction]
fn cm_det(rows: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(geometry::cm_det(&squared(rows)?))
}

#[pyfunction]
fn edm_det(rows: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(geometry::edm_det(&squared(rows)?))
}

/// Planar coordinates reproducing the distances, gauge-fixed.
#[pyfunction]
fn embed(matrix: &PyLabelMatrix, values: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    let a = DistanceAssignment::from_values(values).map_err(py_err)?;
    let pts = embed_from_distances(&matrix.0, &a).map_err(py_err)?;
    Ok(pts.iter().map(|p| (p[0], p[1])).collect())
}

#[pyfunction]
fn s_allowed(n: usize, d: usize) -> usize {
    rigidity::s_allowed(n, d)
}

/// Rigidity of the complete graph on the given planar points.
#[pyfunction]
#[pyo3(signature = (points, rank_tol=DEFAULT_RANK_TOL))]
fn rigidity_report(points: Vec<(f64, f64)>, rank_tol: f64) -> PyResult<PyRigidityReport> {
    let pts: Vec<[f64; 2]> = points.iter().map(|&(x, y)| [x, y]).collect();
    let f = Framework::complete(&pts).map_err(py_err)?;
    let r = rigidity::rigidity_report(&f, 0, rank_tol);
    Ok(PyRigidityReport {
        rank: r.rank,
        s_allowed: r.s_allowed,
        rigid: r.rigid,
        deletion_ranks: r.deletion_ranks,
        redundantly_rigid: r.redundantly_rigid,
        connectivity: r.connectivity,
        unique_realization: r.unique_realization,
    })
}

#[pymodule]
fn crescent(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLabelMatrix>()?;
    m.add_class::<PyIsoClass>()?;
    m.add_class::<PyClassificationReport>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyRealization>()?;
    m.add_class::<PyVerdict>()?;
    m.add_class::<PyRigidityReport>()?;
    m.add_function(wrap_pyfunction!(count_matrices, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    m.add_function(wrap_pyfunction!(verify_realizable, m)?)?;
    m.add_function(wrap_pyfunction!(cm_det, m)?)?;
    m.add_function(wrap_pyfunction!(edm_det, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(s_allowed, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity_report, m)?)?;
    Ok(())
}
