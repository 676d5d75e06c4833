//! Python bindings. The module is importable as `hidver`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hidver::regions as reg;
use hidver::svm;
use hidver::versioning as ver;
use hidver::{AttackMode, AttackSampleConfig, Line, Point2};

create_exception!(hidver, HidverError, PyValueError);

fn err(e: hidver::Error) -> PyErr {
    HidverError::new_err(e.to_string())
}

#[pyclass(name = "ScenarioConfig", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyScenario(hidver::ScenarioConfig);

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (c = 100.0, delta = 0.1, y_lim = 30.0))]
    fn new(c: f64, delta: f64, y_lim: f64) -> PyResult<Self> {
        hidver::ScenarioConfig::new(c, delta, y_lim).map(Self).map_err(err)
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    #[getter]
    fn y_lim(&self) -> f64 {
        self.0.y_lim
    }

    fn __repr__(&self) -> String {
        format!("ScenarioConfig(c={}, delta={}, y_lim={})", self.0.c, self.0.delta, self.0.y_lim)
    }
}

#[pyclass(name = "HiddenPoint", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyHidden(hidver::HiddenPoint);

#[pymethods]
impl PyHidden {
    #[new]
    fn new(v: f64, w: f64) -> Self {
        Self(hidver::HiddenPoint::new(v, w))
    }

    #[getter]
    fn v(&self) -> f64 {
        self.0.v
    }

    #[getter]
    fn w(&self) -> f64 {
        self.0.w
    }

    fn check_feasible(&self, s: &PyScenario) -> PyResult<()> {
        self.0.check_feasible(&s.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("HiddenPoint(v={}, w={})", self.0.v, self.0.w)
    }
}

#[pyclass(name = "DecisionBoundary", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyBoundary(hidver::DecisionBoundary);

#[pymethods]
impl PyBoundary {
    #[staticmethod]
    fn sloped(s: &PyScenario, k: f64, b: f64) -> PyResult<Self> {
        hidver::DecisionBoundary::sloped(&s.0, k, b).map(Self).map_err(err)
    }

    #[staticmethod]
    fn vertical(s: &PyScenario, x0: f64) -> PyResult<Self> {
        hidver::DecisionBoundary::vertical(&s.0, x0).map(Self).map_err(err)
    }

    #[getter]
    fn is_vertical(&self) -> bool {
        self.0.is_vertical()
    }

    /// `(k, b)` for `y = k·x + b`, or `None` for a vertical line.
    fn slope_intercept(&self) -> Option<(f64, f64)> {
        self.0.slope_intercept()
    }

    fn x_intercept(&self) -> f64 {
        self.0.x_intercept()
    }

    /// `"+"` or `"-"`.
    fn classify(&self, x: f64, y: f64) -> String {
        self.0.classify(Point2::new(x, y)).to_string()
    }

    fn mirror(&self) -> Self {
        Self(self.0.mirror())
    }

    fn __repr__(&self) -> String {
        match self.0.line() {
            Line::Sloped { k, b } => format!("DecisionBoundary(k={k}, b={b})"),
            Line::Vertical { x0 } => format!("DecisionBoundary(x0={x0})"),
        }
    }
}

#[pyclass(name = "Derivation", frozen, get_all)]
struct PyDerivation {
    case: String,
    k1: f64,
    k2: f64,
    support_segment: ((f64, f64), (f64, f64)),
}

fn regions(s: &hidver::ScenarioConfig, bds: &[PyBoundary]) -> PyResult<Vec<hidver::AttackableRegion>> {
    bds.iter()
        .map(|b| reg::build_attackable_region(s, &b.0).map_err(err))
        .collect()
}

fn score(t: hidver::TransferabilityScore) -> Option<f64> {
    t.get()
}

#[pyfunction]
fn boundary_from_hidden(s: &PyScenario, h: &PyHidden) -> PyResult<(PyBoundary, PyDerivation)> {
    let (bd, d) = svm::boundary_from_hidden(&s.0, h.0).map_err(err)?;
    let (p, q) = d.support_segment;
    Ok((
        PyBoundary(bd),
        PyDerivation {
            case: d.case.tag().into(),
            k1: d.tangents.k1,
            k2: d.tangents.k2,
            support_segment: ((p.x, p.y), (q.x, q.y)),
        },
    ))
}

#[pyfunction]
#[pyo3(signature = (s, h, resolution = svm::DEFAULT_ORACLE_RESOLUTION))]
fn oracle_boundary(s: &PyScenario, h: &PyHidden, resolution: usize) -> PyResult<PyBoundary> {
    svm::oracle_boundary(&s.0, h.0, resolution).map(PyBoundary).map_err(err)
}

#[pyfunction]
fn attackable_region_area(s: &PyScenario, bd: &PyBoundary) -> PyResult<f64> {
    reg::build_attackable_region(&s.0, &bd.0).map(|r| r.area()).map_err(err)
}

/// `None` when the source region is empty.
#[pyfunction]
fn directional_transferability(s: &PyScenario, source: PyBoundary, target: PyBoundary) -> PyResult<Option<f64>> {
    let ar = regions(&s.0, &[source, target])?;
    Ok(score(reg::directional_transferability(&ar[0], &ar[1])))
}

#[pyfunction]
#[pyo3(signature = (s, priors, target, mode = "ensemble"))]
fn transferability(s: &PyScenario, priors: Vec<PyBoundary>, target: PyBoundary, mode: &str) -> PyResult<Option<f64>> {
    let mode: AttackMode = mode.parse().map_err(err)?;
    if priors.is_empty() {
        return Err(HidverError::new_err("at least one prior is required"));
    }
    let ar = regions(&s.0, &priors)?;
    let t = reg::build_attackable_region(&s.0, &target.0).map_err(err)?;
    Ok(score(reg::exact_transferability(mode, &ar, &t)))
}

/// `(value, half_width, accepted, samples)`.
#[pyfunction]
#[pyo3(signature = (s, priors, target, n_samples, seed = 0, mode = "ensemble"))]
fn mc_transferability(
    py: Python<'_>,
    s: &PyScenario,
    priors: Vec<PyBoundary>,
    target: PyBoundary,
    n_samples: u64,
    seed: u64,
    mode: &str,
) -> PyResult<(f64, f64, u64, u64)> {
    let cfg = AttackSampleConfig {
        mode: mode.parse().map_err(err)?,
        n_samples,
        seed,
    };
    let priors: Vec<_> = priors.iter().map(|b| b.0).collect();
    let s = s.0;
    let est = py
        .detach(|| reg::mc_transferability(&s, &priors, &target.0, &cfg))
        .map_err(err)?;
    Ok((est.value, est.half_width, est.accepted, est.samples))
}

#[pyfunction]
fn check_zero_transfer(s: &PyScenario, a: &PyBoundary, b: &PyBoundary) -> PyResult<bool> {
    reg::check_zero_transfer(&a.0, &b.0, &s.0).map_err(err)
}

/// `(feasible, [c1, c2, c3], hidden point or None)`.
#[pyfunction]
fn check_boundary_feasibility(s: &PyScenario, k: f64, b: f64) -> PyResult<(bool, [bool; 3], Option<PyHidden>)> {
    let r = ver::check_boundary_feasibility(&s.0, k, b).map_err(err)?;
    Ok((
        r.feasible,
        [r.constraint_1, r.constraint_2, r.constraint_3],
        r.reconstructed_h.map(PyHidden),
    ))
}

#[pyfunction]
fn reconstruct_hidden_point(s: &PyScenario, k: f64, b: f64) -> PyResult<PyHidden> {
    ver::reconstruct_hidden_point(&s.0, k, b).map(PyHidden).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (s, k, tol = ver::DEFAULT_BMAX_TOL))]
fn find_bmax(s: &PyScenario, k: f64, tol: f64) -> PyResult<f64> {
    ver::find_bmax(&s.0, k, tol).map_err(err)
}

#[pyclass(name = "SequencePlan", frozen)]
struct PyPlan(ver::SequencePlan);

#[pymethods]
impl PyPlan {
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn step(&self) -> Option<f64> {
        self.0.step
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    fn boundaries(&self) -> Vec<PyBoundary> {
        self.0.boundaries().into_iter().map(PyBoundary).collect()
    }

    fn hidden_points(&self) -> Vec<PyHidden> {
        self.0.versions.iter().map(|v| PyHidden(v.hidden)).collect()
    }

    fn realizable(&self) -> Vec<bool> {
        self.0.versions.iter().map(|v| v.feasibility.feasible).collect()
    }

    /// `(bound_ok, union_ok, first_pair_ok, [(i, AT or None)])`.
    #[allow(clippy::type_complexity)]
    fn verify(&self) -> PyResult<(bool, bool, bool, Vec<(usize, Option<f64>)>)> {
        let r = ver::verify_plan(&self.0).map_err(err)?;
        let at = r.prefix_at.iter().map(|(i, s)| (*i, s.get())).collect();
        Ok((r.bound_ok, r.union_ok, r.first_pair_ok, at))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
fn plan_sequence(s: &PyScenario, n_versions: usize, k: f64, b_max: f64) -> PyResult<PyPlan> {
    ver::plan_sequence(&s.0, n_versions, k, b_max).map(PyPlan).map_err(err)
}

/// `(S(AR_1), [(N, step, S(AR_3), alpha)])`.
#[pyfunction]
#[pyo3(signature = (s, k = 7.0, b_max = 12.0, ns = vec![2, 4, 6, 8, 10]))]
#[allow(clippy::type_complexity)]
fn alpha_table(
    s: &PyScenario,
    k: f64,
    b_max: f64,
    ns: Vec<usize>,
) -> PyResult<(f64, Vec<(usize, Option<f64>, Option<f64>, f64)>)> {
    let (ar1, rows) = ver::alpha_table(&s.0, k, b_max, &ns).map_err(err)?;
    Ok((ar1, rows.iter().map(|r| (r.n_versions, r.step, r.ar3_area, r.alpha)).collect()))
}

#[pyclass(name = "CandidatePool", frozen)]
struct PyPool(ver::CandidatePool);

#[pymethods]
impl PyPool {
    fn hidden_points(&self) -> Vec<PyHidden> {
        self.0.hidden_points.iter().copied().map(PyHidden).collect()
    }

    fn boundaries(&self) -> Vec<PyBoundary> {
        self.0.boundaries.iter().copied().map(PyBoundary).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
#[pyo3(signature = (s, size, eps_d = ver::DEFAULT_EPS_D, seed = 0))]
fn generate_candidate_pool(s: &PyScenario, size: usize, eps_d: f64, seed: u64) -> PyResult<PyPool> {
    ver::generate_candidate_pool(&s.0, size, eps_d, seed).map(PyPool).map_err(err)
}

/// `[(pool index, score or None)]`, exact scores.
#[pyfunction]
#[pyo3(signature = (s, pool, initial, steps, mode = "ensemble"))]
fn greedy_sequence(
    py: Python<'_>,
    s: &PyScenario,
    pool: &PyPool,
    initial: Vec<PyBoundary>,
    steps: usize,
    mode: &str,
) -> PyResult<Vec<(usize, Option<f64>)>> {
    let cfg = AttackSampleConfig {
        mode: mode.parse().map_err(err)?,
        ..AttackSampleConfig::default()
    };
    let initial: Vec<_> = initial.iter().map(|b| b.0).collect();
    let s = s.0;
    let out = py
        .detach(|| ver::greedy_sequence(&s, &pool.0, &initial, steps, &cfg))
        .map_err(err)?;
    Ok(out.iter().map(|st| (st.index, st.score.get())).collect())
}

#[pyfunction]
fn random_baseline_sequence(s: &PyScenario, n: usize, seed: u64) -> PyResult<Vec<(PyHidden, PyBoundary)>> {
    let seq = ver::random_baseline_sequence(&s.0, n, seed).map_err(err)?;
    Ok(seq.into_iter().map(|(h, b)| (PyHidden(h), PyBoundary(b))).collect())
}

#[pyfunction]
fn max_prefix_compound(s: &PyScenario, seq: Vec<PyBoundary>) -> PyResult<f64> {
    let seq: Vec<_> = seq.iter().map(|b| b.0).collect();
    ver::max_prefix_compound(&s.0, &seq).map_err(err)
}

#[pymodule]
#[pyo3(name = "hidver")]
fn hidver_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HidverError", m.py().get_type::<HidverError>())?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyHidden>()?;
    m.add_class::<PyBoundary>()?;
    m.add_class::<PyDerivation>()?;
    m.add_class::<PyPlan>()?;
    m.add_class::<PyPool>()?;
    m.add_function(wrap_pyfunction!(boundary_from_hidden, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(attackable_region_area, m)?)?;
    m.add_function(wrap_pyfunction!(directional_transferability, m)?)?;
    m.add_function(wrap_pyfunction!(transferability, m)?)?;
    m.add_function(wrap_pyfunction!(mc_transferability, m)?)?;
    m.add_function(wrap_pyfunction!(check_zero_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(check_boundary_feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_hidden_point, m)?)?;
    m.add_function(wrap_pyfunction!(find_bmax, m)?)?;
    m.add_function(wrap_pyfunction!(plan_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_table, m)?)?;
    m.add_function(wrap_pyfunction!(generate_candidate_pool, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(random_baseline_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(max_prefix_compound, m)?)?;
    Ok(())
}
