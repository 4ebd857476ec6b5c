//! Python bindings: the action model, recognition primitives and strategy
//! execution, driven from Python for quick experiments.
//!
//! Build with `cargo build -p cgda-py --release`; the smoke test under
//! `python/` copies the produced cdylib onto `sys.path` and imports it as
//! `cgda_py`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use cgda::model::{
    self, compute_goal_count, generalize as generalize_model, FeatureTrajectory,
};
use cgda::recognition::{cost_matrix, dtw_cost, discrepancy, FeatureWeights};
use cgda::scenario::{self, Scenario};
use cgda::strategies::{execute_scenario, StrategyKind};

fn to_py_err(e: cgda::Error) -> PyErr {
    match e {
        cgda::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A generalized action: m features by n intermediate goals.
#[pyclass(name = "Action")]
#[derive(Clone)]
struct PyAction {
    inner: FeatureTrajectory,
}

#[pymethods]
impl PyAction {
    /// Loads an action JSON file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyAction {
            inner: model::read_action(&path).map_err(to_py_err)?,
        })
    }

    /// Generalizes every demo CSV in a directory.
    #[staticmethod]
    fn generalize(demos_dir: PathBuf, t_min: f64) -> PyResult<Self> {
        let demos = model::load_demonstrations(&demos_dir).map_err(to_py_err)?;
        Ok(PyAction {
            inner: generalize_model(&demos, t_min).map_err(to_py_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        model::write_action(&path, &self.inner).map_err(to_py_err)
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names.clone()
    }

    #[getter]
    fn feature_units(&self) -> Vec<String> {
        self.inner.feature_units.clone()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn t_min(&self) -> f64 {
        self.inner.t_min
    }

    #[getter]
    fn d_time(&self) -> f64 {
        self.inner.d_time
    }

    /// Goal column j as an m-vector.
    fn goal(&self, j: usize) -> PyResult<Vec<f64>> {
        if j >= self.inner.n() {
            return Err(PyValueError::new_err(format!(
                "goal {j} out of range 0..{}",
                self.inner.n()
            )));
        }
        Ok(self.inner.goal(j))
    }

    /// Row-major m x n goal matrix.
    fn values(&self) -> Vec<Vec<f64>> {
        self.inner.values().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Action({} features x {} goals, t_min={} s)",
            self.inner.m(),
            self.inner.n(),
            self.inner.t_min
        )
    }
}

/// floor(d_time / t_min): the number of intermediate goals an action of the
/// given duration is sliced into.
#[pyfunction]
fn goal_count(d_time: f64, t_min: f64) -> PyResult<usize> {
    compute_goal_count(d_time, t_min).map_err(to_py_err)
}

/// Dynamic-time-warping alignment cost between two scalar sequences with
/// the absolute-difference ground cost.
#[pyfunction]
fn dtw(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    Ok(dtw_cost(&cost_matrix(&a, &b).map_err(to_py_err)?))
}

/// Discrepancy between an observed sample stream (demo CSV format) and an
/// action, resampled at `t` (the action's own interval by default).
#[pyfunction]
#[pyo3(signature = (action, observed_csv, t=None))]
fn recognize(action: &PyAction, observed_csv: PathBuf, t: Option<f64>) -> PyResult<f64> {
    let demo = model::read_demo_csv(&observed_csv).map_err(to_py_err)?;
    let t = t.unwrap_or(action.inner.t_min);
    let observed = model::resample_observation(demo.samples(), t).map_err(to_py_err)?;
    let weights = FeatureWeights::from_action(&action.inner).map_err(to_py_err)?;
    discrepancy(&observed, &action.inner, &weights).map_err(to_py_err)
}

/// Synthesizes the scenario's demonstrations into `out_dir` as CSV files and
/// returns their ids.
#[pyfunction]
fn generate_demonstrations(scenario_path: PathBuf, out_dir: PathBuf) -> PyResult<Vec<String>> {
    let scenario = Scenario::load(&scenario_path).map_err(to_py_err)?;
    let demos = scenario::generate_demonstrations(&scenario).map_err(to_py_err)?;
    scenario::write_demonstrations(&out_dir, &demos).map_err(to_py_err)?;
    Ok(demos.into_iter().map(|d| d.id).collect())
}

/// Runs one execution strategy on a scenario and returns the full report as
/// a JSON string.
#[pyfunction]
#[pyo3(signature = (action, scenario_path, strategy="oet", seed=None))]
fn execute(
    action: &PyAction,
    scenario_path: PathBuf,
    strategy: &str,
    seed: Option<u64>,
) -> PyResult<String> {
    let kind = StrategyKind::from_str(strategy).map_err(to_py_err)?;
    let scenario = Scenario::load(Path::new(&scenario_path)).map_err(to_py_err)?;
    let report = execute_scenario(&action.inner, &scenario, Some(kind), seed).map_err(to_py_err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn cgda_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAction>()?;
    m.add_function(wrap_pyfunction!(goal_count, m)?)?;
    m.add_function(wrap_pyfunction!(dtw, m)?)?;
    m.add_function(wrap_pyfunction!(recognize, m)?)?;
    m.add_function(wrap_pyfunction!(generate_demonstrations, m)?)?;
    m.add_function(wrap_pyfunction!(execute, m)?)?;
    Ok(())
}
