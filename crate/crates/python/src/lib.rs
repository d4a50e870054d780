//! Python bindings: network presets and specs, the three estimators and a
//! few matrix helpers.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tropical_lyapunov::lyapunov::{
    estimate_monte_carlo, evaluate_by_decomposition, evaluate_closed_form, LyapunovEstimate,
    MonteCarloConfig,
};
use tropical_lyapunov::network::{
    compile, direct_trajectory, CompiledModel, NetworkSpec, Preset, PresetOptions,
};
use tropical_lyapunov::stochastic::{kingman_check, DEFAULT_EXPECTATION_SAMPLES};
use tropical_lyapunov::{
    classify as classify_matrix, Error, MatrixClass, SemifieldKind, ServiceDistribution,
    TropicalMatrix,
};

create_exception!(tropical_lyapunov, ModelError, PyValueError);
create_exception!(tropical_lyapunov, ExistenceError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::ModelInvalid(_) => ModelError::new_err(e.to_string()),
        Error::ExistenceUnverified(_) => ExistenceError::new_err(e.to_string()),
        Error::Parse(_) | Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Rows of floats; `None` and `-inf` are the zero element.
fn matrix_from_rows(rows: Vec<Vec<Option<f64>>>) -> PyResult<TropicalMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    let data = rows
        .into_iter()
        .flatten()
        .map(|v| v.filter(|x| *x != f64::NEG_INFINITY))
        .collect();
    TropicalMatrix::from_raw(SemifieldKind::MaxPlus, n, cols, data).map_err(py_err)
}

#[pyclass(frozen, get_all, module = "tropical_lyapunov")]
pub struct Estimate {
    method: String,
    value: f64,
    stderr: f64,
    ci95: (f64, f64),
    k: usize,
    replications: usize,
    note: Option<String>,
    /// `(k, value, stderr)` per requested horizon.
    checkpoints: Vec<(usize, f64, f64)>,
}

impl From<LyapunovEstimate> for Estimate {
    fn from(e: LyapunovEstimate) -> Self {
        Self {
            method: e.method.to_string(),
            value: e.lambda,
            stderr: e.stderr,
            ci95: e.ci95,
            k: e.k_used,
            replications: e.replications,
            note: e.note,
            checkpoints: e.checkpoints.iter().map(|c| (c.k, c.lambda, c.stderr)).collect(),
        }
    }
}

#[pymethods]
impl Estimate {
    #[getter]
    fn throughput(&self) -> Option<f64> {
        (self.value > 0.0).then(|| 1.0 / self.value)
    }

    fn __repr__(&self) -> String {
        format!(
            "Estimate(method={:?}, value={}, stderr={}, k={}, replications={})",
            self.method, self.value, self.stderr, self.k, self.replications
        )
    }
}

/// A compiled queueing network.
#[pyclass(frozen, module = "tropical_lyapunov")]
pub struct Network {
    model: CompiledModel,
}

fn parse_laws(v: Option<Vec<String>>) -> PyResult<Option<Vec<ServiceDistribution>>> {
    v.map(|v| v.iter().map(|s| s.parse().map_err(py_err)).collect())
        .transpose()
}

#[pymethods]
impl Network {
    /// Built-in network by name; service laws are strings such as `"exp(2)"`.
    #[staticmethod]
    #[pyo3(signature = (name, n=None, services=None, arrival=None, customers=None))]
    fn preset(
        name: &str,
        n: Option<usize>,
        services: Option<Vec<String>>,
        arrival: Option<String>,
        customers: Option<Vec<u32>>,
    ) -> PyResult<Self> {
        let preset: Preset = name.parse().map_err(py_err)?;
        let opts = PresetOptions {
            n,
            services: parse_laws(services)?,
            arrival: parse_laws(arrival.map(|a| vec![a]))?.map(|mut v| v.remove(0)),
            customers,
        };
        let spec = preset.build(&opts).map_err(|e| match e {
            Error::InvalidArgument(m) => ModelError::new_err(m),
            e => py_err(e),
        })?;
        Ok(Self {
            model: compile(&spec).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = NetworkSpec::from_json(text).map_err(py_err)?;
        Ok(Self {
            model: compile(&spec).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.model.spec().to_json()
    }

    /// Number of nodes.
    #[getter]
    fn dim(&self) -> usize {
        self.model.n()
    }

    /// Entries of the symbolic matrix as strings.
    fn matrix(&self) -> Vec<Vec<String>> {
        let a = self.model.a(1);
        (0..a.rows())
            .map(|i| (0..a.cols()).map(|j| a.get(i, j).to_string()).collect())
            .collect()
    }

    #[pyo3(signature = (seed=42, samples=DEFAULT_EXPECTATION_SAMPLES))]
    fn kingman<'py>(&self, py: Python<'py>, seed: u64, samples: usize) -> PyResult<Bound<'py, PyDict>> {
        let p = self.model.process(seed).map_err(py_err)?;
        let r = py.detach(|| kingman_check(&p, samples));
        let d = PyDict::new(py);
        d.set_item("ok", r.ok)?;
        d.set_item("e_norm", r.e_norm)?;
        d.set_item("rho_of_mean", r.rho_of_mean)?;
        Ok(d)
    }

    #[pyo3(signature = (k=10_000, reps=20, seed=42, checkpoints=None, override_existence=false))]
    fn monte_carlo(
        &self,
        py: Python<'_>,
        k: usize,
        reps: usize,
        seed: u64,
        checkpoints: Option<Vec<usize>>,
        override_existence: bool,
    ) -> PyResult<Estimate> {
        let p = self.model.process(seed).map_err(py_err)?;
        let cfg = MonteCarloConfig {
            k,
            replications: reps,
            override_existence,
            checkpoints: checkpoints.unwrap_or_default(),
            ..MonteCarloConfig::default()
        };
        py.detach(|| estimate_monte_carlo(&p, &cfg))
            .map(Estimate::from)
            .map_err(py_err)
    }

    /// Closed-form value, or `None` for a process of general type.
    #[pyo3(signature = (seed=42, samples=DEFAULT_EXPECTATION_SAMPLES))]
    fn closed_form(&self, py: Python<'_>, seed: u64, samples: usize) -> PyResult<Option<Estimate>> {
        let p = self.model.process(seed).map_err(py_err)?;
        py.detach(|| evaluate_closed_form(&p, samples))
            .map(|e| e.map(Estimate::from))
            .map_err(py_err)
    }

    #[pyo3(signature = (max_depth=3, seed=42, samples=DEFAULT_EXPECTATION_SAMPLES))]
    fn decomposition(
        &self,
        py: Python<'_>,
        max_depth: usize,
        seed: u64,
        samples: usize,
    ) -> PyResult<Option<Estimate>> {
        let p = self.model.process(seed).map_err(py_err)?;
        py.detach(|| evaluate_by_decomposition(&p, max_depth, samples))
            .map(|e| e.map(Estimate::from))
            .map_err(py_err)
    }

    /// Departure times x(1), ..., x(steps); `None` is the zero element.
    #[pyo3(signature = (steps, seed=42, replication=0))]
    fn trajectory(&self, steps: usize, seed: u64, replication: u64) -> PyResult<Vec<Vec<Option<f64>>>> {
        direct_trajectory(&self.model, seed, replication, steps).map_err(py_err)
    }
}

/// Maximum cycle mean of a square matrix; `None` when acyclic.
#[pyfunction]
fn spectral_radius(rows: Vec<Vec<Option<f64>>>) -> PyResult<Option<f64>> {
    let a = matrix_from_rows(rows)?;
    Ok(a.spectral_radius().map_err(py_err)?.value())
}

/// Structural class name of a square matrix.
#[pyfunction]
fn classify(rows: Vec<Vec<Option<f64>>>) -> PyResult<&'static str> {
    let a = matrix_from_rows(rows)?;
    Ok(match classify_matrix(&a).map_err(py_err)? {
        MatrixClass::Diagonal => "diagonal",
        MatrixClass::TriangularLower
        | MatrixClass::TriangularUpper
        | MatrixClass::TriangularUnderPermutation(_) => "triangular",
        MatrixClass::Similarity(_) => "similarity",
        MatrixClass::RankOne(..) => "rank_one",
        MatrixClass::General => "general",
    })
}

#[pymodule]
#[pyo3(name = "tropical_lyapunov")]
pub fn tropical_lyapunov_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_class::<Estimate>()?;
    m.add_function(wrap_pyfunction!(spectral_radius, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add("ModelError", m.py().get_type::<ModelError>())?;
    m.add("ExistenceError", m.py().get_type::<ExistenceError>())?;
    m.add("PRESETS", Preset::ALL.iter().map(|p| p.name()).collect::<Vec<_>>())?;
    Ok(())
}
