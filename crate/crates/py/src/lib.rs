//! Python bindings: model specification parsing, dataset loading, synthetic
//! generation and estimation, exposed as the `mnlfit_py` extension module.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mnlfit::amabs::AmabsConfig;
use mnlfit::data;
use mnlfit::model::{Batch, EvalOrder, LogLikelihood};
use mnlfit::optim::{self, Algorithm, OptimizerConfig, OrderUsed, StepInfo};

fn to_py_err(e: mnlfit::Error) -> PyErr {
    match e {
        mnlfit::Error::Config(_) | mnlfit::Error::ModelSpec(_) | mnlfit::Error::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// A parsed model specification.
#[pyclass(name = "ModelSpec", module = "mnlfit_py", skip_from_py_object)]
#[derive(Clone)]
struct PyModelSpec {
    inner: mnlfit::ModelSpec,
}

#[pymethods]
impl PyModelSpec {
    #[getter]
    fn parameters(&self) -> Vec<String> {
        self.inner.parameters.clone()
    }

    #[getter]
    fn alternatives(&self) -> Vec<String> {
        self.inner.alternatives.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelSpec(J={}, K={})",
            self.inner.alternative_count(),
            self.inner.parameter_count()
        )
    }

    /// Render back to the text format.
    fn to_text(&self) -> String {
        data::model_spec_to_string(&self.inner)
    }
}

/// An immutable, validated dataset.
#[pyclass(name = "Dataset", module = "mnlfit_py")]
struct PyDataset {
    inner: mnlfit::Dataset,
}

#[pymethods]
impl PyDataset {
    #[getter]
    fn n_obs(&self) -> usize {
        self.inner.n_obs()
    }

    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.column_names().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n_obs={}, J={})",
            self.inner.n_obs(),
            self.inner.n_alternatives()
        )
    }
}

type TraceRow = (
    usize,
    usize,
    &'static str,
    f64,
    f64,
    &'static str,
    Option<f64>,
    f64,
);

/// Outcome of one estimation run.
#[pyclass(name = "EstimationResult", module = "mnlfit_py")]
struct PyEstimationResult {
    #[pyo3(get)]
    theta: Vec<f64>,
    #[pyo3(get)]
    parameters: Vec<String>,
    #[pyo3(get)]
    final_ll: f64,
    #[pyo3(get)]
    rel_grad: f64,
    #[pyo3(get)]
    epochs: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    wall_time_s: f64,
    #[pyo3(get)]
    std_errors: Option<Vec<f64>>,
    trace_rows: Vec<TraceRow>,
}

#[pymethods]
impl PyEstimationResult {
    /// Iteration trace as a list of dicts.
    fn trace<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
        use pyo3::types::PyDict;
        let mut out = Vec::with_capacity(self.trace_rows.len());
        for row in &self.trace_rows {
            let d = PyDict::new(py);
            d.set_item("k", row.0)?;
            d.set_item("batch_size", row.1)?;
            d.set_item("order", row.2)?;
            d.set_item("value", row.3)?;
            d.set_item("rel_grad", row.4)?;
            d.set_item("step_kind", row.5)?;
            d.set_item("step_size", row.6)?;
            d.set_item("epochs", row.7)?;
            out.push(d);
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "EstimationResult(converged={}, final_ll={:.4}, epochs={:.2})",
            self.converged, self.final_ll, self.epochs
        )
    }
}

impl PyEstimationResult {
    fn from_run(result: optim::RunResult, parameters: Vec<String>, se: Option<Vec<f64>>) -> Self {
        let trace_rows = result
            .trace
            .iter()
            .map(|r| {
                let order = match r.order_used {
                    OrderUsed::FirstOrder => "first",
                    OrderUsed::SecondOrder => "second",
                };
                let (kind, size) = match r.step {
                    StepInfo::LineSearch { alpha } => ("line_search", Some(alpha)),
                    StepInfo::TrustRegion { radius } => ("trust_region", Some(radius)),
                    StepInfo::None => ("none", None),
                };
                (r.k, r.batch_size, order, r.value, r.rel_grad, kind, size, r.epochs)
            })
            .collect();
        PyEstimationResult {
            theta: result.theta.to_vec(),
            parameters,
            final_ll: result.final_eval.value,
            rel_grad: result.rel_grad,
            epochs: result.epochs,
            iterations: result.iterations,
            converged: result.converged,
            wall_time_s: result.wall_time.as_secs_f64(),
            std_errors: se,
            trace_rows,
        }
    }
}

/// Parse a model specification from its text form.
#[pyfunction]
fn parse_model_spec(text: &str) -> PyResult<PyModelSpec> {
    let inner = data::parse_model_spec_str(text).map_err(to_py_err)?;
    Ok(PyModelSpec { inner })
}

/// Load a CSV dataset against a model specification.
#[pyfunction]
fn load_csv(path: &str, spec: &PyModelSpec) -> PyResult<PyDataset> {
    let inner = data::load_csv(std::path::Path::new(path), &spec.inner).map_err(to_py_err)?;
    Ok(PyDataset { inner })
}

/// Generate a synthetic dataset from a TOML recipe; returns
/// `(dataset, model_spec, theta_star)`.
#[pyfunction]
fn generate_synthetic(config_toml: &str) -> PyResult<(PyDataset, PyModelSpec, Vec<f64>)> {
    let spec = data::SyntheticSpec::from_toml(config_toml).map_err(to_py_err)?;
    let (dataset, theta) = data::generate_synthetic(&spec).map_err(to_py_err)?;
    let model = data::synthetic_model_spec(&spec);
    Ok((
        PyDataset { inner: dataset },
        PyModelSpec { inner: model },
        theta.to_vec(),
    ))
}

/// The fifteen algorithm names.
#[pyfunction]
fn algorithms() -> Vec<&'static str> {
    Algorithm::ALL.iter().map(|a| a.name()).collect()
}

/// Log likelihood and gradient of a model/dataset pair at theta (full data).
#[pyfunction]
fn log_likelihood(spec: &PyModelSpec, data: &PyDataset, theta: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
    let ll = LogLikelihood::bind(&spec.inner, &data.inner).map_err(to_py_err)?;
    let eval = ll
        .evaluate(&theta, &Batch::full(ll.n_obs()), EvalOrder::Gradient)
        .map_err(to_py_err)?;
    Ok((eval.value, eval.gradient().to_vec()))
}

/// Choice probabilities of one observation row at theta.
#[pyfunction]
fn choice_probabilities(
    spec: &PyModelSpec,
    data: &PyDataset,
    theta: Vec<f64>,
    row: usize,
) -> PyResult<Vec<f64>> {
    let ll = LogLikelihood::bind(&spec.inner, &data.inner).map_err(to_py_err)?;
    let p = ll.choice_probabilities(&theta, row).map_err(to_py_err)?;
    Ok(p.to_vec())
}

/// Estimate a model. `algorithm` is one of `algorithms()`; the remaining
/// keywords mirror the CLI flags.
#[pyfunction]
#[pyo3(signature = (
    spec,
    data,
    algorithm = "HAMABS",
    epsilon = 1e-6,
    max_epochs = 1000,
    seed = 0,
    batch0 = 1000,
    window = 10,
    threshold = 0.01,
    count = 2,
    factor = 2.0,
    hybrid_threshold = 0.30,
    theta0 = None,
    std_errors = false,
))]
#[allow(clippy::too_many_arguments)]
fn estimate(
    spec: &PyModelSpec,
    data: &PyDataset,
    algorithm: &str,
    epsilon: f64,
    max_epochs: u32,
    seed: u64,
    batch0: usize,
    window: usize,
    threshold: f64,
    count: u32,
    factor: f64,
    hybrid_threshold: f64,
    theta0: Option<Vec<f64>>,
    std_errors: bool,
) -> PyResult<PyEstimationResult> {
    let alg = Algorithm::parse(algorithm).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown algorithm '{algorithm}'; expected one of {:?}",
            algorithms()
        ))
    })?;
    let ll = LogLikelihood::bind(&spec.inner, &data.inner).map_err(to_py_err)?;
    let mut config = OptimizerConfig::new(alg);
    config.epsilon = epsilon;
    config.max_epochs = max_epochs;
    config.seed = seed;
    config.amabs = AmabsConfig {
        window,
        threshold,
        failure_cap: count,
        expansion: factor,
        initial_batch: batch0,
    };
    if alg.is_hybrid() {
        config.hybrid_threshold = Some(hybrid_threshold);
    }
    config.theta0 = theta0.map(ndarray::Array1::from_vec);

    let result = optim::run(&ll, &config).map_err(to_py_err)?;
    let se = if std_errors {
        Some(
            optim::standard_errors(&ll, &result.theta.view())
                .map_err(to_py_err)?
                .to_vec(),
        )
    } else {
        None
    };
    Ok(PyEstimationResult::from_run(
        result,
        spec.inner.parameters.clone(),
        se,
    ))
}

#[pymodule]
fn mnlfit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelSpec>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyEstimationResult>()?;
    m.add_function(wrap_pyfunction!(parse_model_spec, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(algorithms, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(choice_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    Ok(())
}
