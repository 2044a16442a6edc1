//! Python bindings for `pm25_core`.
//!
//! Structured results (metrics, models, study reports) come back as plain
//! dicts and lists. Data-insufficiency errors raise `DataInsufficiencyError`,
//! a `ValueError` subclass; other invalid input raises `ValueError`.

use std::path::PathBuf;

use pm25_core::analysis::{self, CorrelationLevel};
use pm25_core::arima::{self, ArimaOrder};
use pm25_core::cluster;
use pm25_core::data::{embedded_paper_dataset, load_dataset, write_dataset, Dataset, FillPolicy};
use pm25_core::{stats, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde::Serialize;
use serde_json::Value;

create_exception!(
    pm25,
    DataInsufficiencyError,
    PyValueError,
    "Raised when the data cannot support the requested computation."
);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        e if e.is_data_insufficiency() => DataInsufficiencyError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_bound_py_any(py),
            (None, Some(u)) => u.into_bound_py_any(py),
            _ => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn policy(name: &str) -> PyResult<FillPolicy> {
    name.parse().map_err(py_err)
}

fn order(text: &str) -> PyResult<ArimaOrder> {
    text.parse().map_err(py_err)
}

/// Country-level PM2.5 panel with a fill policy.
#[pyclass(name = "Dataset", module = "pm25", frozen)]
pub struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    /// Built-in dataset of published values.
    #[staticmethod]
    #[pyo3(signature = (fill_policy = "exclude"))]
    fn embedded(fill_policy: &str) -> PyResult<Self> {
        let inner = embedded_paper_dataset()
            .with_fill_policy(policy(fill_policy)?)
            .map_err(py_err)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, fill_policy = "exclude"))]
    fn from_csv(path: PathBuf, fill_policy: &str) -> PyResult<Self> {
        let file = std::fs::File::open(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        let inner = load_dataset(file, policy(fill_policy)?, &path.display().to_string()).map_err(py_err)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (text, fill_policy = "exclude", source = "<string>"))]
    fn from_csv_text(text: &str, fill_policy: &str, source: &str) -> PyResult<Self> {
        let inner = load_dataset(text.as_bytes(), policy(fill_policy)?, source).map_err(py_err)?;
        Ok(PyDataset { inner })
    }

    fn with_fill_policy(&self, fill_policy: &str) -> PyResult<Self> {
        let inner = self.inner.with_fill_policy(policy(fill_policy)?).map_err(py_err)?;
        Ok(PyDataset { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(countries={}, fill_policy='{}', source='{}')",
            self.inner.len(),
            self.inner.fill_policy().name(),
            self.inner.source()
        )
    }

    #[getter]
    fn countries(&self) -> Vec<String> {
        self.inner.records().iter().map(|r| r.country.clone()).collect()
    }

    #[getter]
    fn fill_policy(&self) -> &'static str {
        self.inner.fill_policy().name()
    }

    #[getter]
    fn source(&self) -> String {
        self.inner.source().to_string()
    }

    /// PM2.5 for `country` in `year` under the fill policy, or None.
    fn pm25(&self, country: &str, year: i32) -> Option<f64> {
        self.inner.pm25(country, year)
    }

    /// The full record for `country` as a dict, or None.
    fn record<'py>(&self, py: Python<'py>, country: &str) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.inner.get(country).map(|r| to_py(py, r)).transpose()
    }

    /// Canonical CSV text; zero-filled cells are written empty.
    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_dataset(&self.inner, &mut buf).map_err(py_err)?;
        String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::pearson(&x, &y).map_err(py_err)
}

/// Population z-scores.
#[pyfunction]
fn standardize(x: Vec<f64>) -> PyResult<Vec<f64>> {
    stats::standardize(&x).map_err(py_err)
}

/// MAE, MSE, RMSE and R² as a dict.
#[pyfunction]
fn evaluate_forecasts<'py>(py: Python<'py>, actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &stats::evaluate_forecasts(&actual, &predicted).map_err(py_err)?)
}

/// Best-of-restarts 1-D K-means over `(id, value)` pairs.
#[pyfunction]
#[pyo3(signature = (points, k, seed = 0))]
fn kmeans_fit<'py>(py: Python<'py>, points: Vec<(String, f64)>, k: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &cluster::kmeans_fit(&points, k, seed).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (points, k_max = cluster::DEFAULT_K_MAX, seed = 0))]
fn elbow_curve<'py>(
    py: Python<'py>,
    points: Vec<(String, f64)>,
    k_max: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &cluster::elbow_curve(&points, k_max, seed).map_err(py_err)?)
}

/// Fits ARIMA `order` ("p,d,q" or "p,d,q,drift") by conditional sum of squares.
#[pyfunction]
fn arima_fit<'py>(py: Python<'py>, series: Vec<f64>, order: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &arima::fit(&series, self::order(order)?).map_err(py_err)?)
}

/// Forecasts `horizon` steps; without `order` the order is chosen by AICc.
#[pyfunction]
#[pyo3(signature = (series, horizon = 1, order = None))]
fn arima_forecast(series: Vec<f64>, horizon: usize, order: Option<&str>) -> PyResult<Vec<f64>> {
    let order = match order {
        Some(o) => self::order(o)?,
        None => arima::select_order(&series).map_err(py_err)?,
    };
    let model = arima::fit(&series, order).map_err(py_err)?;
    arima::forecast(&model, horizon).map_err(py_err)
}

/// AICc-selected order, formatted like "(0,1,0)+drift".
#[pyfunction]
fn select_order(series: Vec<f64>) -> PyResult<String> {
    arima::select_order(&series).map(|o| o.to_string()).map_err(py_err)
}

#[pyfunction]
fn regional_trends<'py>(py: Python<'py>, dataset: &PyDataset) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &analysis::regional_trends(&dataset.inner).map_err(py_err)?)
}

/// Runs a study and returns its report as a dict.
///
/// `study` is one of trends, deaths, correlate-density, correlate-deaths,
/// cluster, forecast.
#[pyfunction]
#[pyo3(signature = (dataset, study, k = 3, k_max = cluster::DEFAULT_K_MAX, seed = 0, level = "country", train_end = 2022, test_year = 2023, order = None))]
#[allow(clippy::too_many_arguments)]
fn run_study<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    study: &str,
    k: usize,
    k_max: usize,
    seed: u64,
    level: &str,
    train_end: i32,
    test_year: i32,
    order: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let ds = &dataset.inner;
    let report = match study {
        "trends" => analysis::trends_report(ds),
        "deaths" => analysis::deaths_report(ds),
        "correlate-density" => analysis::density_report(ds),
        "correlate-deaths" => {
            let level: CorrelationLevel = level.parse().map_err(py_err)?;
            analysis::deaths_correlation_report(ds, level)
        }
        "cluster" => analysis::cluster_study(ds, k, k_max, seed).map(|s| s.report(ds)),
        "forecast" => {
            let order = order.map(self::order).transpose()?;
            analysis::forecast_study(ds, train_end, test_year, order).map(|s| s.report(ds, "forecast"))
        }
        other => return Err(PyValueError::new_err(format!("unknown study `{other}`"))),
    }
    .map_err(py_err)?;
    to_py(py, &report)
}

/// Runs the command line in-process; returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let argv = std::iter::once("pm25".to_string()).chain(args);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = pm25_core::cli::run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

#[pymodule]
pub fn pm25(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("DataInsufficiencyError", m.py().get_type::<DataInsufficiencyError>())?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(standardize, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_forecasts, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans_fit, m)?)?;
    m.add_function(wrap_pyfunction!(elbow_curve, m)?)?;
    m.add_function(wrap_pyfunction!(arima_fit, m)?)?;
    m.add_function(wrap_pyfunction!(arima_forecast, m)?)?;
    m.add_function(wrap_pyfunction!(select_order, m)?)?;
    m.add_function(wrap_pyfunction!(regional_trends, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
