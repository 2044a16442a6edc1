use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn with_module<R>(f: impl FnOnce(&Bound<'_, PyModule>) -> PyResult<R>) -> R {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "pm25").unwrap();
        pm25::pm25(&m).unwrap();
        f(&m).unwrap()
    })
}

#[test]
fn pearson_matches_core() {
    let r: f64 = with_module(|m| {
        m.getattr("pearson")?
            .call1((vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]))?
            .extract()
    });
    assert!((r - 1.0).abs() < 1e-12);
}

#[test]
fn embedded_dataset_round_trip() {
    with_module(|m| {
        let ds = m.getattr("Dataset")?.call_method1("embedded", ("zero",))?;
        assert_eq!(ds.len()?, 37);
        assert_eq!(ds.getattr("fill_policy")?.extract::<String>()?, "zero");
        let china: f64 = ds.call_method1("pm25", ("China", 2023))?.extract()?;
        assert_eq!(china, 42.2);
        let text: String = ds.call_method0("to_csv")?.extract()?;
        let again = m.getattr("Dataset")?.call_method1("from_csv_text", (text, "zero"))?;
        assert_eq!(again.len()?, 37);
        Ok(())
    });
}

#[test]
fn kmeans_returns_dict() {
    with_module(|m| {
        let pts = vec![
            ("a", 1.0),
            ("b", 2.0),
            ("c", 10.0),
            ("d", 11.0),
            ("e", 30.0),
            ("f", 31.0),
        ];
        let model = m.getattr("kmeans_fit")?.call1((pts, 3))?;
        let model = model.cast::<PyDict>()?;
        let wcss: f64 = model.get_item("wcss")?.unwrap().extract()?;
        assert!((wcss - 1.5).abs() < 1e-9);
        Ok(())
    });
}

#[test]
fn insufficiency_raises_dedicated_error() {
    with_module(|m| {
        let ds = m.getattr("Dataset")?.call_method0("embedded")?;
        let err = m.getattr("run_study")?.call1((ds, "correlate-density")).unwrap_err();
        let py = m.py();
        assert!(err.is_instance(py, &m.getattr("DataInsufficiencyError")?));
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        Ok(())
    });
}

#[test]
fn arima_forecast_with_and_without_order() {
    with_module(|m| {
        let f: Vec<f64> = m
            .getattr("arima_forecast")?
            .call1((vec![1.0, 2.0, 3.0, 4.0, 5.0], 2, "0,1,0,drift"))?
            .extract()?;
        assert!((f[0] - 6.0).abs() < 1e-9 && (f[1] - 7.0).abs() < 1e-9);
        let order: String = m
            .getattr("select_order")?
            .call1((vec![1.0, 2.0, 3.0, 4.0, 5.0],))?
            .extract()?;
        assert_eq!(order, "(0,1,0)+drift");
        Ok(())
    });
}

#[test]
fn cli_exit_codes() {
    with_module(|m| {
        let (code, _, err): (i32, String, String) = m.getattr("run_cli")?.call1((vec!["bogus"],))?.extract()?;
        assert_eq!(code, 1);
        assert!(err.contains("Usage"));
        Ok(())
    });
}
