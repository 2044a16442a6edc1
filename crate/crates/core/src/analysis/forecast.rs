use serde::Serialize;

use super::report::{Cell, Exclusion, StudyReport, Table};
use crate::arima::{fit, forecast, select_order, ArimaOrder, MIN_SELECT_LEN};
use crate::data::{Dataset, RegionId, FIRST_YEAR, FORECAST_YEAR, LAST_OBSERVED_YEAR};
use crate::error::{Error, Result};
use crate::stats::{evaluate_forecasts, MetricsBundle};

/// Published pooled 2023 accuracy figures: MAE, MSE, RMSE, R².
pub const REFERENCE_METRICS: [(&str, f64); 4] = [("mae", 3.99), ("mse", 33.80), ("rmse", 5.81), ("r_squared", 0.86)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRow {
    pub country: String,
    pub region: RegionId,
    pub order: ArimaOrder,
    /// `"aicc"` or `"manual"`.
    pub order_source: &'static str,
    pub train: Vec<f64>,
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    pub drift: Option<f64>,
    pub css: f64,
    /// Model output before flooring.
    pub raw_prediction: f64,
    /// Reported prediction, floored at 0.
    pub prediction: f64,
    pub actual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastStudy {
    pub train_start: i32,
    pub train_end: i32,
    pub test_year: i32,
    pub order_override: Option<ArimaOrder>,
    pub rows: Vec<ForecastRow>,
    /// Pooled over every row; `None` when actuals are unavailable.
    pub metrics: Option<MetricsBundle>,
    pub exclusions: Vec<Exclusion>,
}

/// Per-country ARIMA fits on `2018..=train_end`, forecasting `test_year`.
///
/// Countries with a gap in the training window, fewer than four training
/// values, or (for years up to 2023) no actual for `test_year` are excluded.
pub fn forecast_study(
    ds: &Dataset,
    train_end: i32,
    test_year: i32,
    order_override: Option<ArimaOrder>,
) -> Result<ForecastStudy> {
    let train_start = FIRST_YEAR;
    if train_end > LAST_OBSERVED_YEAR || train_end < train_start {
        return Err(Error::Argument(format!(
            "train end {train_end} must be in {train_start}..={LAST_OBSERVED_YEAR}"
        )));
    }
    if test_year <= train_end || test_year > FORECAST_YEAR {
        return Err(Error::Argument(format!(
            "test year {test_year} must be in {}..={FORECAST_YEAR}",
            train_end + 1
        )));
    }
    let evaluable = test_year <= LAST_OBSERVED_YEAR;
    let horizon = (test_year - train_end) as usize;

    let mut rows = Vec::new();
    let mut exclusions = Vec::new();
    for r in ds.records() {
        let exclude = |why: String| Exclusion::new(&r.country, why);
        let Some(train) = r.pm25.window(train_start, train_end) else {
            let missing: Vec<String> = (train_start..=train_end)
                .filter(|y| r.pm25.get(*y).is_none())
                .map(|y| y.to_string())
                .collect();
            exclusions.push(exclude(format!(
                "missing PM2.5 in training window: {}",
                missing.join(", ")
            )));
            continue;
        };
        if train.len() < MIN_SELECT_LEN {
            exclusions.push(exclude(format!(
                "training window has {} values, at least {MIN_SELECT_LEN} needed",
                train.len()
            )));
            continue;
        }
        let actual = r.pm25.get(test_year);
        if evaluable && actual.is_none() {
            exclusions.push(exclude(format!("missing {test_year} actual")));
            continue;
        }
        let (order, order_source) = match order_override {
            Some(o) => (o, "manual"),
            None => match select_order(&train) {
                Ok(o) => (o, "aicc"),
                Err(e) => {
                    exclusions.push(exclude(e.to_string()));
                    continue;
                }
            },
        };
        let model = match fit(&train, order) {
            Ok(m) => m,
            Err(e) => {
                exclusions.push(exclude(e.to_string()));
                continue;
            }
        };
        let raw_prediction = forecast(&model, horizon)?[horizon - 1];
        rows.push(ForecastRow {
            country: r.country.clone(),
            region: r.region,
            order,
            order_source,
            train,
            phi: model.phi,
            theta: model.theta,
            drift: model.drift_value,
            css: model.css,
            raw_prediction,
            prediction: raw_prediction.max(0.0),
            actual: if evaluable { actual } else { None },
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyStudy(format!(
            "no country has a complete {train_start}-{train_end} PM2.5 series of at least {MIN_SELECT_LEN} values{}",
            if evaluable {
                format!(" and a {test_year} actual")
            } else {
                String::new()
            }
        )));
    }
    rows.sort_by(|a, b| a.country.cmp(&b.country));
    let metrics = if evaluable {
        let actual: Vec<f64> = rows
            .iter()
            .map(|r| r.actual.expect("evaluable row has actual"))
            .collect();
        let predicted: Vec<f64> = rows.iter().map(|r| r.prediction).collect();
        Some(evaluate_forecasts(&actual, &predicted)?)
    } else {
        None
    };
    Ok(ForecastStudy {
        train_start,
        train_end,
        test_year,
        order_override,
        rows,
        metrics,
        exclusions,
    })
}

fn metric_value(m: &MetricsBundle, name: &str) -> Option<f64> {
    match name {
        "mae" => Some(m.mae),
        "mse" => Some(m.mse),
        "rmse" => Some(m.rmse),
        "r_squared" => m.r_squared,
        _ => None,
    }
}

/// Metrics next to the published reference with percent deviation.
pub fn reference_comparison(m: &MetricsBundle) -> Table {
    let mut t = Table::new(
        "reference_comparison",
        &["metric", "value", "reference", "percent_deviation"],
    );
    for (name, reference) in REFERENCE_METRICS {
        let value = metric_value(m, name);
        t.push(vec![
            name.into(),
            Cell::opt(value),
            reference.into(),
            Cell::opt(value.map(|v| (v - reference) / reference * 100.0)),
        ]);
    }
    t
}

impl ForecastStudy {
    pub fn report(&self, ds: &Dataset, study: &str) -> StudyReport {
        let mut report = StudyReport::new(study, ds);
        report
            .param("train_start", self.train_start)
            .param("train_end", self.train_end)
            .param("test_year", self.test_year)
            .param(
                "order",
                self.order_override
                    .map(|o| o.to_string())
                    .unwrap_or_else(|| "aicc".into()),
            )
            .param("prediction_floor", 0.0);
        report.included = self.rows.iter().map(|r| r.country.clone()).collect();
        report.exclusions = self.exclusions.clone();
        if self.metrics.is_none() {
            report.notes.push(format!(
                "No actual values exist for {}; accuracy metrics are not computed.",
                self.test_year
            ));
        }

        let mut t = Table::new(
            "forecasts",
            &[
                "country",
                "region",
                "order",
                "order_source",
                "phi",
                "theta",
                "drift",
                "css",
                "raw_prediction",
                "prediction",
                "actual",
                "error",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.country.as_str().into(),
                r.region.name().into(),
                r.order.to_string().into(),
                r.order_source.into(),
                Cell::opt(r.phi),
                Cell::opt(r.theta),
                Cell::opt(r.drift),
                r.css.into(),
                r.raw_prediction.into(),
                r.prediction.into(),
                Cell::opt(r.actual),
                Cell::opt(r.actual.map(|a| a - r.prediction)),
            ]);
        }
        report.tables.push(t);

        match &self.metrics {
            Some(m) => {
                report
                    .summarize("n", m.n)
                    .summarize("mae", m.mae)
                    .summarize("mse", m.mse)
                    .summarize("rmse", m.rmse)
                    .summarize("r_squared", m.r_squared);
                let mut mt = Table::new("metrics", &["metric", "value"]);
                mt.push(vec!["mae".into(), m.mae.into()]);
                mt.push(vec!["mse".into(), m.mse.into()]);
                mt.push(vec!["rmse".into(), m.rmse.into()]);
                mt.push(vec!["r_squared".into(), Cell::opt(m.r_squared)]);
                mt.push(vec!["n".into(), m.n.into()]);
                report.tables.push(mt);
            }
            None => {
                report.summarize("metrics", Option::<f64>::None);
            }
        }
        report.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{embedded_paper_dataset, CountryRecord, FillPolicy, YearSeries};
    use approx::assert_relative_eq;

    fn rec(name: &str, values: &[f64]) -> CountryRecord {
        let pairs: Vec<(i32, f64)> = values.iter().enumerate().map(|(i, v)| (2018 + i as i32, *v)).collect();
        CountryRecord::new(
            name,
            RegionId::SouthAsia,
            YearSeries::from_pairs(2018, 2024, &pairs).unwrap(),
            None,
            None,
            YearSeries::deaths(),
        )
        .unwrap()
    }

    fn ds(recs: Vec<CountryRecord>) -> Dataset {
        Dataset::new(recs, FillPolicy::Exclude, "t").unwrap()
    }

    #[test]
    fn constant_and_ramp_countries() {
        let d = ds(vec![
            rec("Flat", &[30.0; 6]),
            rec("Ramp", &[10.0, 12.0, 14.0, 16.0, 18.0, 21.0]),
        ]);
        let s = forecast_study(&d, 2022, 2023, None).unwrap();
        let flat = s.rows.iter().find(|r| r.country == "Flat").unwrap();
        assert_eq!(flat.prediction, 30.0);
        let ramp = s.rows.iter().find(|r| r.country == "Ramp").unwrap();
        assert_eq!(ramp.order, ArimaOrder::RANDOM_WALK_DRIFT);
        assert_eq!(ramp.css, 0.0);
        assert_relative_eq!(ramp.prediction, 20.0);
        let m = s.metrics.unwrap();
        assert_eq!(m.n, 2);
        assert_relative_eq!(m.mae, 0.5);
    }

    #[test]
    fn gaps_and_missing_actuals_are_excluded_with_reasons() {
        let mut gap = rec("Gap", &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        gap.pm25.set(2020, None).unwrap();
        let mut no_actual = rec("NoActual", &[1.0, 2.0, 3.0, 4.0, 5.0]);
        no_actual.pm25.set(2023, None).unwrap();
        let d = ds(vec![gap, no_actual, rec("Ok", &[5.0, 6.0, 5.0, 7.0, 6.0, 8.0])]);
        let s = forecast_study(&d, 2022, 2023, None).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows.len() + s.exclusions.len(), 3);
        assert!(s
            .exclusions
            .iter()
            .any(|e| e.country == "Gap" && e.reason.contains("2020")));
        assert!(s
            .exclusions
            .iter()
            .any(|e| e.country == "NoActual" && e.reason.contains("2023")));
    }

    #[test]
    fn forecasts_for_2024_have_no_metrics() {
        let d = ds(vec![
            rec("A", &[5.0, 6.0, 5.0, 7.0, 6.0, 8.0]),
            rec("B", &[9.0, 9.5, 10.0, 10.5, 11.0, 11.5]),
        ]);
        let s = forecast_study(&d, 2023, 2024, None).unwrap();
        assert!(s.metrics.is_none());
        assert!(s.rows.iter().all(|r| r.actual.is_none()));
        let report = s.report(&d, "forecast");
        assert!(report.table("metrics").is_none());
        assert_eq!(report.summary["metrics"], serde_json::Value::Null);
    }

    #[test]
    fn predictions_are_floored_but_raw_kept() {
        let d = ds(vec![rec("Falling", &[40.0, 30.0, 20.0, 10.0, 1.0, 0.0])]);
        let s = forecast_study(&d, 2022, 2023, Some(ArimaOrder::RANDOM_WALK_DRIFT)).unwrap();
        let row = &s.rows[0];
        assert!(row.raw_prediction < 0.0);
        assert_eq!(row.prediction, 0.0);
        assert_eq!(row.order_source, "manual");
    }

    #[test]
    fn embedded_dataset_has_no_complete_training_window() {
        let err = forecast_study(&embedded_paper_dataset(), 2022, 2023, None).unwrap_err();
        assert!(matches!(err, Error::EmptyStudy(_)));
    }

    #[test]
    fn bad_years() {
        let d = ds(vec![rec("A", &[1.0; 6])]);
        assert!(matches!(forecast_study(&d, 2023, 2023, None), Err(Error::Argument(_))));
        assert!(matches!(forecast_study(&d, 2022, 2025, None), Err(Error::Argument(_))));
    }

    #[test]
    fn reference_deviation() {
        let m = evaluate_forecasts(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        let t = reference_comparison(&m);
        assert_eq!(t.rows[0][3], Cell::Number(-100.0));
    }
}
