//! Descriptive statistics, Pearson correlation and forecast-accuracy metrics.
//!
//! Standard deviations use the population (divide-by-n) convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> Option<f64> {
    if x.is_empty() {
        None
    } else {
        Some(x.iter().sum::<f64>() / x.len() as f64)
    }
}

/// Population variance, or `None` for an empty slice.
pub fn variance(x: &[f64]) -> Option<f64> {
    let m = mean(x)?;
    Some(x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64)
}

pub fn std_dev(x: &[f64]) -> Option<f64> {
    variance(x).map(f64::sqrt)
}

fn has_spread(x: &[f64]) -> bool {
    x.iter().any(|v| *v != x[0])
}

/// Sample Pearson correlation, clamped to [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "pearson: length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate(format!(
            "pearson needs at least 2 pairs, got {}",
            x.len()
        )));
    }
    if !has_spread(x) || !has_spread(y) {
        return Err(Error::Degenerate("pearson: zero variance input".into()));
    }
    let mx = mean(x).unwrap();
    let my = mean(y).unwrap();
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Affine map to z-scores, kept so centers can be mapped back to raw units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    pub fn fit(x: &[f64]) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::Degenerate(format!(
                "standardize needs at least 2 values, got {}",
                x.len()
            )));
        }
        if !has_spread(x) {
            return Err(Error::Degenerate("standardize: zero variance input".into()));
        }
        Ok(Standardizer {
            mean: mean(x).unwrap(),
            std: std_dev(x).unwrap(),
        })
    }

    /// Identity transform.
    pub fn identity() -> Self {
        Standardizer { mean: 0.0, std: 1.0 }
    }

    pub fn transform(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

pub fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    let s = Standardizer::fit(x)?;
    Ok(x.iter().map(|v| s.transform(*v)).collect())
}

/// Forecast accuracy summary over paired observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub n: usize,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    /// `None` when fewer than two pairs or the actuals are constant.
    pub r_squared: Option<f64>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

impl MetricsBundle {
    pub fn r_squared(&self) -> Result<f64> {
        self.r_squared
            .ok_or_else(|| Error::Degenerate("R² undefined: need at least 2 pairs with non-constant actuals".into()))
    }
}

/// MAE, MSE, RMSE and R² (about the mean of `actual`, never clamped).
pub fn evaluate_forecasts(actual: &[f64], predicted: &[f64]) -> Result<MetricsBundle> {
    if actual.len() != predicted.len() {
        return Err(Error::Argument(format!(
            "evaluate_forecasts: length mismatch ({} vs {})",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::Argument("evaluate_forecasts: no pairs".into()));
    }
    let n = actual.len() as f64;
    let mut abs = 0.0;
    let mut ss_res = 0.0;
    for (a, p) in actual.iter().zip(predicted) {
        let e = a - p;
        abs += e.abs();
        ss_res += e * e;
    }
    let mse = ss_res / n;
    let r_squared = if actual.len() >= 2 && has_spread(actual) {
        let m = mean(actual).unwrap();
        let ss_tot: f64 = actual.iter().map(|a| (a - m) * (a - m)).sum();
        Some(1.0 - ss_res / ss_tot)
    } else {
        None
    };
    Ok(MetricsBundle {
        n: actual.len(),
        mae: abs / n,
        mse,
        rmse: mse.sqrt(),
        r_squared,
        actual: actual.to_vec(),
        predicted: predicted.to_vec(),
    })
}
