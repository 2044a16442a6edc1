//! Small-order ARIMA(p, d, q) for very short annual series.
//!
//! Orders are limited to p, d, q ∈ {0, 1} with an optional drift term.
//! Estimation minimises the conditional sum of squares (CSS) with
//! pre-sample observations and residuals fixed at zero:
//!
//! ```text
//! z[t] = w[t] - drift
//! e[t] = z[t] - phi * z[t-1] - theta * e[t-1]
//! ```
//!
//! where `w` is the `d`-times differenced series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient bound; |phi| and |theta| never exceed it.
pub const COEF_BOUND: f64 = 0.99;
pub const GRID_POINTS: usize = 2001;
pub const GOLDEN_TOL: f64 = 1e-6;
pub const MIN_SELECT_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: u8,
    pub d: u8,
    pub q: u8,
    pub drift: bool,
}

impl ArimaOrder {
    pub const RANDOM_WALK: ArimaOrder = ArimaOrder {
        p: 0,
        d: 1,
        q: 0,
        drift: false,
    };
    pub const RANDOM_WALK_DRIFT: ArimaOrder = ArimaOrder {
        p: 0,
        d: 1,
        q: 0,
        drift: true,
    };

    pub fn new(p: u8, d: u8, q: u8, drift: bool) -> Result<Self> {
        if p > 1 || d > 1 || q > 1 {
            return Err(Error::Argument(format!(
                "order ({p},{d},{q}) unsupported: p, d and q must each be 0 or 1"
            )));
        }
        Ok(ArimaOrder { p, d, q, drift })
    }

    /// Estimated mean-equation coefficients, excluding the innovation variance.
    pub fn free_params(&self) -> usize {
        (self.p + self.q) as usize + usize::from(self.drift)
    }

    /// Whether `n` observations can identify this order.
    pub fn fits_length(&self, n: usize) -> bool {
        n > self.d as usize && self.free_params() < n - self.d as usize
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)?;
        if self.drift {
            f.write_str("+drift")?;
        }
        Ok(())
    }
}

impl FromStr for ArimaOrder {
    type Err = Error;

    /// Parses `p,d,q` or `p,d,q,drift`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Argument(format!("order `{s}` must look like p,d,q or p,d,q,drift"));
        let digit = |t: &str| t.parse::<u8>().map_err(|_| bad());
        match parts.as_slice() {
            [p, d, q] => ArimaOrder::new(digit(p)?, digit(d)?, digit(q)?, false),
            [p, d, q, "drift"] => ArimaOrder::new(digit(p)?, digit(d)?, digit(q)?, true),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    pub drift_value: Option<f64>,
    /// One residual per differenced observation.
    pub residuals: Vec<f64>,
    pub css: f64,
    pub train: Vec<f64>,
}

impl ArimaModel {
    /// The differenced training series with any drift removed.
    fn centered(&self) -> Vec<f64> {
        let w = difference(&self.train, self.order.d).expect("fitted series is long enough");
        let mu = self.drift_value.unwrap_or(0.0);
        w.into_iter().map(|v| v - mu).collect()
    }
}

pub fn difference(x: &[f64], d: u8) -> Result<Vec<f64>> {
    if d > 1 {
        return Err(Error::Argument(format!("difference order {d} unsupported")));
    }
    if x.len() < d as usize + 1 {
        return Err(Error::Argument(format!(
            "cannot difference {} values {d} time(s)",
            x.len()
        )));
    }
    Ok(match d {
        0 => x.to_vec(),
        _ => x.windows(2).map(|w| w[1] - w[0]).collect(),
    })
}

/// Inverse of first differencing: `[start, start + diffs[0], ...]`.
pub fn integrate(diffs: &[f64], start: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(diffs.len() + 1);
    out.push(start);
    let mut level = start;
    for d in diffs {
        level += d;
        out.push(level);
    }
    out
}

fn residuals(z: &[f64], phi: f64, theta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.len());
    let (mut prev_z, mut prev_e) = (0.0, 0.0);
    for &v in z {
        let e = v - phi * prev_z - theta * prev_e;
        out.push(e);
        prev_z = v;
        prev_e = e;
    }
    out
}

/// Conditional sum of squares at the given coefficients.
pub fn css(z: &[f64], phi: f64, theta: f64) -> f64 {
    let (mut prev_z, mut prev_e, mut sum) = (0.0, 0.0, 0.0);
    for &v in z {
        let e = v - phi * prev_z - theta * prev_e;
        sum += e * e;
        prev_z = v;
        prev_e = e;
    }
    sum
}

pub fn grid() -> impl Iterator<Item = f64> {
    let step = 2.0 * COEF_BOUND / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(move |i| -COEF_BOUND + i as f64 * step)
}

fn grid_step() -> f64 {
    2.0 * COEF_BOUND / (GRID_POINTS - 1) as f64
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Refines `x0` within one grid step, keeping it if the refinement is no better.
fn refine(f: impl Fn(f64) -> f64, x0: f64) -> f64 {
    let h = grid_step();
    let lo = (x0 - h).max(-COEF_BOUND);
    let hi = (x0 + h).min(COEF_BOUND);
    let x = golden_section(&f, lo, hi, GOLDEN_TOL);
    if f(x) <= f(x0) {
        x
    } else {
        x0
    }
}

fn argmin_grid(f: impl Fn(f64) -> f64) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for x in grid() {
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// Fits `order` to `series` by conditional least squares.
pub fn fit(series: &[f64], order: ArimaOrder) -> Result<ArimaModel> {
    let order = ArimaOrder::new(order.p, order.d, order.q, order.drift)?;
    if let Some(v) = series.iter().find(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("series contains non-finite value {v}")));
    }
    if !order.fits_length(series.len()) {
        return Err(Error::InsufficientData(format!(
            "order {order} needs more than {} observations",
            series.len()
        )));
    }
    let w = difference(series, order.d)?;
    let drift_value = order.drift.then(|| w.iter().sum::<f64>() / w.len() as f64);
    let z: Vec<f64> = w.iter().map(|v| v - drift_value.unwrap_or(0.0)).collect();

    if order.p + order.q >= 1 && w.iter().all(|v| *v == w[0]) {
        return Err(Error::DegenerateFit(format!(
            "differenced series is constant; order {order} is unidentifiable"
        )));
    }

    let (phi, theta) = match (order.p, order.q) {
        (0, 0) => (None, None),
        (1, 0) => {
            let num: f64 = z.windows(2).map(|p| p[1] * p[0]).sum();
            let den: f64 = z.windows(2).map(|p| p[0] * p[0]).sum();
            if den == 0.0 {
                return Err(Error::DegenerateFit("AR(1) regressor is identically zero".into()));
            }
            (Some((num / den).clamp(-COEF_BOUND, COEF_BOUND)), None)
        }
        (0, 1) => {
            let f = |t: f64| css(&z, 0.0, t);
            let t = refine(f, argmin_grid(f));
            (None, Some(t))
        }
        _ => {
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for p in grid() {
                for t in grid() {
                    let v = css(&z, p, t);
                    if v < best.0 {
                        best = (v, p, t);
                    }
                }
            }
            let p = refine(|p| css(&z, p, best.2), best.1);
            let t = refine(|t| css(&z, p, t), best.2);
            (Some(p), Some(t))
        }
    };

    let e = residuals(&z, phi.unwrap_or(0.0), theta.unwrap_or(0.0));
    Ok(ArimaModel {
        order,
        phi,
        theta,
        drift_value,
        css: e.iter().map(|v| v * v).sum(),
        residuals: e,
        train: series.to_vec(),
    })
}

/// Point forecasts for the `h` steps after the training window.
pub fn forecast(model: &ArimaModel, h: usize) -> Result<Vec<f64>> {
    if h < 1 {
        return Err(Error::Argument("forecast horizon must be at least 1".into()));
    }
    let z = model.centered();
    let phi = model.phi.unwrap_or(0.0);
    let theta = model.theta.unwrap_or(0.0);
    let mu = model.drift_value.unwrap_or(0.0);
    let mut prev_z = *z.last().expect("non-empty differenced series");
    let mut prev_e = *model.residuals.last().expect("non-empty residuals");
    let mut w = Vec::with_capacity(h);
    for _ in 0..h {
        let next = phi * prev_z + theta * prev_e;
        w.push(next + mu);
        prev_z = next;
        prev_e = 0.0;
    }
    Ok(match model.order.d {
        0 => w,
        _ => integrate(&w, *model.train.last().expect("non-empty training series"))[1..].to_vec(),
    })
}

/// Small-sample corrected AIC with `k = free params + 1`.
///
/// `None` when the correction term is undefined (n' - k - 1 <= 0).
pub fn aicc(css: f64, n_eff: usize, free_params: usize) -> Option<f64> {
    let k = free_params as f64 + 1.0;
    let n = n_eff as f64;
    if n - k - 1.0 <= 0.0 {
        return None;
    }
    let fit_term = if css > 0.0 {
        n * (css / n).ln()
    } else {
        f64::NEG_INFINITY
    };
    Some(fit_term + 2.0 * k * n / (n - k - 1.0))
}

/// Candidate orders considered by [`select_order`], in preference order.
pub const CANDIDATES: [ArimaOrder; 5] = [
    ArimaOrder::RANDOM_WALK_DRIFT,
    ArimaOrder::RANDOM_WALK,
    ArimaOrder {
        p: 1,
        d: 0,
        q: 0,
        drift: false,
    },
    ArimaOrder {
        p: 1,
        d: 1,
        q: 0,
        drift: false,
    },
    ArimaOrder {
        p: 0,
        d: 1,
        q: 1,
        drift: false,
    },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub order: ArimaOrder,
    pub css: Option<f64>,
    pub aicc: Option<f64>,
    /// Why the candidate was not scored.
    pub skipped: Option<String>,
}

/// Fits every candidate and reports its AICc.
pub fn score_candidates(series: &[f64]) -> Vec<CandidateScore> {
    CANDIDATES
        .iter()
        .map(|&order| {
            let skip = |why: String| CandidateScore {
                order,
                css: None,
                aicc: None,
                skipped: Some(why),
            };
            match fit(series, order) {
                Err(e) => skip(e.to_string()),
                Ok(m) => match aicc(m.css, series.len() - order.d as usize, order.free_params()) {
                    None => CandidateScore {
                        css: Some(m.css),
                        ..skip("AICc correction undefined for this sample size".into())
                    },
                    Some(a) => CandidateScore {
                        order,
                        css: Some(m.css),
                        aicc: Some(a),
                        skipped: None,
                    },
                },
            }
        })
        .collect()
}

fn same_score(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Chooses the AICc-minimising candidate order.
///
/// Equal scores (including two exact fits) go to the candidate with fewer
/// free parameters, then to the earlier entry of [`CANDIDATES`]. If nothing
/// can be scored the result is (0,1,0)+drift when it fits, else (0,1,0).
pub fn select_order(series: &[f64]) -> Result<ArimaOrder> {
    if series.len() < MIN_SELECT_LEN {
        return Err(Error::InsufficientData(format!(
            "order selection needs at least {MIN_SELECT_LEN} observations, got {}",
            series.len()
        )));
    }
    let scores = score_candidates(series);
    let mut best: Option<(f64, ArimaOrder)> = None;
    for s in &scores {
        let Some(a) = s.aicc else { continue };
        let better = match best {
            None => true,
            Some((b, bo)) => {
                if same_score(a, b) {
                    s.order.free_params() < bo.free_params()
                } else {
                    a < b
                }
            }
        };
        if better {
            best = Some((a, s.order));
        }
    }
    Ok(match best {
        Some((_, order)) => order,
        None if fit(series, ArimaOrder::RANDOM_WALK_DRIFT).is_ok() => ArimaOrder::RANDOM_WALK_DRIFT,
        None => ArimaOrder::RANDOM_WALK,
    })
}
