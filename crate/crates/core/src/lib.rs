//! PM2.5 air-quality analytics for country-level Asian data: ingestion and
//! cleaning, regional trend and correlation studies, K-means pollution
//! clustering and short-series ARIMA forecasting with accuracy metrics.

pub mod analysis;
pub mod arima;
pub mod chart;
pub mod cli;
pub mod cluster;
pub mod data;
pub mod error;
pub mod stats;

pub use error::{Error, Result};
