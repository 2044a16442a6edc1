//! The five studies run over a [`Dataset`](crate::data::Dataset): regional
//! trends, death rates, correlations, clustering and forecasting.

mod clustering;
mod correlation;
mod deaths;
mod forecast;
mod report;
mod trends;

pub use clustering::{cluster_study, ClusterStudy, REFERENCE_CENTERS};
pub use correlation::{
    corr_density_pm25, corr_pm25_deaths, deaths_correlation_report, density_matrix, density_report, pm_death_matrix,
    CorrMatrix, CorrelationLevel, DensityCorrelation, DensityPair, MeanPair, PmDeathCorrelation, PmWindow,
    RegionCorrelation,
};
pub use deaths::{death_rate_summary, deaths_report, DeathRateSummary};
pub use forecast::{forecast_study, reference_comparison, ForecastRow, ForecastStudy, REFERENCE_METRICS};
pub use report::{Cell, Exclusion, StudyReport, Table};
pub use trends::{regional_trends, trends_report, RegionalTrendTable, TrendCell};
