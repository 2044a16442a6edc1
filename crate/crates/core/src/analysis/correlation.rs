//! Correlation studies. These always use observed values only: zero-filled
//! PM2.5 cells never enter a correlation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::report::{Cell, Exclusion, StudyReport, Table};
use crate::data::{CountryRecord, Dataset, RegionId, FIRST_YEAR, LAST_DEATH_YEAR, LAST_OBSERVED_YEAR};
use crate::error::{Error, Result};
use crate::stats::{mean, pearson};

const OBSERVED_ONLY_NOTE: &str =
    "Correlations use observed values only; zero-filled PM2.5 cells are ignored regardless of fill policy.";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCorrelation {
    pub n: usize,
    /// `None` when the region has fewer than two usable pairs or no spread.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityPair {
    pub country: String,
    pub region: RegionId,
    pub density: f64,
    pub pm25: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCorrelation {
    pub r: f64,
    pub pairs: Vec<DensityPair>,
    pub per_region: BTreeMap<RegionId, RegionCorrelation>,
    pub exclusions: Vec<Exclusion>,
}

/// Pearson correlation of population density against 2023 PM2.5.
pub fn corr_density_pm25(ds: &Dataset) -> Result<DensityCorrelation> {
    let mut pairs = Vec::new();
    let mut exclusions = Vec::new();
    for r in ds.records() {
        match (r.density, r.observed_pm25(LAST_OBSERVED_YEAR)) {
            (Some(density), Some(pm25)) => pairs.push(DensityPair {
                country: r.country.clone(),
                region: r.region,
                density,
                pm25,
            }),
            (None, _) => exclusions.push(Exclusion::new(&r.country, "no population density")),
            (_, None) => exclusions.push(Exclusion::new(&r.country, "no observed 2023 PM2.5")),
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyStudy(
            "no country has both population density and an observed 2023 PM2.5 value; supply the full country CSV with Population_2023 and Area_km2".into(),
        ));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.density).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.pm25).collect();
    let r = pearson(&xs, &ys)?;

    let mut per_region = BTreeMap::new();
    for region in RegionId::ALL {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs
            .iter()
            .filter(|p| p.region == region)
            .map(|p| (p.density, p.pm25))
            .unzip();
        if !x.is_empty() {
            per_region.insert(
                region,
                RegionCorrelation {
                    n: x.len(),
                    r: pearson(&x, &y).ok(),
                },
            );
        }
    }
    Ok(DensityCorrelation {
        r,
        pairs,
        per_region,
        exclusions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PmWindow {
    /// 2018..=2023
    Full,
    /// 2018..=2021, aligned with the death-rate years.
    DeathYears,
}

impl PmWindow {
    pub fn years(self) -> (i32, i32) {
        match self {
            PmWindow::Full => (FIRST_YEAR, LAST_OBSERVED_YEAR),
            PmWindow::DeathYears => (FIRST_YEAR, LAST_DEATH_YEAR),
        }
    }
}

impl fmt::Display for PmWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.years();
        write!(f, "{a}-{b}")
    }
}

/// Unit at which PM2.5 and death-rate means are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CorrelationLevel {
    #[default]
    Country,
    /// Country means are averaged again within each region.
    Region,
}

impl FromStr for CorrelationLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "country" => Ok(CorrelationLevel::Country),
            "region" => Ok(CorrelationLevel::Region),
            other => Err(Error::Argument(format!("unknown correlation level `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanPair {
    pub label: String,
    pub pm25_mean: f64,
    pub death_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmDeathCorrelation {
    pub window: PmWindow,
    pub level: CorrelationLevel,
    pub r: f64,
    pub pairs: Vec<MeanPair>,
    pub exclusions: Vec<Exclusion>,
}

fn observed_pm_mean(r: &CountryRecord, (from, to): (i32, i32)) -> Option<f64> {
    let values: Vec<f64> = (from..=to).filter_map(|y| r.observed_pm25(y)).collect();
    mean(&values)
}

fn death_mean(r: &CountryRecord) -> Option<f64> {
    mean(&r.deaths.present_in(FIRST_YEAR, LAST_DEATH_YEAR))
}

/// Pearson correlation of mean PM2.5 over `window` against mean 2018-2021
/// death rate.
pub fn corr_pm25_deaths(ds: &Dataset, window: PmWindow, level: CorrelationLevel) -> Result<PmDeathCorrelation> {
    let mut country_pairs: Vec<(RegionId, MeanPair)> = Vec::new();
    let mut exclusions = Vec::new();
    for r in ds.records() {
        match (observed_pm_mean(r, window.years()), death_mean(r)) {
            (Some(pm25_mean), Some(death_mean)) => country_pairs.push((
                r.region,
                MeanPair {
                    label: r.country.clone(),
                    pm25_mean,
                    death_mean,
                },
            )),
            (None, _) => exclusions.push(Exclusion::new(&r.country, format!("no observed PM2.5 in {window}"))),
            (_, None) => exclusions.push(Exclusion::new(&r.country, "no death-rate value in 2018-2021")),
        }
    }
    if country_pairs.is_empty() {
        return Err(Error::EmptyStudy(
            "no country has both PM2.5 and death-rate values; supply the full country CSV with Death_2018..Death_2021"
                .into(),
        ));
    }
    let pairs: Vec<MeanPair> = match level {
        CorrelationLevel::Country => country_pairs.into_iter().map(|(_, p)| p).collect(),
        CorrelationLevel::Region => RegionId::ALL
            .iter()
            .filter_map(|reg| {
                let members: Vec<&MeanPair> = country_pairs.iter().filter(|(r, _)| r == reg).map(|(_, p)| p).collect();
                let pm: Vec<f64> = members.iter().map(|p| p.pm25_mean).collect();
                let d: Vec<f64> = members.iter().map(|p| p.death_mean).collect();
                Some(MeanPair {
                    label: reg.name().to_string(),
                    pm25_mean: mean(&pm)?,
                    death_mean: mean(&d)?,
                })
            })
            .collect(),
    };
    let x: Vec<f64> = pairs.iter().map(|p| p.pm25_mean).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.death_mean).collect();
    let r = pearson(&x, &y)?;
    Ok(PmDeathCorrelation {
        window,
        level,
        r,
        pairs,
        exclusions,
    })
}

/// Square correlation matrix with row/column labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrMatrix {
    /// Pairwise Pearson matrix over equally long columns.
    pub fn from_columns(labels: &[&str], columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.len();
        let mut values = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let r = pearson(&columns[i], &columns[j])?;
                values[i][j] = r;
                values[j][i] = r;
            }
        }
        Ok(CorrMatrix {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            values,
        })
    }

    fn to_table(&self, name: &str) -> Table {
        let mut cols = vec![""];
        cols.extend(self.labels.iter().map(String::as_str));
        let mut t = Table::new(name, &cols);
        for (label, row) in self.labels.iter().zip(&self.values) {
            let mut cells: Vec<Cell> = vec![label.as_str().into()];
            cells.extend(row.iter().map(|v| Cell::Number(*v)));
            t.push(cells);
        }
        t
    }
}

pub fn density_matrix(study: &DensityCorrelation) -> Result<CorrMatrix> {
    let d: Vec<f64> = study.pairs.iter().map(|p| p.density).collect();
    let pm: Vec<f64> = study.pairs.iter().map(|p| p.pm25).collect();
    CorrMatrix::from_columns(&["population_density", "pm25_2023"], &[d, pm])
}

/// 3×3 matrix over countries having both PM2.5 window means and a death mean.
pub fn pm_death_matrix(ds: &Dataset) -> Result<CorrMatrix> {
    let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
    for r in ds.records() {
        if let (Some(a), Some(b), Some(d)) = (
            observed_pm_mean(r, PmWindow::Full.years()),
            observed_pm_mean(r, PmWindow::DeathYears.years()),
            death_mean(r),
        ) {
            cols[0].push(a);
            cols[1].push(b);
            cols[2].push(d);
        }
    }
    CorrMatrix::from_columns(
        &[
            "pm25_mean_2018_2023",
            "pm25_mean_2018_2021",
            "death_rate_mean_2018_2021",
        ],
        &cols,
    )
}

fn correlation_report(study: &str, ds: &Dataset, exclusions: &[Exclusion]) -> StudyReport {
    let mut report = StudyReport::new(study, ds);
    report.notes.push(OBSERVED_ONLY_NOTE.to_string());
    let excluded: Vec<&str> = exclusions.iter().map(|e| e.country.as_str()).collect();
    report.exclusions = exclusions.to_vec();
    report.included = ds
        .records()
        .iter()
        .map(|r| r.country.clone())
        .filter(|c| !excluded.contains(&c.as_str()))
        .collect();
    report
}

pub fn density_report(ds: &Dataset) -> Result<StudyReport> {
    let study = corr_density_pm25(ds)?;
    let mut report = correlation_report("correlate-density", ds, &study.exclusions);
    report.param("pm25_year", LAST_OBSERVED_YEAR);
    report.summarize("pearson_r", study.r).summarize("n", study.pairs.len());
    let regional: BTreeMap<&str, &RegionCorrelation> = study.per_region.iter().map(|(k, v)| (k.name(), v)).collect();
    report.summarize("per_region", regional);

    let mut pairs = Table::new("density_pairs", &["region", "country", "density_per_km2", "pm25_2023"]);
    for p in &study.pairs {
        pairs.push(vec![
            p.region.name().into(),
            p.country.as_str().into(),
            p.density.into(),
            p.pm25.into(),
        ]);
    }
    report.tables.push(pairs);
    report
        .tables
        .push(density_matrix(&study)?.to_table("density_correlation_matrix"));
    Ok(report.finish())
}

pub fn deaths_correlation_report(ds: &Dataset, level: CorrelationLevel) -> Result<StudyReport> {
    let full = corr_pm25_deaths(ds, PmWindow::Full, level)?;
    let early = corr_pm25_deaths(ds, PmWindow::DeathYears, level)?;
    let mut report = correlation_report("correlate-deaths", ds, &full.exclusions);
    report
        .param("level", level)
        .param("death_years", format!("{FIRST_YEAR}-{LAST_DEATH_YEAR}"));
    report
        .summarize("pearson_r_pm25_2018_2023", full.r)
        .summarize("pearson_r_pm25_2018_2021", early.r)
        .summarize("n", full.pairs.len());

    let mut t = Table::new(
        "pm25_death_means",
        &["label", "pm25_mean_2018_2023", "death_rate_mean_2018_2021"],
    );
    for p in &full.pairs {
        t.push(vec![p.label.as_str().into(), p.pm25_mean.into(), p.death_mean.into()]);
    }
    report.tables.push(t);
    if let Ok(m) = pm_death_matrix(ds) {
        report.tables.push(m.to_table("pm25_death_correlation_matrix"));
    }
    Ok(report.finish())
}
