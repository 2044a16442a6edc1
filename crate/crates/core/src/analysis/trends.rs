use std::collections::BTreeMap;

use serde::Serialize;

use super::report::{Cell, Exclusion, StudyReport, Table};
use crate::data::{CountryRecord, Dataset, RegionId, YearSeries, FIRST_YEAR, LAST_OBSERVED_YEAR};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCell {
    pub mean: f64,
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl TrendCell {
    fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(TrendCell {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            count: values.len(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Per-region, per-year averages. Cells without contributors are absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionalTrendTable {
    pub first_year: i32,
    pub last_year: i32,
    pub cells: BTreeMap<RegionId, BTreeMap<i32, TrendCell>>,
}

impl RegionalTrendTable {
    pub(crate) fn build(
        ds: &Dataset,
        first_year: i32,
        last_year: i32,
        value: impl Fn(&CountryRecord, i32) -> Option<f64>,
    ) -> Self {
        let mut cells = BTreeMap::new();
        for region in RegionId::ALL {
            let mut row = BTreeMap::new();
            for year in first_year..=last_year {
                let values: Vec<f64> = ds.in_region(region).filter_map(|r| value(r, year)).collect();
                if let Some(c) = TrendCell::from_values(&values) {
                    row.insert(year, c);
                }
            }
            if !row.is_empty() {
                cells.insert(region, row);
            }
        }
        RegionalTrendTable {
            first_year,
            last_year,
            cells,
        }
    }

    pub fn get(&self, region: RegionId, year: i32) -> Option<&TrendCell> {
        self.cells.get(&region)?.get(&year)
    }

    pub fn mean(&self, region: RegionId, year: i32) -> Option<f64> {
        self.get(region, year).map(|c| c.mean)
    }

    pub(crate) fn to_table(&self, name: &str) -> Table {
        let mut t = Table::new(name, &["region", "year", "mean", "count", "min", "max"]);
        for (region, row) in &self.cells {
            for (year, c) in row {
                t.push(vec![
                    region.name().into(),
                    (*year).into(),
                    c.mean.into(),
                    c.count.into(),
                    c.min.into(),
                    c.max.into(),
                ]);
            }
        }
        t
    }
}

/// Regional PM2.5 averages for 2018..=2023 under the dataset's fill policy.
pub fn regional_trends(ds: &Dataset) -> Result<RegionalTrendTable> {
    if ds.is_empty() {
        return Err(Error::EmptyStudy("dataset has no countries".into()));
    }
    let table = RegionalTrendTable::build(ds, FIRST_YEAR, LAST_OBSERVED_YEAR, |r, y| r.pm25.get(y));
    if table.cells.is_empty() {
        return Err(Error::EmptyStudy("no country has any PM2.5 value".into()));
    }
    Ok(table)
}

pub(crate) fn series_row(r: &CountryRecord, series: &YearSeries, first: i32, last: i32) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![r.region.name().into(), r.country.as_str().into()];
    row.extend((first..=last).map(|y| Cell::opt(series.get(y))));
    row
}

/// Regional and per-country temporal trends as a report.
pub fn trends_report(ds: &Dataset) -> Result<StudyReport> {
    let table = regional_trends(ds)?;
    let mut report = StudyReport::new("trends", ds);
    report
        .param("first_year", FIRST_YEAR)
        .param("last_year", LAST_OBSERVED_YEAR);

    let mut cols = vec!["region".to_string(), "country".to_string()];
    cols.extend((FIRST_YEAR..=LAST_OBSERVED_YEAR).map(|y| y.to_string()));
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut series = Table::new("country_series", &cols);
    for r in ds.records() {
        if r.pm25.present_in(FIRST_YEAR, LAST_OBSERVED_YEAR).is_empty() {
            report
                .exclusions
                .push(Exclusion::new(&r.country, "no PM2.5 value in 2018-2023"));
        } else {
            report.included.push(r.country.clone());
            series.push(series_row(r, &r.pm25, FIRST_YEAR, LAST_OBSERVED_YEAR));
        }
    }

    let latest: BTreeMap<&str, Option<f64>> = RegionId::ALL
        .iter()
        .map(|reg| (reg.name(), table.mean(*reg, LAST_OBSERVED_YEAR)))
        .collect();
    let highest = latest
        .iter()
        .filter_map(|(k, v)| v.map(|v| (*k, v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k);
    report
        .summarize("regional_mean_2023", latest)
        .summarize("highest_region_2023", highest);
    report.tables.push(table.to_table("regional_trends"));
    report.tables.push(series);
    Ok(report.finish())
}
