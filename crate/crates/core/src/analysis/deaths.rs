use std::collections::BTreeMap;

use serde::Serialize;

use super::report::{Exclusion, StudyReport, Table};
use super::trends::{series_row, RegionalTrendTable};
use crate::data::{Dataset, RegionId, FIRST_YEAR, LAST_DEATH_YEAR};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeathRateSummary {
    pub regional: RegionalTrendTable,
    /// South Asian country → rates for 2018..=2021.
    pub south_asia: BTreeMap<String, Vec<Option<f64>>>,
}

pub fn death_rate_summary(ds: &Dataset) -> Result<DeathRateSummary> {
    if !ds.records().iter().any(|r| r.deaths.count_present() > 0) {
        return Err(Error::EmptyStudy(
            "no death-rate values in the dataset; supply the full country CSV with Death_2018..Death_2021 columns"
                .into(),
        ));
    }
    let regional = RegionalTrendTable::build(ds, FIRST_YEAR, LAST_DEATH_YEAR, |r, y| r.deaths.get(y));
    let south_asia = ds
        .in_region(RegionId::SouthAsia)
        .filter(|r| r.deaths.count_present() > 0)
        .map(|r| {
            let rates = (FIRST_YEAR..=LAST_DEATH_YEAR).map(|y| r.deaths.get(y)).collect();
            (r.country.clone(), rates)
        })
        .collect();
    Ok(DeathRateSummary { regional, south_asia })
}

pub fn deaths_report(ds: &Dataset) -> Result<StudyReport> {
    let summary = death_rate_summary(ds)?;
    let mut report = StudyReport::new("deaths", ds);
    report
        .param("first_year", FIRST_YEAR)
        .param("last_year", LAST_DEATH_YEAR);

    let mut cols = vec!["region".to_string(), "country".to_string()];
    cols.extend((FIRST_YEAR..=LAST_DEATH_YEAR).map(|y| y.to_string()));
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut south = Table::new("south_asia_death_rates", &cols);
    for r in ds.records() {
        if r.deaths.count_present() == 0 {
            report
                .exclusions
                .push(Exclusion::new(&r.country, "no death-rate value in 2018-2021"));
            continue;
        }
        report.included.push(r.country.clone());
        if r.region == RegionId::SouthAsia {
            south.push(series_row(r, &r.deaths, FIRST_YEAR, LAST_DEATH_YEAR));
        }
    }

    let mut highest_region = BTreeMap::new();
    let mut highest_south_asian = BTreeMap::new();
    for year in FIRST_YEAR..=LAST_DEATH_YEAR {
        let top_region = RegionId::ALL
            .iter()
            .filter_map(|reg| summary.regional.mean(*reg, year).map(|m| (reg.name(), m)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(n, _)| n);
        highest_region.insert(year.to_string(), top_region);
        let idx = (year - FIRST_YEAR) as usize;
        let top_country = summary
            .south_asia
            .iter()
            .filter_map(|(c, rates)| rates[idx].map(|v| (c.as_str(), v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c.to_string());
        highest_south_asian.insert(year.to_string(), top_country);
    }
    report
        .summarize("highest_region_by_year", highest_region)
        .summarize("highest_south_asian_country_by_year", highest_south_asian);
    report.tables.push(summary.regional.to_table("regional_death_rates"));
    report.tables.push(south);
    Ok(report.finish())
}
