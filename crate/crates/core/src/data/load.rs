use std::io::{Read, Write};

use log::warn;

use super::{
    CountryRecord, Dataset, FillPolicy, RegionId, YearSeries, FIRST_YEAR, LAST_DEATH_YEAR, LAST_OBSERVED_YEAR,
};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 14] = [
    "Region",
    "Country",
    "PM25_2018",
    "PM25_2019",
    "PM25_2020",
    "PM25_2021",
    "PM25_2022",
    "PM25_2023",
    "Population_2023",
    "Area_km2",
    "Death_2018",
    "Death_2019",
    "Death_2020",
    "Death_2021",
];

/// Parses a raw cell, tolerating thousands separators and padding.
///
/// Anything that is not a finite decimal number is treated as missing.
pub fn parse_number(text: &str) -> Option<f64> {
    let cleaned: String = text.trim().chars().filter(|&c| c != ',').collect();
    let cleaned = cleaned.trim();
    if cleaned.is_empty() {
        return None;
    }
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

struct Columns {
    region: usize,
    country: usize,
    pm25: Vec<(i32, usize)>,
    population: usize,
    area: usize,
    deaths: Vec<(i32, usize)>,
}

impl Columns {
    fn resolve(header: &csv::StringRecord) -> Result<Self> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}') == name)
                .ok_or_else(|| Error::Schema(name.to_string()))
        };
        let region = find("Region")?;
        let country = find("Country")?;
        let pm25 = (FIRST_YEAR..=LAST_OBSERVED_YEAR)
            .map(|y| find(&format!("PM25_{y}")).map(|c| (y, c)))
            .collect::<Result<_>>()?;
        let deaths = (FIRST_YEAR..=LAST_DEATH_YEAR)
            .map(|y| find(&format!("Death_{y}")).map(|c| (y, c)))
            .collect::<Result<_>>()?;
        Ok(Columns {
            region,
            country,
            pm25,
            population: find("Population_2023")?,
            area: find("Area_km2")?,
            deaths,
        })
    }
}

/// Reads the country CSV, dropping non-Asian rows and applying `fill_policy`.
pub fn load_dataset<R: Read>(input: R, fill_policy: FillPolicy, source: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = reader.headers()?.clone();
    let cols = Columns::resolve(&header)?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 1;
        let cell = |c: usize| row.get(c).unwrap_or("");
        let invalid = |message: String| Error::Validation { row: line, message };

        let Some(region) = RegionId::from_token(cell(cols.region)) else {
            warn!("row {line}: dropping non-Asian region `{}`", cell(cols.region).trim());
            continue;
        };
        let country = cell(cols.country).trim().to_string();
        if country.is_empty() {
            return Err(invalid("empty country name".into()));
        }

        let mut pm25 = YearSeries::pm25();
        for &(year, c) in &cols.pm25 {
            pm25.set(year, parse_number(cell(c)))
                .map_err(|e| invalid(format!("{country} PM25_{year}: {e}")))?;
        }
        let mut deaths = YearSeries::deaths();
        for &(year, c) in &cols.deaths {
            deaths
                .set(year, parse_number(cell(c)))
                .map_err(|e| invalid(format!("{country} Death_{year}: {e}")))?;
        }
        let population = parse_number(cell(cols.population));
        let area = parse_number(cell(cols.area));
        let record =
            CountryRecord::new(country, region, pm25, population, area, deaths).map_err(|e| invalid(e.to_string()))?;
        records.push(record);
    }
    Dataset::new(records, fill_policy, source)
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `ds` in the same schema `load_dataset` reads.
pub fn write_dataset<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in ds.records() {
        let mut row = vec![r.region.name().to_string(), r.country.clone()];
        // Zero-filled cells are written empty so reloading reproduces them.
        row.extend((FIRST_YEAR..=LAST_OBSERVED_YEAR).map(|y| cell(r.observed_pm25(y))));
        row.push(cell(r.population));
        row.push(cell(r.area));
        row.extend((FIRST_YEAR..=LAST_DEATH_YEAR).map(|y| cell(r.deaths.get(y))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
